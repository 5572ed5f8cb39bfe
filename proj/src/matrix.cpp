#include "qlab/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

namespace qlab {

double max_real_eigenvalue(const Mat& t) {
    Eigen::EigenSolver<Mat> es(t, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

HurwitzCertificate hurwitz_certificate(const Mat& t) {
    const int n = static_cast<int>(t.rows());
    HurwitzCertificate cert;
    cert.is_strictly_diag_dominant = true;
    cert.diagonals_negative = true;
    cert.gerschgorin_max_real_bound = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::abs(t(i, j));
        if (t(i, i) >= 0.0) cert.diagonals_negative = false;
        if (std::abs(t(i, i)) <= off) cert.is_strictly_diag_dominant = false;
        cert.gerschgorin_max_real_bound = std::max(cert.gerschgorin_max_real_bound, t(i, i) + off);
    }
    cert.max_real_eigenvalue = max_real_eigenvalue(t);
    return cert;
}

Mat solve_lyapunov(const Mat& t) {
    const int n = static_cast<int>(t.rows());
    if (t.cols() != n) throw InvalidInput("solve_lyapunov requires a square matrix");
    if (max_real_eigenvalue(t) >= 0.0) throw NotHurwitz("matrix is not Hurwitz");
    // vec(G T) = (T^T (x) I) vec(G) and vec(T^T G) = (I (x) T^T) vec(G), so
    // the equation becomes (T^T (x) I + I (x) T^T) vec(G) = -vec(I).
    const Mat tt = t.transpose();
    Mat system = Mat::Zero(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            // kron(T^T, I): block (i, j) is tt(i, j) * I.
            for (int k = 0; k < n; ++k) system(i * n + k, j * n + k) += tt(i, j);
    // kron(I, T^T): diagonal block i holds T^T.
    for (int blk = 0; blk < n; ++blk) system.block(blk * n, blk * n, n, n) += tt;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
    for (int i = 0; i < n; ++i) rhs(i * n + i) = -1.0;
    Eigen::PartialPivLU<Mat> lu(system);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12)) throw IllConditioned("vectorized Lyapunov system is ill-conditioned");
    Eigen::VectorXd vec_g = lu.solve(rhs);
    Mat g = Eigen::Map<Mat>(vec_g.data(), n, n);
    g = 0.5 * (g + g.transpose()).eval();
    const double residual = (g * t + t.transpose() * g + Mat::Identity(n, n)).lpNorm<Eigen::Infinity>();
    if (residual > 1e-8) throw IllConditioned("Lyapunov residual exceeds tolerance");
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Lyapunov solution is not SPD");
    return g;
}

std::pair<Mat, Mat> symmetric_sqrt(const Mat& g) {
    const int n = static_cast<int>(g.rows());
    if (g.cols() != n) throw InvalidInput("symmetric_sqrt requires a square matrix");
    if ((g - g.transpose()).lpNorm<Eigen::Infinity>() > 1e-10 * std::max(1.0, g.lpNorm<Eigen::Infinity>()))
        throw InvalidInput("matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Eigen::VectorXd lambda = es.eigenvalues();
    const double lmax = lambda.maxCoeff();
    if (!(lmax > 0.0) || lambda.minCoeff() <= 1e-14 * lmax)
        throw NotPositiveDefinite("matrix is not positive definite");
    const Eigen::VectorXd root = lambda.cwiseSqrt();
    Mat half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    Mat half_inv = es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return {std::move(half), std::move(half_inv)};
}

Mat similarity_transform(const Mat& t, const Mat& g) {
    auto [half, half_inv] = symmetric_sqrt(g);
    return half * t * half_inv;
}

Mat matrix_exponential(const Mat& t, double s) {
    if (s < 0.0) throw InvalidInput("matrix_exponential requires s >= 0");
    const int n = static_cast<int>(t.rows());
    if (t.cols() != n) throw InvalidInput("matrix_exponential requires a square matrix");
    Mat a = t * s;
    // Degree-13 Pade with scaling and squaring (Higham 2005).
    const double theta13 = 5.371920351148152;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        a /= std::ldexp(1.0, squarings);
    }
    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    const Mat eye = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a2 * a4;
    const Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                       b[3] * a2 + b[1] * eye);
    const Mat v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;
    Mat f = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) f = (f * f).eval();
    return f;
}

bool ltv_contraction_check(const std::vector<Mat>& a_seq, const Mat& p,
                           const std::vector<double>& p_seq) {
    if (a_seq.size() != p_seq.size()) throw InvalidInput("sequence lengths differ");
    Eigen::LLT<Mat> llt(p);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("P is not SPD");
    for (std::size_t k = 0; k < a_seq.size(); ++k) {
        Mat gap = p_seq[k] * p - a_seq[k].transpose() * p * a_seq[k];
        gap = 0.5 * (gap + gap.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Mat> es(gap, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10) return false;
    }
    return true;
}

} // namespace qlab
