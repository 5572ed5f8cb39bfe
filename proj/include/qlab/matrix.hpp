#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

using Mat = Eigen::MatrixXd;

struct HurwitzCertificate {
    bool is_strictly_diag_dominant = false;
    bool diagonals_negative = false;
    // max_i ( [T]_ii + sum_{j != i} |[T]_ij| ); an upper bound on the real
    // part of any eigenvalue by the Gerschgorin disc theorem.
    double gerschgorin_max_real_bound = 0.0;
    double max_real_eigenvalue = 0.0;
};

double max_real_eigenvalue(const Mat& t);

HurwitzCertificate hurwitz_certificate(const Mat& t);

// Solves G T + T^T G = -I for symmetric positive-definite G via the
// vectorized Kronecker system.  Throws NotHurwitz if T has an eigenvalue
// with nonnegative real part and IllConditioned if the vectorized system's
// condition estimate exceeds 1e12.
Mat solve_lyapunov(const Mat& t);

// (G^{1/2}, G^{-1/2}) via symmetric eigendecomposition.  Throws
// NotPositiveDefinite if any eigenvalue <= 1e-14 * lambda_max.
std::pair<Mat, Mat> symmetric_sqrt(const Mat& g);

// B = G^{1/2} T G^{-1/2}.  For G solving the Lyapunov equation of T this
// satisfies B + B^T = -G^{-1}.
Mat similarity_transform(const Mat& t, const Mat& g);

// exp(t * s) by scaling and squaring with a degree-13 Pade approximant.
Mat matrix_exponential(const Mat& t, double s);

// True iff A_k^T P A_k <= p_k P (semidefinite order, slack 1e-10) for all k.
bool ltv_contraction_check(const std::vector<Mat>& a_seq, const Mat& p,
                           const std::vector<double>& p_seq);

} // namespace qlab
