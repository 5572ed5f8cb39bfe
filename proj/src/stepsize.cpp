#include "qlab/stepsize.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace qlab {

LyapunovAnalysis LyapunovAnalysis::from_t(const Mat& t_star) {
    LyapunovAnalysis out;
    out.t_star = t_star;
    out.g = solve_lyapunov(t_star);
    auto [half, half_inv] = symmetric_sqrt(out.g);
    out.g_half = std::move(half);
    out.g_half_inv = std::move(half_inv);
    out.b = out.g_half * t_star * out.g_half_inv;
    Eigen::SelfAdjointEigenSolver<Mat> es(out.g);
    const Eigen::VectorXd lambda = es.eigenvalues();
    out.norm2_g = lambda.maxCoeff();
    out.norm2_g_inv = 1.0 / lambda.minCoeff();
    out.lambda_min_g_inv = 1.0 / lambda.maxCoeff();
    Eigen::JacobiSVD<Mat> svd(out.b);
    out.sigma_max_b = svd.singularValues()(0);
    out.norm2_b = out.sigma_max_b;
    return out;
}

StepSizePlan stepsize_parameters(double nu, double sigma_max_b, double xi_factor) {
    if (!(xi_factor >= 8.0 && xi_factor <= 16.0))
        throw InvalidInput("xi_factor must lie in [8, 16]");
    if (!(nu > 0.0)) throw InvalidInput("nu must be positive");
    if (!(sigma_max_b > 0.0))
        throw DegenerateSpectrum("sigma_max(B) vanished; upstream analysis is corrupt");
    StepSizePlan plan;
    plan.nu = nu;
    plan.sigma_max_b = sigma_max_b;
    plan.xi_factor = xi_factor;
    plan.xi = xi_factor * sigma_max_b * sigma_max_b / (nu * nu);
    plan.theta = nu * plan.xi / (2.0 * sigma_max_b * sigma_max_b);
    plan.beta = nu / 2.0;
    return plan;
}

StepSizePlan design_stepsize(const LyapunovAnalysis& lyap, const StateActionDistribution& dist,
                             double gamma, double xi_factor, int sa_size) {
    const double nu = std::min((1.0 - gamma) * dist.d_min(), lyap.lambda_min_g_inv);
    StepSizePlan plan = stepsize_parameters(nu, lyap.sigma_max_b, xi_factor);
    const double ratio = plan.sigma_max_b * plan.sigma_max_b / (plan.nu * plan.nu);
    // alpha_0 = theta / xi = nu / (2 sigma^2) is independent of xi, so if the
    // nonnegativity guard fails, no admissible xi can repair it.
    const double alpha0 = plan.theta / plan.xi;
    if (alpha0 > 1.0 / dist.d_max() + 1e-15)
        throw StepTooLarge("alpha_0 exceeds 1/d_max for every admissible xi");

    const int n = sa_size > 0 ? sa_size : dist.size();
    const double dmin = dist.d_min();
    const double dmax = dist.d_max();
    const double slack = 1.0 + 1e-12;
    auto& cert = plan.certificate;
    cert.xi_in_range = plan.xi >= 8.0 * ratio / slack && plan.xi <= 16.0 * ratio * slack;
    cert.theta_exact =
        std::abs(plan.theta - plan.nu * plan.xi / (2.0 * plan.sigma_max_b * plan.sigma_max_b)) <=
        1e-12 * plan.theta;
    cert.beta_theta_ok = plan.beta * plan.theta >= 2.0 / slack;
    cert.dmin_gamma_theta_ok = dmin * (1.0 - gamma) * plan.theta >= 2.0 / slack;
    cert.theta_upper_ok = plan.theta <= slack * 4.0 * n / ((1.0 - gamma) * dmin);
    cert.xi_bounds_ok = plan.xi >= 8.0 / (slack * n * n) &&
                        plan.xi <= slack * 16.0 * std::pow(n, 4.5) * dmax * dmax /
                                       ((1.0 - gamma) * (1.0 - gamma) * dmin * dmin);
    cert.alpha0_admissible = alpha0 <= 1.0 / dmax + 1e-15;
    return plan;
}

double xk_contraction_bound(const StepSizePlan& plan, const Mat& b, long long k) {
    if (k < 0) throw InvalidInput("k must be nonnegative");
    const double alpha = plan.alpha(static_cast<double>(k));
    const Mat x = Mat::Identity(b.rows(), b.cols()) + alpha * b;
    Eigen::JacobiSVD<Mat> svd(x);
    const double lambda_max = svd.singularValues()(0) * svd.singularValues()(0);
    if (lambda_max > 1.0 - plan.beta * alpha + 1e-12)
        throw BoundViolated("lambda_max(X^T X) exceeds 1 - beta alpha_k");
    return lambda_max;
}

} // namespace qlab
