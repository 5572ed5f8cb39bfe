#pragma once

#include <Eigen/Dense>

#include "qlab/matrix.hpp"
#include "qlab/mdp.hpp"

namespace qlab {

// Everything derived from the Lyapunov equation of T at the optimal greedy
// policy: G, its square-root factors, the similarity transform B, and the
// spectral quantities entering the step-size design.
struct LyapunovAnalysis {
    Mat t_star;    // T at the optimal selector
    Mat g;         // SPD solution of G T + T^T G = -I
    Mat g_half;    // G^{1/2}
    Mat g_half_inv; // G^{-1/2}
    Mat b;         // G^{1/2} T G^{-1/2}
    double lambda_min_g_inv = 0.0;
    double sigma_max_b = 0.0;
    double norm2_g = 0.0;
    double norm2_g_inv = 0.0;
    double norm2_b = 0.0;

    static LyapunovAnalysis from_t(const Mat& t_star);
};

// Diminishing step size alpha_k = theta / (k + xi) with the certified
// parameter choices; beta = nu / 2 is the contraction margin.
struct StepSizePlan {
    double nu = 0.0;
    double sigma_max_b = 0.0;
    double xi = 0.0;
    double theta = 0.0;
    double beta = 0.0;
    double xi_factor = 8.0; // xi = xi_factor * sigma^2 / nu^2, in [8, 16]

    struct Certificate {
        bool xi_in_range = false;         // 8 s^2/nu^2 <= xi <= 16 s^2/nu^2
        bool theta_exact = false;         // theta = nu xi / (2 s^2)
        bool beta_theta_ok = false;       // beta * theta >= 2
        bool dmin_gamma_theta_ok = false; // d_min (1-gamma) theta >= 2
        bool theta_upper_ok = false;      // theta <= 4 |S||A| / ((1-gamma) d_min)
        bool xi_bounds_ok = false;        // 8/(SA)^2 <= xi <= 16 (SA)^{9/2} dmax^2 / ((1-g)^2 dmin^2)
        bool alpha0_admissible = false;   // alpha_0 <= 1/d_max
        bool all() const {
            return xi_in_range && theta_exact && beta_theta_ok && dmin_gamma_theta_ok &&
                   theta_upper_ok && xi_bounds_ok && alpha0_admissible;
        }
    };
    Certificate certificate;

    double alpha(double k) const { return theta / (k + xi); }
};

// Builds the plan from the Lyapunov analysis.  xi_factor may be overridden
// anywhere in [8, 16]; the default is the lower endpoint, which maximizes
// early step sizes.  Throws DegenerateSpectrum if sigma_max(B) = 0 and
// StepTooLarge if alpha_0 > 1/d_max (no admissible xi can fix this because
// alpha_0 = nu / (2 sigma_max(B)^2) does not depend on xi).
StepSizePlan design_stepsize(const LyapunovAnalysis& lyap, const StateActionDistribution& dist,
                             double gamma, double xi_factor = 8.0, int sa_size = 0);

// The raw parameter formulas alone (no certificate, no admissibility
// guard): xi = xi_factor sigma^2 / nu^2, theta = nu xi / (2 sigma^2),
// beta = nu / 2.
StepSizePlan stepsize_parameters(double nu, double sigma_max_b, double xi_factor = 8.0);

// lambda_max(X_k^T X_k) with X_k = I + alpha_k B; asserts the contraction
// bound lambda_max <= 1 - beta alpha_k and throws BoundViolated otherwise.
double xk_contraction_bound(const StepSizePlan& plan, const Mat& b, long long k);

} // namespace qlab
