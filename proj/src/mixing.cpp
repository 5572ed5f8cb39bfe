#include "qlab/mixing.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qlab {

double tv_distance(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw InvalidInput("distribution sizes differ");
    if (std::abs(p.sum() - 1.0) > 1e-9 || std::abs(q.sum() - 1.0) > 1e-9)
        throw InvalidInput("tv_distance arguments must sum to 1");
    return 0.5 * (p - q).lpNorm<1>();
}

long long MixingProfile::tau_mix(double c) const {
    if (!(c > 0.0)) throw InvalidInput("mixing threshold must be positive");
    if (m <= c) return 0;
    // ceil(log(m/c) / log(1/rho)), then correct for rounding either way.
    long long k = static_cast<long long>(std::ceil(std::log(m / c) / std::log(1.0 / rho)));
    k = std::max<long long>(k, 0);
    while (m * std::pow(rho, static_cast<double>(k)) > c) ++k;
    while (k > 0 && m * std::pow(rho, static_cast<double>(k - 1)) <= c) --k;
    return k;
}

MixingProfile fit_geometric_envelope(const TabularMdp& mdp, const BehaviorPolicy& policy,
                                     const Vec& mu0, long long horizon) {
    if (horizon < 1) throw InvalidInput("horizon must be >= 1");
    const Mat kernel = state_action_kernel(mdp, policy);
    const int n = static_cast<int>(kernel.rows());
    if (mu0.size() != n || mu0.minCoeff() < 0.0 || std::abs(mu0.sum() - 1.0) > 1e-12)
        throw InvalidInput("mu0 is not a probability vector over state-action pairs");
    MixingProfile profile;
    profile.mu_inf = stationary_distribution(mdp, policy).d();

    // rho = second-largest eigenvalue modulus of the chain.
    Eigen::EigenSolver<Mat> es(kernel, /*computeEigenvectors=*/false);
    std::vector<double> moduli(n);
    for (int i = 0; i < n; ++i) moduli[i] = std::abs(es.eigenvalues()(i));
    std::sort(moduli.begin(), moduli.end(), std::greater<double>());
    profile.rho = n > 1 ? moduli[1] : 0.0;
    if (profile.rho >= 1.0 - 1e-12) throw SlemDegenerate("second eigenvalue modulus is ~1");
    profile.rho = std::max(profile.rho, 1e-300);

    Vec mu = mu0;
    profile.mu_k.reserve(horizon + 1);
    profile.d_tv_curve.reserve(horizon + 1);
    for (long long k = 0; k <= horizon; ++k) {
        profile.mu_k.push_back(mu);
        profile.d_tv_curve.push_back(tv_distance(mu, profile.mu_inf));
        if (k < horizon) mu = kernel.transpose() * mu;
    }

    // The smallest m with d_TV(mu_k, mu_inf) <= m rho^k pointwise.  Ratios
    // where d_TV has hit the floating-point noise floor carry no
    // information and are skipped; 1e-15 is the lower clamp for the
    // stationary-start case.
    double m = 1e-15;
    for (long long k = 0; k <= horizon; ++k) {
        const double dtv = profile.d_tv_curve[static_cast<std::size_t>(k)];
        if (dtv < 1e-13) continue;
        m = std::max(m, dtv / std::pow(profile.rho, static_cast<double>(k)));
    }
    profile.m = m;
    for (long long k = 0; k <= horizon; ++k) {
        const double bound = profile.m * std::pow(profile.rho, static_cast<double>(k));
        const double dtv = profile.d_tv_curve[static_cast<std::size_t>(k)];
        if (dtv > bound * (1.0 + 1e-12) && dtv >= 1e-13)
            profile.m *= dtv / bound; // restore pointwise validity
    }
    return profile;
}

long long mixing_time(const MixingProfile& profile, double c) { return profile.tau_mix(c); }

double mixing_time_log_bound(const MixingProfile& profile, const StepSizePlan& plan, double k) {
    return std::log(profile.m * (k + plan.xi) / plan.theta) / std::log(1.0 / profile.rho) + 1.0;
}

long long compute_kmix(const MixingProfile& profile, const StepSizePlan& plan,
                       long long scan_horizon) {
    if (scan_horizon < 1) throw InvalidInput("scan horizon must be >= 1");
    auto holds = [&](long long t) {
        return t >= 2 * profile.tau_mix(plan.alpha(static_cast<double>(t)));
    };
    if (!holds(scan_horizon))
        throw HorizonTooShort("condition t >= 2 tau_mix(alpha_t) fails at the scan horizon");
    // Certify the condition persists beyond the horizon: the logarithmic
    // bound tau_mix(alpha_t) <= log(m (t+xi)/theta)/log(1/rho) + 1 grows
    // like log t while t grows linearly, so once t exceeds twice the bound
    // and the bound's derivative stays below 1/2, the gap only widens.
    const double t0 = static_cast<double>(scan_horizon);
    const double bound_at_horizon = mixing_time_log_bound(profile, plan, t0);
    const double bound_slope = 1.0 / (std::log(1.0 / profile.rho) * (t0 + plan.xi));
    if (!(t0 >= 2.0 * bound_at_horizon && bound_slope < 0.5))
        throw HorizonTooShort("cannot certify the mixing condition beyond the scan horizon");
    long long k = scan_horizon;
    while (k > 0 && holds(k - 1)) --k;
    return k;
}

} // namespace qlab
