#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/stepsize.hpp"

namespace qlab {

// (1/2) sum_i |p_i - q_i|.
double tv_distance(const Vec& p, const Vec& q);

// Geometric mixing envelope d_TV(mu_k, mu_inf) <= m rho^k for the
// state-action chain, with rho the second-largest eigenvalue modulus and m
// the smallest constant making the envelope hold pointwise over the
// computed horizon.
struct MixingProfile {
    Vec mu_inf;
    std::vector<Vec> mu_k;             // distribution at each step <= horizon
    std::vector<double> d_tv_curve;    // d_TV(mu_k, mu_inf)
    double m = 0.0;
    double rho = 0.0;

    // Smallest k with m rho^k <= c.
    long long tau_mix(double c) const;
};

MixingProfile fit_geometric_envelope(const TabularMdp& mdp, const BehaviorPolicy& policy,
                                     const Vec& mu0, long long horizon);

long long mixing_time(const MixingProfile& profile, double c);

// Logarithmic bound on tau_mix(alpha_k):
// log(m (k + xi) / theta) / log(1/rho) + 1.
double mixing_time_log_bound(const MixingProfile& profile, const StepSizePlan& plan, double k);

// Minimal k such that t >= 2 tau_mix(alpha_t) for all t in [k, scan_horizon],
// with a certificate (via the logarithmic bound) that the condition stays
// true beyond the horizon.  Throws HorizonTooShort if either part fails.
long long compute_kmix(const MixingProfile& profile, const StepSizePlan& plan,
                       long long scan_horizon);

} // namespace qlab
