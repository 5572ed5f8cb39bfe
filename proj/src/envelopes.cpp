#include "qlab/envelopes.hpp"

#include <cmath>

namespace qlab {
namespace {

void check_constants(const ProblemConstants& c) {
    if (!(c.sa >= 1.0) || !(c.gamma > 0.0 && c.gamma < 1.0) || !(c.d_min > 0.0) ||
        !(c.d_max >= c.d_min) || !(c.q0_dist >= 0.0) || !(c.xi > 0.0) || !(c.theta > 0.0))
        throw InvalidInput("invalid problem constants");
}

// log(prefactor * sa^a * dmax^b * dmin^-e * (1-gamma)^-f [* q0^h]); returns
// -inf when a q0 factor multiplies q0 = 0, which drops the branch.
double log_branch(const ProblemConstants& c, double prefactor, double sa_pow, double dmax_pow,
                  double one_minus_gamma_pow, double dmin_pow, double q0_pow = 0.0) {
    if (q0_pow > 0.0 && c.q0_dist == 0.0) return -std::numeric_limits<double>::infinity();
    double v = std::log(prefactor) + sa_pow * std::log(c.sa) + dmax_pow * std::log(c.d_max) -
               one_minus_gamma_pow * std::log(1.0 - c.gamma) - dmin_pow * std::log(c.d_min);
    if (q0_pow > 0.0) v += q0_pow * std::log(c.q0_dist);
    return v;
}

Envelope make_envelope(std::string name, const ProblemConstants& c, double log_c, double power) {
    Envelope e;
    e.name = std::move(name);
    e.log_c = log_c;
    e.power = power;
    e.xi = c.xi;
    return e;
}

} // namespace

Envelope envelope_lower_z(const ProblemConstants& c) {
    check_constants(c);
    const double b1 = log_branch(c, 8.0, 5.5, 2.0, 3.0, 3.0, 2.0);
    const double b2 = log_branch(c, 72.0, 3.0, 0.0, 5.0, 3.0);
    return make_envelope("lower_z", c, std::max(b1, b2), 1.0);
}

Envelope envelope_lower_q(const ProblemConstants& c) {
    check_constants(c);
    const double b1 = log_branch(c, 4.0, 3.0, 1.5, 1.5, 1.5, 1.0);
    const double b2 = log_branch(c, 14.0, 1.75, 0.5, 2.5, 1.5);
    return make_envelope("lower_q", c, std::max(b1, b2), 0.5);
}

Envelope envelope_upper_diff(const ProblemConstants& c) {
    check_constants(c);
    const double b1 = log_branch(c, 16.0, 4.0, 2.5, 2.5, 2.5, 1.0);
    const double b2 = log_branch(c, 56.0, 2.75, 1.5, 3.5, 2.5);
    return make_envelope("upper_diff", c, std::max(b1, b2), 0.5);
}

Envelope envelope_iid_total(const ProblemConstants& c) {
    check_constants(c);
    const double b1 = log_branch(c, 32.0, 4.0, 2.5, 2.5, 2.5, 1.0);
    const double b2 = log_branch(c, 112.0, 2.75, 1.5, 3.5, 2.5);
    return make_envelope("iid_total", c, std::max(b1, b2), 0.5);
}

double crossing_term_bound(const ProblemConstants& c) {
    check_constants(c);
    return std::exp(log_branch(c, 32.0, 3.0, 0.0, 4.0, 2.0));
}

SampleComplexityResult sample_complexity_iid(const ProblemConstants& c, double epsilon,
                                             double delta) {
    check_constants(c);
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
    const bool use_tail = delta >= 0.0;
    if (use_tail && !(delta > 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
    // Expectation form inverts the total envelope C / sqrt(k + xi) <= eps.
    // The tail form applies Markov's inequality, shrinking the threshold to
    // eps * delta; its appendix constant carries a 16-prefactor on the
    // q0-branch where the expectation bound has 32.
    const double log_c_exp = envelope_iid_total(c).log_c;
    const double b1_tail = log_branch(c, 16.0, 4.0, 2.5, 2.5, 2.5, 1.0);
    const double b2_tail = log_branch(c, 112.0, 2.75, 1.5, 3.5, 2.5);
    const double log_c_tail = std::max(b1_tail, b2_tail);
    const double log_c = use_tail ? log_c_tail : log_c_exp;
    const double threshold = use_tail ? epsilon * delta : epsilon;
    const double k_real = std::exp(2.0 * (log_c - std::log(threshold))) - c.xi;
    // Beyond 2^53 neighboring integers are indistinguishable in double
    // precision, so "smallest k" is no longer meaningful.
    if (k_real >= 9.0e15) throw DomainError("sample complexity exceeds the representable range");
    SampleComplexityResult out;
    out.k = k_real <= 0.0 ? 0 : static_cast<long long>(std::ceil(k_real));
    // The closed-form inversion is exact up to floating-point rounding in
    // exp/log; nudge to the smallest integer satisfying the envelope bound.
    const auto value = [&](long long k) {
        return std::exp(log_c - 0.5 * std::log(static_cast<double>(k) + c.xi));
    };
    for (int i = 0; i < 64 && value(out.k) > threshold; ++i) ++out.k;
    for (int i = 0; i < 64 && out.k > 0 && value(out.k - 1) <= threshold; ++i) --out.k;
    out.tail_prefactor_discrepancy = use_tail && std::abs(log_c_tail - log_c_exp) > 1e-12;
    return out;
}

double MarkovianEnvelope::evaluate(double k) const {
    if (k < static_cast<double>(k_mix))
        throw DomainError("Markovian envelope is only valid for k >= K_mix");
    const double tau = std::max(1.0, tau_bound(k));
    const double half_log = 0.5 * std::log(k + xi);
    return std::exp(log_c_lead - half_log) + std::exp(log_c_mixing + 0.5 * std::log(tau) - half_log);
}

MarkovianEnvelopeSet envelopes_markovian(const ProblemConstants& c, const MixingProfile& profile,
                                         const StepSizePlan& plan, long long k_mix,
                                         double generic_c) {
    check_constants(c);
    if (!(generic_c > 0.0)) throw InvalidInput("generic constant must be positive");
    const double log_gc = std::log(generic_c);
    auto tau = [profile, plan](double k) { return mixing_time_log_bound(profile, plan, k); };
    auto finish = [&](MarkovianEnvelope& e, std::string name) {
        e.name = std::move(name);
        e.xi = c.xi;
        e.k_mix = k_mix;
        e.tau_bound = tau;
    };
    MarkovianEnvelopeSet set;

    set.lower.log_c_lead =
        std::max(log_branch(c, 1.0, 3.0, 0.0, 0.0, 0.0, 1.0), log_branch(c, 1.0, 2.5, 0.0, 2.5, 1.5)) +
        log_gc;
    set.lower.log_c_mixing = log_branch(c, 1.0, 2.75, 0.0, 2.5, 1.5) + log_gc;
    finish(set.lower, "markov_lower");

    const double log_gd = std::log(c.gamma) + std::log(c.d_max);
    set.upper_diff.log_c_lead =
        std::max(log_branch(c, 1.0, 4.0, 0.0, 1.0, 1.0, 1.0), log_branch(c, 1.0, 3.5, 0.0, 3.5, 2.5)) +
        log_gc + log_gd;
    set.upper_diff.log_c_mixing = log_branch(c, 1.0, 3.75, 0.0, 3.5, 2.5) + log_gc + log_gd;
    finish(set.upper_diff, "markov_upper_diff");

    set.total.log_c_lead =
        std::max(log_branch(c, 1.0, 4.0, 0.0, 1.0, 1.0, 1.0), log_branch(c, 1.0, 3.5, 0.0, 3.5, 2.5)) +
        log_gc;
    set.total.log_c_mixing = log_branch(c, 1.0, 33.0 / 8.0, 1.0, 4.0, 3.0) + log_gc;
    finish(set.total, "markov_total");
    return set;
}

} // namespace qlab
