#include <doctest.h>

#include "helpers.hpp"
#include "qlab/stepsize.hpp"

using namespace qlab;

TEST_CASE("parameter formulas are forced: sigma=1, nu=1") {
    StepSizePlan plan = stepsize_parameters(1.0, 1.0, 8.0);
    CHECK(plan.xi == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(plan.theta == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(plan.beta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(plan.beta * plan.theta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(plan.alpha(0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("parameter formulas are forced: sigma=2, nu=0.5") {
    StepSizePlan plan = stepsize_parameters(0.5, 2.0, 8.0);
    CHECK(plan.xi == doctest::Approx(128.0).epsilon(1e-15));
    CHECK(plan.theta == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(plan.beta == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(plan.beta * plan.theta == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("designed plan passes its certificate on a random pipeline") {
    auto ctx = qlab::testing::reference_context(1);
    CHECK(ctx.plan.certificate.xi_in_range);
    CHECK(ctx.plan.certificate.theta_exact);
    CHECK(ctx.plan.certificate.beta_theta_ok);
    CHECK(ctx.plan.certificate.dmin_gamma_theta_ok);
    CHECK(ctx.plan.certificate.theta_upper_ok);
    CHECK(ctx.plan.certificate.xi_bounds_ok);
    CHECK(ctx.plan.certificate.alpha0_admissible);
}

TEST_CASE("alpha is strictly decreasing and alpha_0 is xi-independent") {
    auto lyap = qlab::testing::reference_context(2).lyap;
    auto dist = qlab::testing::reference_context(2).dist;
    const double gamma = 0.9;
    StepSizePlan lo = design_stepsize(lyap, dist, gamma, 8.0);
    StepSizePlan hi = design_stepsize(lyap, dist, gamma, 16.0);
    CHECK(lo.alpha(0.0) == doctest::Approx(hi.alpha(0.0)).epsilon(1e-14));
    CHECK(lo.alpha(0.0) ==
          doctest::Approx(lo.nu / (2.0 * lo.sigma_max_b * lo.sigma_max_b)).epsilon(1e-14));
    for (long long k = 0; k < 1000; k += 7)
        CHECK(lo.alpha(static_cast<double>(k + 1)) < lo.alpha(static_cast<double>(k)));
    CHECK_THROWS_AS(design_stepsize(lyap, dist, gamma, 7.9), InvalidInput);
}

TEST_CASE("certificate inequalities hold across the ergodic corpus") {
    for (const auto& spec : qlab::testing::ergodic_corpus(200)) {
        TabularMdp mdp = generate_mdp(spec);
        const int S = mdp.num_states();
        const int A = mdp.num_actions();
        SimContext ctx = SimContext::build(std::move(mdp), BehaviorPolicy::uniform(S, A),
                                           ObservationModel::iid, Vec::Constant(S, 1.0 / S));
        CHECK(ctx.plan.certificate.all());
    }
}

TEST_CASE("X_k contraction bound holds on a log-spaced grid") {
    auto ctx = qlab::testing::reference_context(0);
    double prev = 0.0;
    for (long long k : {0LL, 1LL, 10LL, 100LL, 10000LL}) {
        const double lambda = xk_contraction_bound(ctx.plan, ctx.lyap.b, k);
        CHECK(lambda <= 1.0 - ctx.plan.beta * ctx.plan.alpha(static_cast<double>(k)) + 1e-12);
        // The contraction weakens monotonically as alpha_k shrinks.
        CHECK(lambda > prev - 1e-12);
        prev = lambda;
    }
    // As k grows the bound and the value both approach 1.
    const double tail = xk_contraction_bound(ctx.plan, ctx.lyap.b, 100000000LL);
    CHECK(tail == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("xk_contraction_bound flags an inconsistent plan/B pairing") {
    auto ctx = qlab::testing::reference_context(0);
    StepSizePlan bogus = ctx.plan;
    bogus.beta *= 50.0; // claims far more contraction than B delivers
    CHECK_THROWS_AS(xk_contraction_bound(bogus, ctx.lyap.b, 0), BoundViolated);
}

TEST_CASE("degenerate spectrum is rejected") {
    CHECK_THROWS_AS(stepsize_parameters(1.0, 0.0), DegenerateSpectrum);
}
