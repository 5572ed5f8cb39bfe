#include <doctest.h>

#include "helpers.hpp"
#include "qlab/matrix.hpp"
#include "qlab/switching.hpp"

using namespace qlab;

namespace {

// Random Hurwitz matrix: shift a random matrix left of its spectral abscissa.
Mat random_hurwitz(Rng& rng, int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    const double abscissa = max_real_eigenvalue(m);
    return m - (abscissa + rng.uniform(0.2, 1.5)) * Mat::Identity(n, n);
}

} // namespace

TEST_CASE("solve_lyapunov: closed-form diagonal cases") {
    Mat g = solve_lyapunov(-Mat::Identity(3, 3));
    CHECK((g - 0.5 * Mat::Identity(3, 3)).lpNorm<Eigen::Infinity>() <= 1e-12);
    Mat t = Mat::Zero(2, 2);
    t(0, 0) = -1.0;
    t(1, 1) = -2.0;
    Mat g2 = solve_lyapunov(t);
    CHECK(g2(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g2(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(g2(0, 1)) <= 1e-12);
}

TEST_CASE("solve_lyapunov rejects non-Hurwitz input") {
    CHECK_THROWS_AS(solve_lyapunov(Mat::Identity(2, 2)), NotHurwitz);
}

TEST_CASE("solve_lyapunov on T from a random MDP: residual and SPD oracle") {
    GeneratorSpec spec;
    spec.num_states = 2;
    spec.num_actions = 2;
    spec.discount = 0.8;
    spec.seed = 91;
    TabularMdp mdp = generate_mdp(spec);
    auto dist = iid_distribution(Vec::Constant(2, 0.5), BehaviorPolicy::uniform(2, 2));
    Vec q_star = optimal_q(mdp);
    Mat t = build_tq(mdp, dist, greedy_selector(q_star, 2, 2));
    Mat g = solve_lyapunov(t);
    CHECK((g * t + t.transpose() * g + Mat::Identity(4, 4)).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(Eigen::LLT<Mat>(g).info() == Eigen::Success);
}

TEST_CASE("solve_lyapunov residual and SPD hold on 100 random Hurwitz matrices") {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 7);
        Mat t = random_hurwitz(rng, n);
        Mat g = solve_lyapunov(t);
        CHECK((g * t + t.transpose() * g + Mat::Identity(n, n)).lpNorm<Eigen::Infinity>() <= 1e-8);
        CHECK(Eigen::LLT<Mat>(g).info() == Eigen::Success);
        // Companion identity: B + B^T = -G^{-1}.
        Mat b = similarity_transform(t, g);
        CHECK((b + b.transpose() + g.inverse()).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("similarity_transform: diagonal commutation and the -I case") {
    Mat t = Mat::Zero(2, 2);
    t(0, 0) = -1.0;
    t(1, 1) = -3.0;
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 2.0;
    g(1, 1) = 5.0;
    CHECK((similarity_transform(t, g) - t).lpNorm<Eigen::Infinity>() <= 1e-12);

    Mat b = similarity_transform(-Mat::Identity(2, 2), 0.5 * Mat::Identity(2, 2));
    CHECK((b + Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((b + b.transpose() + 2.0 * Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK_THROWS_AS(similarity_transform(t, -g), NotPositiveDefinite);
}

TEST_CASE("symmetric_sqrt: diagonal cases and round-trip oracle") {
    auto [r1, r1i] = symmetric_sqrt(4.0 * Mat::Identity(3, 3));
    CHECK((r1 - 2.0 * Mat::Identity(3, 3)).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((r1i - 0.5 * Mat::Identity(3, 3)).lpNorm<Eigen::Infinity>() <= 1e-12);

    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 9.0;
    g(1, 1) = 0.25;
    auto [r2, r2i] = symmetric_sqrt(g);
    CHECK(r2(0, 0) == doctest::Approx(3.0));
    CHECK(r2(1, 1) == doctest::Approx(0.5));
    CHECK(r2i(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(r2i(1, 1) == doctest::Approx(2.0));

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 6);
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
        Mat spd = m * m.transpose() + 0.1 * Mat::Identity(n, n);
        auto [half, half_inv] = symmetric_sqrt(spd);
        CHECK((half * half - spd).lpNorm<Eigen::Infinity>() <= 1e-9);
        CHECK((half * half_inv - Mat::Identity(n, n)).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    CHECK_THROWS_AS(symmetric_sqrt(Mat::Zero(2, 2)), NotPositiveDefinite);
}

TEST_CASE("hurwitz_certificate examples") {
    auto cert = hurwitz_certificate(-Mat::Identity(2, 2));
    CHECK(cert.is_strictly_diag_dominant);
    CHECK(cert.diagonals_negative);
    CHECK(cert.gerschgorin_max_real_bound == doctest::Approx(-1.0));
    CHECK(cert.max_real_eigenvalue == doctest::Approx(-1.0));

    Mat t(2, 2);
    t << -1.0, 2.0, 0.0, -1.0;
    auto cert2 = hurwitz_certificate(t);
    CHECK_FALSE(cert2.is_strictly_diag_dominant);
    CHECK(cert2.diagonals_negative);
    // Dominance is sufficient, not necessary: the matrix is still Hurwitz.
    CHECK(cert2.max_real_eigenvalue == doctest::Approx(-1.0));
}

TEST_CASE("Gerschgorin bound dominates the true max real eigenvalue (500 random)") {
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 6);
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        auto cert = hurwitz_certificate(m);
        CHECK(cert.gerschgorin_max_real_bound >= cert.max_real_eigenvalue - 1e-10);
    }
}

TEST_CASE("diagonally dominant certificates imply Hurwitz on T_Q (200 random Q)") {
    auto ctx = qlab::testing::reference_context(1);
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Vec q = qlab::testing::random_q(rng, ctx.mdp.num_pairs(), 5.0);
        Mat t = build_tq(ctx.mdp, ctx.dist,
                         greedy_selector(q, ctx.mdp.num_states(), ctx.mdp.num_actions()));
        auto cert = hurwitz_certificate(t);
        CHECK(cert.is_strictly_diag_dominant);
        CHECK(cert.diagonals_negative);
        CHECK(cert.max_real_eigenvalue < 0.0);
    }
}

TEST_CASE("matrix_exponential: identity, scalar, semigroup") {
    Mat t(1, 1);
    t << -1.0;
    CHECK((matrix_exponential(t, 0.0) - Mat::Identity(1, 1)).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(matrix_exponential(t, 1.0)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
        Mat once = matrix_exponential(m, 1.0);
        CHECK((once * once - matrix_exponential(m, 2.0)).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("matrix exponential of T at Q* obeys the infinity-norm decay bound") {
    auto corpus = qlab::testing::ergodic_corpus(20);
    for (const auto& spec : corpus) {
        TabularMdp mdp = generate_mdp(spec);
        BehaviorPolicy policy = BehaviorPolicy::uniform(mdp.num_states(), mdp.num_actions());
        auto dist = iid_distribution(Vec::Constant(mdp.num_states(), 1.0 / mdp.num_states()),
                                     policy);
        Vec q_star = optimal_q(mdp);
        Mat t = build_tq(mdp, dist, greedy_selector(q_star, mdp.num_states(), mdp.num_actions()));
        for (double s : {0.1, 1.0, 5.0, 20.0}) {
            const double lhs =
                matrix_exponential(t, s).cwiseAbs().rowwise().sum().maxCoeff();
            const double rhs = std::exp(-(1.0 - mdp.discount()) * dist.d_min() * s);
            CHECK(lhs <= rhs * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("ltv_contraction_check examples") {
    std::vector<Mat> a{0.5 * Mat::Identity(2, 2)};
    CHECK(ltv_contraction_check(a, Mat::Identity(2, 2), {0.25}));
    std::vector<Mat> id{Mat::Identity(2, 2)};
    CHECK_FALSE(ltv_contraction_check(id, Mat::Identity(2, 2), {0.9}));
}

TEST_CASE("ltv_contraction_check certifies the designed step-size chain") {
    auto ctx = qlab::testing::reference_context(0);
    std::vector<Mat> a_seq;
    std::vector<double> p_seq;
    const int n = ctx.mdp.num_pairs();
    for (long long k = 0; k <= 1000; k += 50) {
        const double alpha = ctx.plan.alpha(static_cast<double>(k));
        a_seq.push_back(Mat::Identity(n, n) + alpha * ctx.lyap.t_star);
        p_seq.push_back(1.0 - ctx.plan.beta * alpha);
    }
    CHECK(ltv_contraction_check(a_seq, ctx.lyap.g, p_seq));
}
