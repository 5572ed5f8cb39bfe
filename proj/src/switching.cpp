#include "qlab/switching.hpp"

namespace qlab {

GreedySelector greedy_selector(const Vec& q, int num_states, int num_actions) {
    GreedySelector sel;
    sel.chosen_action.resize(num_states);
    for (int s = 0; s < num_states; ++s) {
        int best = 0;
        double best_val = q(sa_index(s, 0, num_states));
        for (int a = 1; a < num_actions; ++a) {
            const double v = q(sa_index(s, a, num_states));
            // Strict inequality keeps the lowest action index on ties.
            if (v > best_val) {
                best_val = v;
                best = a;
            }
        }
        sel.chosen_action[s] = best;
    }
    return sel;
}

Vec apply_selector(const GreedySelector& sel, const Vec& x, int num_states) {
    Vec out(num_states);
    for (int s = 0; s < num_states; ++s) out(s) = x(sa_index(s, sel.action(s), num_states));
    return out;
}

Vec p_pi_matvec(const TabularMdp& mdp, const GreedySelector& sel, const Vec& x) {
    return mdp.transition() * apply_selector(sel, x, mdp.num_states());
}

Mat build_tq(const TabularMdp& mdp, const StateActionDistribution& dist,
             const GreedySelector& sel) {
    const int S = mdp.num_states();
    const int n = mdp.num_pairs();
    Mat t = Mat::Zero(n, n);
    const double gamma = mdp.discount();
    for (int i = 0; i < n; ++i) {
        const double di = dist.d()(i);
        for (int s2 = 0; s2 < S; ++s2)
            t(i, sa_index(s2, sel.action(s2), S)) += gamma * di * mdp.transition()(i, s2);
        t(i, i) -= di;
    }
    return t;
}

SystemOperators build_a_b(const Mat& tq, const GreedySelector& sel, const GreedySelector& sel_star,
                          const Vec& q_star, double alpha_k, const TabularMdp& mdp,
                          const StateActionDistribution& dist) {
    if (!(alpha_k > 0.0)) throw InvalidInput("alpha_k must be positive");
    const int S = mdp.num_states();
    const int n = mdp.num_pairs();
    SystemOperators ops;
    ops.t_q = tq;
    ops.a_qk = Mat::Identity(n, n) + alpha_k * tq;
    for (int i = 0; i < n; ++i)
        if (ops.a_qk(i, i) < 0.0)
            throw StepTooLarge("alpha_k exceeds 1/d_max; A would lose nonnegativity");
    // (Pi_Q - Pi_Q*) Q* per successor state, then push through alpha gamma D P.
    Vec gap(S);
    for (int s = 0; s < S; ++s)
        gap(s) = q_star(sa_index(s, sel.action(s), S)) - q_star(sa_index(s, sel_star.action(s), S));
    const double scale = alpha_k * mdp.discount();
    ops.b_qk = scale * dist.d().cwiseProduct(mdp.transition() * gap);
    ops.b_diff = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double row_scale = scale * dist.d()(i);
        for (int s2 = 0; s2 < S; ++s2) {
            const double p = row_scale * mdp.transition()(i, s2);
            ops.b_diff(i, sa_index(s2, sel.action(s2), S)) += p;
            ops.b_diff(i, sa_index(s2, sel_star.action(s2), S)) -= p;
        }
    }
    return ops;
}

NoiseRecord sample_noise(const TabularMdp& mdp, const StateActionDistribution& dist, const Vec& q,
                         const Sample& sample, ObservationModel model) {
    (void)model; // The model only selects which distribution the caller passes.
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (sample.s < 0 || sample.s >= S || sample.a < 0 || sample.a >= A || sample.s_next < 0 ||
        sample.s_next >= S)
        throw InvalidInput("sample indices out of range");
    NoiseRecord rec;
    rec.sample = sample;
    double next_max = q(sa_index(sample.s_next, 0, S));
    for (int a = 1; a < A; ++a)
        next_max = std::max(next_max, q(sa_index(sample.s_next, a, S)));
    const double td = sample.r + mdp.discount() * next_max - q(sa_index(sample.s, sample.a, S));
    rec.w = -expected_update_map(mdp, dist, q);
    rec.w(sa_index(sample.s, sample.a, S)) += td;
    return rec;
}

} // namespace qlab
