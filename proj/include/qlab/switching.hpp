#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qlab/mdp.hpp"

namespace qlab {

// One-hot greedy policy of a Q table.  Stored as the chosen action per
// state; matrix products with the dense |S| x |S||A| selector are applied
// index-wise instead of being materialized.
struct GreedySelector {
    std::vector<int> chosen_action;

    int action(int s) const { return chosen_action[s]; }
    bool operator==(const GreedySelector&) const = default;
};

GreedySelector greedy_selector(const Vec& q, int num_states, int num_actions);

// (Pi_Q x)(s) = x(s, sel(s)); the per-state value of x at the selected
// action.  For x = q this is the per-state max.
Vec apply_selector(const GreedySelector& sel, const Vec& x, int num_states);

// y = P Pi x with y(i) = sum_{s'} P(i, s') x(s', sel(s')).
Vec p_pi_matvec(const TabularMdp& mdp, const GreedySelector& sel, const Vec& x);

// T_Q = gamma D P Pi_Q - D as a dense |S||A| x |S||A| matrix.
Mat build_tq(const TabularMdp& mdp, const StateActionDistribution& dist, const GreedySelector& sel);

struct SystemOperators {
    Mat t_q;    // gamma D P Pi_Q - D
    Mat a_qk;   // I + alpha_k T_Q
    Vec b_qk;   // alpha_k gamma D P (Pi_Q - Pi_Q*) Q*, elementwise <= 0
    Mat b_diff; // alpha_k gamma D P (Pi_Q - Pi_Q*)
};

// Assembles the switching-system matrices at step size alpha_k.  Throws
// StepTooLarge if a diagonal of A goes negative (alpha_k > 1/d_max), which
// would break the elementwise-positivity arguments.
SystemOperators build_a_b(const Mat& tq, const GreedySelector& sel, const GreedySelector& sel_star,
                          const Vec& q_star, double alpha_k, const TabularMdp& mdp,
                          const StateActionDistribution& dist);

enum class ObservationModel { iid, markovian };

struct Sample {
    int s = 0;
    int a = 0;
    int s_next = 0;
    double r = 0.0;
};

struct NoiseRecord {
    Vec w;         // delta - h(Q); single-sample residual noise
    Sample sample;
    long long k = 0;
};

// w = Delta - h(Q) where Delta is the one-hot temporal-difference vector of
// the sample and h uses the supplied distribution (the sampling distribution
// in the independent model, the stationary distribution in the Markovian
// one).
NoiseRecord sample_noise(const TabularMdp& mdp, const StateActionDistribution& dist, const Vec& q,
                         const Sample& sample, ObservationModel model);

} // namespace qlab
