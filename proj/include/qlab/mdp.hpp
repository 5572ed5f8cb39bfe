#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Flat index for the (state, action) pair under the e_a (x) e_s ordering:
// index(s, a) = a * num_states + s.  Used consistently across the repo and
// in all file formats.
inline int sa_index(int s, int a, int num_states) { return a * num_states + s; }

// Finite MDP with expected rewards r(s,a) and an optional per-(s,a,s')
// reward table.  When the optional table is present, sampled rewards depend
// on the successor state and `reward()` holds its expectation under P.
struct MdpOptions {
    // Skip the |r| <= 1 construction check.  Convergence envelopes are
    // meaningless for such models; intended for exploratory use only.
    bool allow_large_reward = false;
};

class TabularMdp {
  public:
    using Options = MdpOptions;

    TabularMdp(int num_states, int num_actions, double discount, Mat transition, Vec reward,
               std::optional<Mat> reward_next = std::nullopt, Options opts = {});

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int num_pairs() const { return num_states_ * num_actions_; }
    double discount() const { return discount_; }

    // Transition kernel as an (|S||A| x |S|) row-stochastic matrix; row
    // sa_index(s, a), column s'.
    const Mat& transition() const { return transition_; }
    // Expected immediate reward, length |S||A|.
    const Vec& reward() const { return reward_; }
    bool has_reward_next() const { return reward_next_.has_value(); }
    // Optional (|S||A| x |S|) per-successor reward table.
    const Mat& reward_next() const { return *reward_next_; }

    int index(int s, int a) const { return sa_index(s, a, num_states_); }

  private:
    int num_states_;
    int num_actions_;
    double discount_;
    Mat transition_;
    Vec reward_;
    std::optional<Mat> reward_next_;
};

class BehaviorPolicy {
  public:
    // beta is (|S| x |A|); row s gives the action distribution in state s.
    explicit BehaviorPolicy(Mat beta);

    static BehaviorPolicy uniform(int num_states, int num_actions);

    const Mat& beta() const { return beta_; }
    double prob(int s, int a) const { return beta_(s, a); }
    int num_states() const { return static_cast<int>(beta_.rows()); }
    int num_actions() const { return static_cast<int>(beta_.cols()); }

  private:
    Mat beta_;
};

// Probability mass over (state, action) pairs; carries the extreme entries
// used throughout the step-size design and the envelope constants.
class StateActionDistribution {
  public:
    explicit StateActionDistribution(Vec d);

    const Vec& d() const { return d_; }
    double d_min() const { return d_min_; }
    double d_max() const { return d_max_; }
    int size() const { return static_cast<int>(d_.size()); }
    Mat as_diagonal() const { return Mat(d_.asDiagonal()); }

  private:
    Vec d_;
    double d_min_;
    double d_max_;
};

// The state-action chain P(s,a -> s',a') = P(s,a,s') * beta(a'|s'), an
// (|S||A| x |S||A|) row-stochastic matrix.
Mat state_action_kernel(const TabularMdp& mdp, const BehaviorPolicy& policy);

// Stationary distribution of the state-action chain.  Requires the chain to
// be irreducible and aperiodic; throws NotErgodic otherwise.
StateActionDistribution stationary_distribution(const TabularMdp& mdp, const BehaviorPolicy& policy);

// d(s,a) = p(s) * beta(a|s) for the independent-sampling model.  Throws
// ZeroMass if any pair has zero probability.
StateActionDistribution iid_distribution(const Vec& state_dist, const BehaviorPolicy& policy);

// Bellman optimality operator applied to q.
Vec bellman_operator(const TabularMdp& mdp, const Vec& q);

// Value iteration to sup-norm Bellman residual <= tol.
Vec optimal_q(const TabularMdp& mdp, double tol = 1e-12, const Vec* start = nullptr);

// h(Q) = D(R + gamma * P * max_a Q - Q), the expected direction of the
// asynchronous update under sampling distribution `dist`.
Vec expected_update_map(const TabularMdp& mdp, const StateActionDistribution& dist, const Vec& q);

// JSON (de)serialization.  The schema is
//   {"num_states", "num_actions", "discount", "transition": [[[...]]],
//    "reward": [[...]]}
// with transition[s][a][s'] and reward[s][a]; the optional key
// "reward_next" holds [s][a][s'].  Serialization is canonical: loading a
// saved file and saving again is byte-identical.
TabularMdp load_mdp_json(const std::string& path, TabularMdp::Options opts = {});
TabularMdp parse_mdp_json(const std::string& text, TabularMdp::Options opts = {});
std::string mdp_to_json(const TabularMdp& mdp);
void save_mdp_json(const TabularMdp& mdp, const std::string& path);

} // namespace qlab
