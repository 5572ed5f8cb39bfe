#include "qlab/mdp.hpp"

#include <Eigen/LU>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <queue>
#include <sstream>

namespace qlab {
namespace {

constexpr double kRowSumTol = 1e-12;

void check_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

} // namespace

TabularMdp::TabularMdp(int num_states, int num_actions, double discount, Mat transition, Vec reward,
                       std::optional<Mat> reward_next, Options opts)
    : num_states_(num_states),
      num_actions_(num_actions),
      discount_(discount),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      reward_next_(std::move(reward_next)) {
    if (num_states_ < 1) throw InvalidInput("num_states must be >= 1");
    if (num_actions_ < 1) throw InvalidInput("num_actions must be >= 1");
    if (!(discount_ > 0.0 && discount_ < 1.0)) throw InvalidInput("discount must lie in (0, 1)");
    const int n = num_pairs();
    if (transition_.rows() != n || transition_.cols() != num_states_)
        throw InvalidInput("transition has wrong shape");
    if (reward_.size() != n) throw InvalidInput("reward has wrong length");
    check_finite(transition_, "transition");
    check_finite(reward_, "reward");
    for (int i = 0; i < n; ++i) {
        if (transition_.row(i).minCoeff() < 0.0)
            throw InvalidInput("transition has a negative probability");
        if (std::abs(transition_.row(i).sum() - 1.0) > kRowSumTol)
            throw InvalidInput("transition row does not sum to 1");
    }
    if (reward_next_) {
        if (reward_next_->rows() != n || reward_next_->cols() != num_states_)
            throw InvalidInput("reward_next has wrong shape");
        check_finite(*reward_next_, "reward_next");
        // Expected reward must agree with the per-successor table.
        for (int i = 0; i < n; ++i) {
            const double expect = transition_.row(i).dot(reward_next_->row(i));
            if (std::abs(expect - reward_(i)) > 1e-10)
                throw InvalidInput("reward is not the expectation of reward_next under P");
        }
    }
    if (!opts.allow_large_reward && reward_.lpNorm<Eigen::Infinity>() > 1.0 + kRowSumTol)
        throw InvalidInput("reward exceeds 1 in magnitude");
}

BehaviorPolicy::BehaviorPolicy(Mat beta) : beta_(std::move(beta)) {
    if (beta_.rows() < 1 || beta_.cols() < 1) throw InvalidInput("policy has empty shape");
    check_finite(beta_, "policy");
    for (int s = 0; s < beta_.rows(); ++s) {
        if (beta_.row(s).minCoeff() < 0.0) throw InvalidInput("policy has a negative probability");
        if (std::abs(beta_.row(s).sum() - 1.0) > kRowSumTol)
            throw InvalidInput("policy row does not sum to 1");
    }
}

BehaviorPolicy BehaviorPolicy::uniform(int num_states, int num_actions) {
    return BehaviorPolicy(Mat::Constant(num_states, num_actions, 1.0 / num_actions));
}

StateActionDistribution::StateActionDistribution(Vec d) : d_(std::move(d)) {
    if (d_.size() < 1) throw InvalidInput("empty distribution");
    if (!d_.allFinite()) throw InvalidInput("distribution has non-finite entry");
    if (std::abs(d_.sum() - 1.0) > 1e-12) throw InvalidInput("distribution does not sum to 1");
    d_min_ = d_.minCoeff();
    d_max_ = d_.maxCoeff();
    if (d_min_ <= 0.0) throw ZeroMass("distribution has a zero-mass state-action pair");
}

Mat state_action_kernel(const TabularMdp& mdp, const BehaviorPolicy& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (policy.num_states() != S || policy.num_actions() != A)
        throw InvalidInput("policy shape does not match MDP");
    const int n = S * A;
    Mat kernel(n, n);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int i = mdp.index(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                for (int a2 = 0; a2 < A; ++a2)
                    kernel(i, mdp.index(s2, a2)) = mdp.transition()(i, s2) * policy.prob(s2, a2);
        }
    return kernel;
}

namespace {

// Strong connectivity of the positive-transition graph: every node reachable
// from node 0 going forward and backward.
bool strongly_connected(const Mat& kernel) {
    const int n = static_cast<int>(kernel.rows());
    for (int direction = 0; direction < 2; ++direction) {
        std::vector<char> seen(n, 0);
        std::queue<int> frontier;
        seen[0] = 1;
        frontier.push(0);
        int count = 1;
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop();
            for (int v = 0; v < n; ++v) {
                const double p = direction == 0 ? kernel(u, v) : kernel(v, u);
                if (p > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    ++count;
                    frontier.push(v);
                }
            }
        }
        if (count != n) return false;
    }
    return true;
}

// Period of a strongly connected graph: gcd over edges (u, v) of
// level(u) + 1 - level(v) with BFS levels from node 0.  Aperiodic iff 1.
int graph_period(const Mat& kernel) {
    const int n = static_cast<int>(kernel.rows());
    std::vector<int> level(n, -1);
    std::queue<int> frontier;
    level[0] = 0;
    frontier.push(0);
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v = 0; v < n; ++v)
            if (kernel(u, v) > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                frontier.push(v);
            }
    }
    int g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (kernel(u, v) > 0.0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    return g == 0 ? 1 : g;
}

} // namespace

StateActionDistribution stationary_distribution(const TabularMdp& mdp,
                                                const BehaviorPolicy& policy) {
    const Mat kernel = state_action_kernel(mdp, policy);
    const int n = static_cast<int>(kernel.rows());
    if (!strongly_connected(kernel)) throw NotErgodic("state-action chain is not irreducible");
    // A self-loop implies aperiodicity; otherwise fall back to the
    // cycle-length gcd test.
    if (kernel.diagonal().maxCoeff() <= 0.0 && graph_period(kernel) != 1)
        throw NotErgodic("state-action chain is periodic");
    // Solve mu^T (K - I) = 0 with the normalization sum(mu) = 1 by replacing
    // the last equation.
    Mat system = kernel.transpose() - Mat::Identity(n, n);
    system.row(n - 1).setOnes();
    Vec rhs = Vec::Zero(n);
    rhs(n - 1) = 1.0;
    Vec mu = system.partialPivLu().solve(rhs);
    const double residual = (kernel.transpose() * mu - mu).lpNorm<Eigen::Infinity>();
    if (residual > 1e-10) throw NotErgodic("stationary solve residual too large");
    return StateActionDistribution(mu);
}

StateActionDistribution iid_distribution(const Vec& state_dist, const BehaviorPolicy& policy) {
    const int S = policy.num_states();
    const int A = policy.num_actions();
    if (state_dist.size() != S) throw InvalidInput("state distribution has wrong length");
    if (state_dist.minCoeff() < 0.0 || std::abs(state_dist.sum() - 1.0) > 1e-12)
        throw InvalidInput("state distribution is not a probability vector");
    Vec d(S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) d(sa_index(s, a, S)) = state_dist(s) * policy.prob(s, a);
    if (d.minCoeff() <= 0.0)
        throw ZeroMass("independent-sampling model requires full support over (s, a)");
    return StateActionDistribution(d);
}

Vec bellman_operator(const TabularMdp& mdp, const Vec& q) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    Vec state_max(S);
    for (int s = 0; s < S; ++s) {
        double best = q(mdp.index(s, 0));
        for (int a = 1; a < A; ++a) best = std::max(best, q(mdp.index(s, a)));
        state_max(s) = best;
    }
    return mdp.reward() + mdp.discount() * (mdp.transition() * state_max);
}

Vec optimal_q(const TabularMdp& mdp, double tol, const Vec* start) {
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
    Vec q = start ? *start : Vec::Zero(mdp.num_pairs());
    for (int iter = 0; iter < 100000; ++iter) {
        Vec next = bellman_operator(mdp, q);
        const double residual = (next - q).lpNorm<Eigen::Infinity>();
        q = std::move(next);
        // After the assignment the residual of q is at most gamma * residual
        // by contraction, so this stopping rule meets the target with slack.
        if (residual <= tol) break;
    }
    if ((bellman_operator(mdp, q) - q).lpNorm<Eigen::Infinity>() > tol)
        throw Error("value iteration failed to reach tolerance");
    return q;
}

Vec expected_update_map(const TabularMdp& mdp, const StateActionDistribution& dist, const Vec& q) {
    if (dist.size() != mdp.num_pairs() || q.size() != mdp.num_pairs())
        throw InvalidInput("dimension mismatch in expected_update_map");
    return dist.d().cwiseProduct(bellman_operator(mdp, q) - q);
}

namespace {

using nlohmann::json;

// Canonical float formatting: shortest representation that round-trips.
json number_token(double x) { return x; }

} // namespace

TabularMdp parse_mdp_json(const std::string& text, TabularMdp::Options opts) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed JSON: ") + e.what());
    }
    try {
        const int S = doc.at("num_states").get<int>();
        const int A = doc.at("num_actions").get<int>();
        const double gamma = doc.at("discount").get<double>();
        if (S < 1 || A < 1) throw InvalidInput("num_states/num_actions must be positive");
        const auto& trans = doc.at("transition");
        const auto& rew = doc.at("reward");
        if (static_cast<int>(trans.size()) != S) throw InvalidInput("transition has wrong length");
        if (static_cast<int>(rew.size()) != S) throw InvalidInput("reward has wrong length");
        Mat P(S * A, S);
        Vec r(S * A);
        for (int s = 0; s < S; ++s) {
            if (static_cast<int>(trans.at(s).size()) != A || static_cast<int>(rew.at(s).size()) != A)
                throw InvalidInput("transition/reward inner length mismatch");
            for (int a = 0; a < A; ++a) {
                const auto& row = trans.at(s).at(a);
                if (static_cast<int>(row.size()) != S)
                    throw InvalidInput("transition row has wrong length");
                for (int s2 = 0; s2 < S; ++s2)
                    P(sa_index(s, a, S), s2) = row.at(s2).get<double>();
                r(sa_index(s, a, S)) = rew.at(s).at(a).get<double>();
            }
        }
        std::optional<Mat> rnext;
        if (doc.contains("reward_next")) {
            const auto& rn = doc.at("reward_next");
            if (static_cast<int>(rn.size()) != S) throw InvalidInput("reward_next wrong length");
            Mat table(S * A, S);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    for (int s2 = 0; s2 < S; ++s2)
                        table(sa_index(s, a, S), s2) = rn.at(s).at(a).at(s2).get<double>();
            rnext = std::move(table);
        }
        return TabularMdp(S, A, gamma, std::move(P), std::move(r), std::move(rnext), opts);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("MDP schema violation: ") + e.what());
    }
}

TabularMdp load_mdp_json(const std::string& path, TabularMdp::Options opts) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open MDP file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_mdp_json(buf.str(), opts);
}

std::string mdp_to_json(const TabularMdp& mdp) {
    using nlohmann::json;
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    json doc;
    doc["num_states"] = S;
    doc["num_actions"] = A;
    doc["discount"] = number_token(mdp.discount());
    json trans = json::array();
    json rew = json::array();
    for (int s = 0; s < S; ++s) {
        json trow = json::array();
        json rrow = json::array();
        for (int a = 0; a < A; ++a) {
            json dest = json::array();
            for (int s2 = 0; s2 < S; ++s2)
                dest.push_back(number_token(mdp.transition()(mdp.index(s, a), s2)));
            trow.push_back(std::move(dest));
            rrow.push_back(number_token(mdp.reward()(mdp.index(s, a))));
        }
        trans.push_back(std::move(trow));
        rew.push_back(std::move(rrow));
    }
    doc["transition"] = std::move(trans);
    doc["reward"] = std::move(rew);
    if (mdp.has_reward_next()) {
        json rn = json::array();
        for (int s = 0; s < S; ++s) {
            json row = json::array();
            for (int a = 0; a < A; ++a) {
                json dest = json::array();
                for (int s2 = 0; s2 < S; ++s2)
                    dest.push_back(number_token(mdp.reward_next()(mdp.index(s, a), s2)));
                row.push_back(std::move(dest));
            }
            rn.push_back(std::move(row));
        }
        doc["reward_next"] = std::move(rn);
    }
    return doc.dump(2) + "\n";
}

void save_mdp_json(const TabularMdp& mdp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write MDP file: " + path);
    out << mdp_to_json(mdp);
}

} // namespace qlab
