#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qlab/mdp.hpp"
#include "qlab/rng.hpp"
#include "qlab/stepsize.hpp"
#include "qlab/switching.hpp"

namespace qlab {

// Immutable bundle of everything a simulation step needs: the MDP, the
// sampling distribution, the optimal solution, the frozen-policy matrix
// T at Q*, the Lyapunov factors, and the step-size plan.  Built once and
// shared (read-only) by all runs.
struct SimContext {
    TabularMdp mdp;
    BehaviorPolicy policy;
    StateActionDistribution dist; // sampling distribution (iid) or stationary (markovian)
    ObservationModel model = ObservationModel::iid;
    Vec state_dist;               // iid: state marginal p; markovian: initial state law
    Vec q_star;
    GreedySelector sel_star;
    LyapunovAnalysis lyap;
    StepSizePlan plan;

    static SimContext build(TabularMdp mdp, BehaviorPolicy policy, ObservationModel model,
                            Vec state_dist, double xi_factor = 8.0, double q_star_tol = 1e-12);
};

// Joint state of the main iterate, the two comparison systems, and the
// transformed lower iterate z = G^{1/2}(q_lower - Q*).
struct CoupledState {
    Vec q;
    Vec q_lower;
    Vec q_upper;
    Vec z;
    long long k = 0;
};

CoupledState make_initial_state(const SimContext& ctx, const Vec& q0, const Vec& q_lower0,
                                const Vec& q_upper0);

struct StepOptions {
    // Cross-check the tabular update against the switching-system matrix
    // form at every step (tolerance 1e-12).  Costs an extra operator
    // application per step.
    bool verify_matrix_form = false;
    double sandwich_tol = 1e-10;
};

struct StepOutput {
    NoiseRecord noise;
    double crossing = 0.0; // z^T X_k^T G^{1/2} w
};

// Advances all four coupled iterates by one step on the shared noise
// realization.  The switching matrix of the upper system is driven by the
// MAIN iterate's greedy policy.  Throws SandwichViolated if the elementwise
// ordering q_lower - Q* <= q - Q* <= q_upper - Q* breaks beyond tolerance.
StepOutput step_coupled(const SimContext& ctx, CoupledState& state, const Sample& sample,
                        const StepOptions& opts = {});

struct LogSchedule {
    // Geometric spacing: after `dense_until`, the next logged index is
    // ceil(previous * ratio).  The horizon itself is always logged.
    double ratio = 1.25;
    long long dense_until = 1;
    bool log_all = false; // full-trajectory logging (memory guard off)

    std::vector<long long> indices(long long horizon) const;
};

struct TrajectoryLog {
    std::vector<long long> ks;
    std::vector<double> alpha;
    std::vector<double> err_inf;         // ||q - Q*||_inf
    std::vector<double> lower_err;       // ||q_lower - Q*||_inf
    std::vector<double> upper_lower_diff; // ||q_upper - q_lower||_inf
    std::vector<double> vz;              // z^T z
    std::vector<double> crossing;        // crossing term at logged steps (markovian)

    // Per-step monitors kept over the whole run, not just logged indices.
    double max_w_inf = 0.0;
    double max_q_inf = 0.0;
    double max_lower_err_inf = 0.0;
    double max_abs_crossing = 0.0;
    double crossing_mean = 0.0; // running mean over all steps
    std::uint64_t seed = 0;
};

TrajectoryLog run_trajectory(const SimContext& ctx, long long horizon, std::uint64_t seed,
                             const LogSchedule& schedule = {}, const StepOptions& opts = {},
                             const Vec* q0 = nullptr);

struct EnsembleResult {
    std::vector<long long> ks;
    std::vector<double> alpha;
    std::vector<double> mean_err_inf, se_err_inf;
    std::vector<double> mean_lower_err, se_lower_err;
    std::vector<double> mean_diff_upper_lower, se_diff_upper_lower;
    std::vector<double> mean_vz, se_vz;
    double max_w_inf = 0.0;
    double max_q_inf = 0.0;
    double max_lower_err_inf = 0.0;
    double max_abs_crossing = 0.0;
    int num_runs = 0;
    std::vector<std::uint64_t> seeds;
};

// Runs `num_runs` independent trajectories with seeds base_seed + i and
// aggregates mean/standard error per logged index.  Runs execute in
// parallel (OpenMP) with no shared mutable state; aggregation happens in
// fixed run order afterwards, so results are identical to the serial path.
EnsembleResult run_ensemble(const SimContext& ctx, int num_runs, std::uint64_t base_seed,
                            long long horizon, const LogSchedule& schedule = {},
                            const StepOptions& opts = {});

// Serial reference implementation with identical results.
EnsembleResult run_ensemble_serial(const SimContext& ctx, int num_runs, std::uint64_t base_seed,
                                   long long horizon, const LogSchedule& schedule = {},
                                   const StepOptions& opts = {});

} // namespace qlab
