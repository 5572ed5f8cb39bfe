#include "qlab/simulator.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qlab {

SimContext SimContext::build(TabularMdp mdp, BehaviorPolicy policy, ObservationModel model,
                             Vec state_dist, double xi_factor, double q_star_tol) {
    StateActionDistribution dist =
        model == ObservationModel::iid ? iid_distribution(state_dist, policy)
                                       : stationary_distribution(mdp, policy);
    Vec q_star = optimal_q(mdp, q_star_tol);
    GreedySelector sel_star = greedy_selector(q_star, mdp.num_states(), mdp.num_actions());
    Mat t_star = build_tq(mdp, dist, sel_star);
    LyapunovAnalysis lyap = LyapunovAnalysis::from_t(t_star);
    StepSizePlan plan = design_stepsize(lyap, dist, mdp.discount(), xi_factor);
    return SimContext{std::move(mdp),    std::move(policy), std::move(dist), model,
                      std::move(state_dist), std::move(q_star), std::move(sel_star),
                      std::move(lyap),   std::move(plan)};
}

CoupledState make_initial_state(const SimContext& ctx, const Vec& q0, const Vec& q_lower0,
                                const Vec& q_upper0) {
    const int n = ctx.mdp.num_pairs();
    if (q0.size() != n || q_lower0.size() != n || q_upper0.size() != n)
        throw InvalidInput("initial Q tables have wrong length");
    for (int i = 0; i < n; ++i)
        if (!(q_lower0(i) <= q0(i) && q0(i) <= q_upper0(i)))
            throw InvalidInput("initial ordering q_lower <= q <= q_upper is violated");
    CoupledState st;
    st.q = q0;
    st.q_lower = q_lower0;
    st.q_upper = q_upper0;
    st.z = ctx.lyap.g_half * (q_lower0 - ctx.q_star);
    st.k = 0;
    return st;
}

namespace {

// T_Q x = gamma D P Pi_sel x - D x without forming T_Q.
Vec apply_tq(const SimContext& ctx, const GreedySelector& sel, const Vec& x) {
    Vec selected = apply_selector(sel, x, ctx.mdp.num_states());
    return ctx.dist.d().cwiseProduct(ctx.mdp.discount() * (ctx.mdp.transition() * selected) - x);
}

} // namespace

StepOutput step_coupled(const SimContext& ctx, CoupledState& state, const Sample& sample,
                        const StepOptions& opts) {
    const int S = ctx.mdp.num_states();
    const int n = ctx.mdp.num_pairs();
    const double alpha = ctx.plan.alpha(static_cast<double>(state.k));
    if (alpha > 1.0 / ctx.dist.d_max() + 1e-15)
        throw StepTooLarge("step size exceeds 1/d_max");

    const GreedySelector sel = greedy_selector(state.q, S, ctx.mdp.num_actions());
    StepOutput out;
    out.noise = sample_noise(ctx.mdp, ctx.dist, state.q, sample, ctx.model);
    out.noise.k = state.k;
    const Vec& w = out.noise.w;

    const Vec q_prev = state.q;
    // Main iterate: the tabular one-hot update.
    const int idx = ctx.mdp.index(sample.s, sample.a);
    double next_max = state.q(sa_index(sample.s_next, 0, S));
    for (int a = 1; a < ctx.mdp.num_actions(); ++a)
        next_max = std::max(next_max, state.q(sa_index(sample.s_next, a, S)));
    const double td = sample.r + ctx.mdp.discount() * next_max - state.q(idx);
    state.q(idx) += alpha * td;

    // Lower system: switching matrix frozen at the optimal policy.
    state.q_lower += alpha * (apply_tq(ctx, ctx.sel_star, Vec(state.q_lower - ctx.q_star)) + w);
    // Upper system: switching matrix driven by the main iterate's policy;
    // the negative affine term b is dropped.
    state.q_upper += alpha * (apply_tq(ctx, sel, Vec(state.q_upper - ctx.q_star)) + w);

    // Transformed lower iterate and the crossing term z^T X^T G^{1/2} w.
    const Vec bz = ctx.lyap.b * state.z;
    const Vec gw = ctx.lyap.g_half * w;
    out.crossing = (state.z + alpha * bz).dot(gw);
    state.z += alpha * (bz + gw);

    if (opts.verify_matrix_form) {
        // q' - Q* must equal A_{Q,k}(q - Q*) + b_{Q,k} + alpha w.
        Vec gap(S);
        for (int s = 0; s < S; ++s)
            gap(s) = ctx.q_star(sa_index(s, sel.action(s), S)) -
                     ctx.q_star(sa_index(s, ctx.sel_star.action(s), S));
        const Vec b_vec =
            alpha * ctx.mdp.discount() * ctx.dist.d().cwiseProduct(ctx.mdp.transition() * gap);
        const Vec predicted =
            (q_prev - ctx.q_star) + alpha * apply_tq(ctx, sel, Vec(q_prev - ctx.q_star)) + b_vec +
            alpha * w;
        if ((predicted - (state.q - ctx.q_star)).lpNorm<Eigen::Infinity>() > 1e-12)
            throw BoundViolated("matrix-form update disagrees with the tabular update");
    }

    ++state.k;
    for (int i = 0; i < n; ++i) {
        const double lo = state.q_lower(i) - ctx.q_star(i);
        const double mid = state.q(i) - ctx.q_star(i);
        const double hi = state.q_upper(i) - ctx.q_star(i);
        if (lo > mid + opts.sandwich_tol || mid > hi + opts.sandwich_tol)
            throw SandwichViolated("comparison-system ordering broke at step " +
                                   std::to_string(state.k));
    }
    return out;
}

std::vector<long long> LogSchedule::indices(long long horizon) const {
    std::vector<long long> ks;
    if (log_all) {
        for (long long k = 0; k <= horizon; ++k) ks.push_back(k);
        return ks;
    }
    long long k = 0;
    while (k < horizon) {
        ks.push_back(k);
        if (k < dense_until)
            ++k;
        else
            k = std::max(k + 1, static_cast<long long>(std::ceil(static_cast<double>(k) * ratio)));
    }
    ks.push_back(horizon);
    return ks;
}

TrajectoryLog run_trajectory(const SimContext& ctx, long long horizon, std::uint64_t seed,
                             const LogSchedule& schedule, const StepOptions& opts, const Vec* q0) {
    if (horizon < 0) throw InvalidInput("horizon must be nonnegative");
    const int S = ctx.mdp.num_states();
    const int A = ctx.mdp.num_actions();
    const Vec init = q0 ? *q0 : Vec::Zero(ctx.mdp.num_pairs());
    CoupledState state = make_initial_state(ctx, init, init, init);

    Rng rng(seed);
    const std::vector<long long> log_ks = schedule.indices(horizon);
    TrajectoryLog log;
    log.seed = seed;
    log.ks = log_ks;
    const std::size_t n_logs = log_ks.size();
    log.alpha.resize(n_logs);
    log.err_inf.resize(n_logs);
    log.lower_err.resize(n_logs);
    log.upper_lower_diff.resize(n_logs);
    log.vz.resize(n_logs);
    log.crossing.assign(n_logs, 0.0);

    auto record = [&](std::size_t slot) {
        log.alpha[slot] = ctx.plan.alpha(static_cast<double>(state.k));
        log.err_inf[slot] = (state.q - ctx.q_star).lpNorm<Eigen::Infinity>();
        log.lower_err[slot] = (state.q_lower - ctx.q_star).lpNorm<Eigen::Infinity>();
        log.upper_lower_diff[slot] = (state.q_upper - state.q_lower).lpNorm<Eigen::Infinity>();
        log.vz[slot] = state.z.squaredNorm();
    };

    // Markovian chain state.
    int cur_s = 0, cur_a = 0;
    if (ctx.model == ObservationModel::markovian) {
        cur_s = rng.categorical(ctx.state_dist);
        cur_a = rng.categorical(ctx.policy.beta().row(cur_s));
    }

    std::size_t slot = 0;
    double crossing_sum = 0.0;
    for (long long k = 0; k <= horizon; ++k) {
        const bool logged = slot < n_logs && log_ks[slot] == k;
        if (logged) record(slot);
        if (k == horizon) {
            if (logged) ++slot;
            break;
        }
        Sample sample;
        if (ctx.model == ObservationModel::iid) {
            const int sa = rng.categorical(ctx.dist.d());
            sample.s = sa % S;
            sample.a = sa / S;
            sample.s_next = rng.categorical(ctx.mdp.transition().row(sa));
        } else {
            sample.s = cur_s;
            sample.a = cur_a;
            sample.s_next = rng.categorical(ctx.mdp.transition().row(ctx.mdp.index(cur_s, cur_a)));
            cur_s = sample.s_next;
            cur_a = rng.categorical(ctx.policy.beta().row(cur_s));
        }
        const int idx = ctx.mdp.index(sample.s, sample.a);
        sample.r = ctx.mdp.has_reward_next() ? ctx.mdp.reward_next()(idx, sample.s_next)
                                             : ctx.mdp.reward()(idx);
        (void)A;
        StepOutput out = step_coupled(ctx, state, sample, opts);
        log.max_w_inf = std::max(log.max_w_inf, out.noise.w.lpNorm<Eigen::Infinity>());
        log.max_q_inf = std::max(log.max_q_inf, state.q.lpNorm<Eigen::Infinity>());
        log.max_lower_err_inf =
            std::max(log.max_lower_err_inf, (state.q_lower - ctx.q_star).lpNorm<Eigen::Infinity>());
        log.max_abs_crossing = std::max(log.max_abs_crossing, std::abs(out.crossing));
        crossing_sum += out.crossing;
        if (logged) {
            log.crossing[slot] = out.crossing;
            ++slot;
        }
    }
    log.crossing_mean = horizon > 0 ? crossing_sum / static_cast<double>(horizon) : 0.0;
    return log;
}

namespace {

EnsembleResult aggregate(const SimContext& ctx, const std::vector<TrajectoryLog>& logs) {
    EnsembleResult res;
    res.num_runs = static_cast<int>(logs.size());
    res.ks = logs.front().ks;
    res.alpha = logs.front().alpha;
    const std::size_t m = res.ks.size();
    const double n = static_cast<double>(res.num_runs);
    auto reduce = [&](auto metric, std::vector<double>& mean, std::vector<double>& se) {
        mean.assign(m, 0.0);
        se.assign(m, 0.0);
        for (const auto& log : logs)
            for (std::size_t i = 0; i < m; ++i) mean[i] += metric(log)[i];
        for (std::size_t i = 0; i < m; ++i) mean[i] /= n;
        if (res.num_runs < 2) return;
        for (const auto& log : logs)
            for (std::size_t i = 0; i < m; ++i) {
                const double d = metric(log)[i] - mean[i];
                se[i] += d * d;
            }
        for (std::size_t i = 0; i < m; ++i) se[i] = std::sqrt(se[i] / ((n - 1.0) * n));
    };
    reduce([](const TrajectoryLog& l) -> const std::vector<double>& { return l.err_inf; },
           res.mean_err_inf, res.se_err_inf);
    reduce([](const TrajectoryLog& l) -> const std::vector<double>& { return l.lower_err; },
           res.mean_lower_err, res.se_lower_err);
    reduce(
        [](const TrajectoryLog& l) -> const std::vector<double>& { return l.upper_lower_diff; },
        res.mean_diff_upper_lower, res.se_diff_upper_lower);
    reduce([](const TrajectoryLog& l) -> const std::vector<double>& { return l.vz; }, res.mean_vz,
           res.se_vz);
    for (const auto& log : logs) {
        res.max_w_inf = std::max(res.max_w_inf, log.max_w_inf);
        res.max_q_inf = std::max(res.max_q_inf, log.max_q_inf);
        res.max_lower_err_inf = std::max(res.max_lower_err_inf, log.max_lower_err_inf);
        res.max_abs_crossing = std::max(res.max_abs_crossing, log.max_abs_crossing);
        res.seeds.push_back(log.seed);
    }
    (void)ctx;
    return res;
}

} // namespace

EnsembleResult run_ensemble(const SimContext& ctx, int num_runs, std::uint64_t base_seed,
                            long long horizon, const LogSchedule& schedule,
                            const StepOptions& opts) {
    if (num_runs < 1) throw InvalidInput("num_runs must be >= 1");
    std::vector<TrajectoryLog> logs(num_runs);
    // Runs are independent; each writes only its own slot.  Aggregation
    // below is in fixed run order, so the result does not depend on
    // scheduling.
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < num_runs; ++i)
        logs[i] = run_trajectory(ctx, horizon, base_seed + static_cast<std::uint64_t>(i), schedule,
                                 opts);
    return aggregate(ctx, logs);
}

EnsembleResult run_ensemble_serial(const SimContext& ctx, int num_runs, std::uint64_t base_seed,
                                   long long horizon, const LogSchedule& schedule,
                                   const StepOptions& opts) {
    if (num_runs < 1) throw InvalidInput("num_runs must be >= 1");
    std::vector<TrajectoryLog> logs(num_runs);
    for (int i = 0; i < num_runs; ++i)
        logs[i] = run_trajectory(ctx, horizon, base_seed + static_cast<std::uint64_t>(i), schedule,
                                 opts);
    return aggregate(ctx, logs);
}

} // namespace qlab
