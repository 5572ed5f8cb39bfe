// Command-line laboratory for asynchronous Q-learning viewed as a stochastic
// switching system: analysis pipeline, coupled-trajectory ensembles,
// verification suites, MDP generation, and mixing analysis.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "qlab/analysis.hpp"
#include "qlab/envelopes.hpp"
#include "qlab/generators.hpp"
#include "qlab/mixing.hpp"
#include "qlab/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitVerifyFailed = 3;

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> runs;
    std::optional<long long> horizon;
    std::optional<std::string> model;
};

struct LoadedConfig {
    json doc;
    std::string raw; // for the config hash
};

LoadedConfig load_config(const CliOverrides& cli) {
    LoadedConfig cfg;
    if (cli.config_path.empty()) {
        cfg.doc = json::object();
    } else {
        std::ifstream in(cli.config_path);
        if (!in) throw InvalidInput("cannot open config file: " + cli.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        cfg.raw = buf.str();
        try {
            cfg.doc = json::parse(cfg.raw);
        } catch (const json::exception& e) {
            throw InvalidInput(std::string("malformed config JSON: ") + e.what());
        }
    }
    if (cli.seed) cfg.doc["base_seed"] = *cli.seed;
    if (cli.out) cfg.doc["out"] = *cli.out;
    if (cli.runs) cfg.doc["num_runs"] = *cli.runs;
    if (cli.horizon) cfg.doc["horizon"] = *cli.horizon;
    if (cli.model) cfg.doc["model"] = *cli.model;
    if (cfg.raw.empty()) cfg.raw = cfg.doc.dump();
    return cfg;
}

GeneratorSpec parse_generator(const json& g) {
    GeneratorSpec spec;
    spec.kind = GeneratorSpec::parse_kind(g.value("kind", "random-dense"));
    spec.num_states = g.value("num_states", 2);
    spec.num_actions = g.value("num_actions", 2);
    spec.discount = g.value("discount", 0.9);
    spec.seed = g.value("seed", 0ULL);
    spec.branching = g.value("branching", 2);
    spec.chain_flip = g.value("chain_flip", 0.3);
    return spec;
}

TabularMdp resolve_mdp(const json& doc) {
    if (!doc.contains("mdp")) throw InvalidInput("config is missing the \"mdp\" section");
    const json& m = doc.at("mdp");
    if (m.contains("file")) {
        TabularMdp::Options opts;
        opts.allow_large_reward = m.value("allow_large_reward", false);
        return load_mdp_json(m.at("file").get<std::string>(), opts);
    }
    if (m.contains("generator")) return generate_mdp(parse_generator(m.at("generator")));
    throw InvalidInput("\"mdp\" must contain either \"file\" or \"generator\"");
}

ObservationModel parse_model(const json& doc) {
    const std::string name = doc.value("model", "iid");
    if (name == "iid") return ObservationModel::iid;
    if (name == "markov" || name == "markovian") return ObservationModel::markovian;
    throw InvalidInput("model must be \"iid\" or \"markov\"");
}

Vec parse_state_dist(const json& doc, int num_states) {
    if (doc.contains("state_dist")) {
        const auto& arr = doc.at("state_dist");
        if (static_cast<int>(arr.size()) != num_states)
            throw InvalidInput("state_dist length does not match num_states");
        Vec p(num_states);
        for (int i = 0; i < num_states; ++i) p(i) = arr.at(i).get<double>();
        return p;
    }
    return Vec::Constant(num_states, 1.0 / num_states);
}

BehaviorPolicy parse_policy(const json& doc, int num_states, int num_actions) {
    if (doc.contains("policy")) {
        const auto& rows = doc.at("policy");
        Mat beta(num_states, num_actions);
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a) beta(s, a) = rows.at(s).at(a).get<double>();
        return BehaviorPolicy(std::move(beta));
    }
    return BehaviorPolicy::uniform(num_states, num_actions);
}

LogSchedule parse_schedule(const json& doc) {
    LogSchedule sched;
    if (doc.contains("log")) {
        const json& l = doc.at("log");
        sched.ratio = l.value("ratio", 1.25);
        sched.dense_until = l.value("dense_until", 1LL);
        sched.log_all = l.value("log_all", false);
    }
    return sched;
}

fs::path ensure_out_dir(const json& doc) {
    const fs::path dir = doc.value("out", "out");
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

SimContext build_context(const json& doc, const TabularMdp& mdp) {
    const ObservationModel model = parse_model(doc);
    BehaviorPolicy policy = parse_policy(doc, mdp.num_states(), mdp.num_actions());
    Vec p = parse_state_dist(doc, mdp.num_states());
    const double xi_factor =
        doc.contains("envelopes") ? doc.at("envelopes").value("xi_factor", 8.0) : 8.0;
    return SimContext::build(mdp, std::move(policy), model, std::move(p), xi_factor);
}

json metadata_json(const LoadedConfig& cfg, const TabularMdp& mdp, const SimContext& ctx,
                   const std::vector<std::uint64_t>& seeds) {
    json meta;
    meta["config_hash"] = fnv1a(cfg.raw);
    meta["mdp_hash"] = fnv1a(mdp_to_json(mdp));
    meta["seeds"] = seeds;
    meta["model"] = ctx.model == ObservationModel::iid ? "iid" : "markov";
    meta["plan"] = {{"nu", ctx.plan.nu},       {"sigma_max_B", ctx.plan.sigma_max_b},
                    {"xi", ctx.plan.xi},       {"theta", ctx.plan.theta},
                    {"beta", ctx.plan.beta},   {"xi_factor", ctx.plan.xi_factor},
                    {"certificate_ok", ctx.plan.certificate.all()}};
    return meta;
}

json mixing_profile_json(const MixingProfile& profile, const StepSizePlan& plan,
                         long long k_mix) {
    json doc;
    doc["m"] = profile.m;
    doc["rho"] = profile.rho;
    doc["k_mix"] = k_mix;
    json taus = json::array();
    for (double c : {0.5, 0.1, 0.01, 1e-3, 1e-4}) taus.push_back({c, profile.tau_mix(c)});
    taus.push_back({plan.alpha(0.0), profile.tau_mix(plan.alpha(0.0))});
    doc["tau_mix_samples"] = std::move(taus);
    doc["d_tv_curve"] = profile.d_tv_curve;
    return doc;
}

int cmd_analyze(const CliOverrides& cli) {
    LoadedConfig cfg = load_config(cli);
    TabularMdp mdp = resolve_mdp(cfg.doc);
    SimContext ctx = build_context(cfg.doc, mdp);
    AnalysisReport report = analyze(ctx);
    const fs::path dir = ensure_out_dir(cfg.doc);
    json doc = json::parse(report_to_json(report));
    doc["metadata"] = metadata_json(cfg, mdp, ctx, {});
    write_file(dir / "analysis.json", doc.dump(2) + "\n");
    std::cout << "analysis written to " << (dir / "analysis.json").string() << "\n";
    std::cout << "bound checks: " << (report.all_bounds_pass() ? "all pass" : "FAILURES present")
              << "\n";
    return report.all_bounds_pass() ? kExitOk : kExitVerifyFailed;
}

int cmd_simulate(const CliOverrides& cli) {
    LoadedConfig cfg = load_config(cli);
    TabularMdp mdp = resolve_mdp(cfg.doc);
    SimContext ctx = build_context(cfg.doc, mdp);
    const long long horizon = cfg.doc.value("horizon", 10000LL);
    const int num_runs = cfg.doc.value("num_runs", 20);
    const std::uint64_t base_seed = cfg.doc.value("base_seed", 1ULL);
    if (horizon < 1) throw InvalidInput("horizon must be >= 1");
    if (num_runs < 1) throw InvalidInput("num_runs must be >= 1");
    const LogSchedule sched = parse_schedule(cfg.doc);
    StepOptions opts;
    opts.verify_matrix_form = cfg.doc.value("verify_matrix_form", false);

    EnsembleResult res = run_ensemble(ctx, num_runs, base_seed, horizon, sched, opts);
    const ProblemConstants constants = problem_constants(ctx);
    const fs::path dir = ensure_out_dir(cfg.doc);

    long long envelope_from_k = 0;
    json meta = metadata_json(cfg, mdp, ctx, res.seeds);
    if (ctx.model == ObservationModel::markovian) {
        // Start the mixing analysis from the induced initial state-action law.
        Vec mu0 = Vec::Zero(mdp.num_pairs());
        BehaviorPolicy policy = parse_policy(cfg.doc, mdp.num_states(), mdp.num_actions());
        const Vec p0 = parse_state_dist(cfg.doc, mdp.num_states());
        for (int s = 0; s < mdp.num_states(); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a)
                mu0(mdp.index(s, a)) = p0(s) * policy.prob(s, a);
        const long long mix_horizon = cfg.doc.value("mixing_horizon", 1000LL);
        MixingProfile profile = fit_geometric_envelope(mdp, policy, mu0, mix_horizon);
        const long long k_mix = compute_kmix(profile, ctx.plan, std::max(horizon, 1000LL));
        envelope_from_k = k_mix;
        write_file(dir / "mixing_profile.json",
                   mixing_profile_json(profile, ctx.plan, k_mix).dump(2) + "\n");
        meta["k_mix"] = k_mix;
    }
    const Envelope total = envelope_iid_total(constants);
    const Envelope lower = envelope_lower_q(constants);
    const Envelope diff = envelope_upper_diff(constants);
    write_file(dir / "ensemble.csv", ensemble_to_csv(res, total, lower, diff, envelope_from_k));
    meta["horizon"] = horizon;
    meta["num_runs"] = num_runs;
    meta["max_w_inf"] = res.max_w_inf;
    meta["max_q_inf"] = res.max_q_inf;
    write_file(dir / "metadata.json", meta.dump(2) + "\n");
    std::cout << "ensemble written to " << (dir / "ensemble.csv").string() << "\n";
    return kExitOk;
}

int cmd_generate(const CliOverrides& cli) {
    LoadedConfig cfg = load_config(cli);
    json spec_json;
    if (cfg.doc.contains("generator"))
        spec_json = cfg.doc.at("generator");
    else if (cfg.doc.contains("mdp") && cfg.doc.at("mdp").contains("generator"))
        spec_json = cfg.doc.at("mdp").at("generator");
    else
        throw InvalidInput("generate requires a \"generator\" section in the config");
    TabularMdp mdp = generate_mdp(parse_generator(spec_json));
    fs::path out = cfg.doc.value("out", "out");
    if (out.extension() != ".json") {
        fs::create_directories(out);
        out /= "mdp.json";
    } else if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    save_mdp_json(mdp, out.string());
    std::cout << "mdp written to " << out.string() << "\n";
    return kExitOk;
}

int cmd_mixing(const CliOverrides& cli) {
    LoadedConfig cfg = load_config(cli);
    TabularMdp mdp = resolve_mdp(cfg.doc);
    BehaviorPolicy policy = parse_policy(cfg.doc, mdp.num_states(), mdp.num_actions());
    Vec mu0 = Vec::Zero(mdp.num_pairs());
    if (cfg.doc.contains("mu0")) {
        const auto& arr = cfg.doc.at("mu0");
        if (static_cast<int>(arr.size()) != mdp.num_pairs())
            throw InvalidInput("mu0 length does not match |S||A|");
        for (int i = 0; i < mdp.num_pairs(); ++i) mu0(i) = arr.at(i).get<double>();
    } else {
        mu0(0) = 1.0; // point mass by default
    }
    const long long horizon = cfg.doc.value("horizon", 1000LL);
    MixingProfile profile = fit_geometric_envelope(mdp, policy, mu0, horizon);
    SimContext ctx = build_context(cfg.doc, mdp);
    const long long k_mix = compute_kmix(profile, ctx.plan, std::max(horizon, 1000LL));
    const fs::path dir = ensure_out_dir(cfg.doc);
    json doc = mixing_profile_json(profile, ctx.plan, k_mix);
    doc["metadata"] = metadata_json(cfg, mdp, ctx, {});
    write_file(dir / "mixing_profile.json", doc.dump(2) + "\n");
    std::cout << "mixing profile written to " << (dir / "mixing_profile.json").string() << "\n";
    return kExitOk;
}

int cmd_verify(const CliOverrides& cli) {
    LoadedConfig cfg = load_config(cli);
    TabularMdp mdp = resolve_mdp(cfg.doc);
    SimContext ctx = build_context(cfg.doc, mdp);
    const long long horizon = cfg.doc.value("horizon", 5000LL);
    const int num_runs = cfg.doc.value("num_runs", 10);
    const std::uint64_t base_seed = cfg.doc.value("base_seed", 1ULL);

    int failures = 0;
    auto report = [&](const std::string& name, bool pass, const std::string& detail = "") {
        std::cout << (pass ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
        if (!pass) ++failures;
    };

    // Operator identities.
    const int n = mdp.num_pairs();
    const double lyap_res = (ctx.lyap.g * ctx.lyap.t_star + ctx.lyap.t_star.transpose() * ctx.lyap.g +
                             Mat::Identity(n, n))
                                .lpNorm<Eigen::Infinity>();
    report("lyapunov_identity", lyap_res <= 1e-8);
    const double sim_res =
        (ctx.lyap.b + ctx.lyap.b.transpose() + ctx.lyap.g.inverse()).lpNorm<Eigen::Infinity>();
    report("similarity_identity", sim_res <= 1e-8);

    // Closed-form norm bounds.
    const auto checks = norm_bound_checks(ctx);
    bool bounds_ok = true;
    for (const auto& check : checks) bounds_ok = bounds_ok && check.pass;
    report("norm_bounds", bounds_ok);
    report("stepsize_certificate", ctx.plan.certificate.all());

    // Infinity-norm identity of A on random Q tables.
    {
        Rng rng(base_seed, 0xA);
        bool ok = true;
        for (int trial = 0; trial < 100 && ok; ++trial) {
            Vec q(n);
            for (int i = 0; i < n; ++i)
                q(i) = rng.uniform(-1.0, 1.0) / (1.0 - mdp.discount());
            const GreedySelector sel = greedy_selector(q, mdp.num_states(), mdp.num_actions());
            const double alpha = ctx.plan.alpha(static_cast<double>(trial));
            const Mat tq = build_tq(mdp, ctx.dist, sel);
            const SystemOperators ops =
                build_a_b(tq, sel, ctx.sel_star, ctx.q_star, alpha, mdp, ctx.dist);
            const double norm_a = ops.a_qk.cwiseAbs().rowwise().sum().maxCoeff();
            const double expected = 1.0 - alpha * ctx.dist.d_min() * (1.0 - mdp.discount());
            ok = std::abs(norm_a - expected) <= 1e-12 && ops.b_qk.maxCoeff() <= 1e-12;
        }
        report("a_norm_identity", ok);
    }

    // Simulation invariants (sandwich is enforced inside the stepper).
    StepOptions opts;
    opts.verify_matrix_form = true;
    bool sandwich_ok = true;
    std::string sandwich_detail;
    EnsembleResult res;
    try {
        res = run_ensemble(ctx, num_runs, base_seed, horizon, LogSchedule{}, opts);
    } catch (const Error& e) {
        sandwich_ok = false;
        sandwich_detail = e.what();
    }
    report("sandwich_and_matrix_form", sandwich_ok, sandwich_detail);
    if (sandwich_ok) {
        const double gamma = mdp.discount();
        report("noise_bound", res.max_w_inf <= 4.0 / (1.0 - gamma));
        report("iterate_bound", res.max_q_inf <= 1.0 / (1.0 - gamma));
        const ProblemConstants constants = problem_constants(ctx);
        if (ctx.model == ObservationModel::iid) {
            const Envelope total = envelope_iid_total(constants);
            const Envelope lower = envelope_lower_q(constants);
            const Envelope diff = envelope_upper_diff(constants);
            const Envelope vz = envelope_lower_z(constants);
            bool dominance = true;
            for (std::size_t i = 0; i < res.ks.size(); ++i) {
                const double kd = static_cast<double>(res.ks[i]);
                dominance = dominance && res.mean_err_inf[i] <= total.evaluate(kd) &&
                            res.mean_lower_err[i] <= lower.evaluate(kd) &&
                            res.mean_diff_upper_lower[i] <= diff.evaluate(kd) &&
                            res.mean_vz[i] <= vz.evaluate(kd);
            }
            report("envelope_dominance", dominance);
        } else {
            report("crossing_term_bound",
                   res.max_abs_crossing <= crossing_term_bound(constants));
            report("lower_error_bound",
                   res.max_lower_err_inf <=
                       4.0 / ((1.0 - gamma) * (1.0 - gamma) * ctx.dist.d_min()));
        }
    }

    // Mixing-time logarithmic bound on the state-action chain.
    if (ctx.model == ObservationModel::markovian) {
        BehaviorPolicy policy = parse_policy(cfg.doc, mdp.num_states(), mdp.num_actions());
        Vec mu0 = Vec::Zero(mdp.num_pairs());
        mu0(0) = 1.0;
        MixingProfile profile = fit_geometric_envelope(mdp, policy, mu0, 1000);
        bool mix_ok = true;
        for (long long k : {1LL, 10LL, 100LL, 10000LL}) {
            const double lhs = static_cast<double>(
                profile.tau_mix(ctx.plan.alpha(static_cast<double>(k))));
            mix_ok = mix_ok &&
                     lhs <= mixing_time_log_bound(profile, ctx.plan, static_cast<double>(k));
        }
        report("mixing_time_log_bound", mix_ok);
    }

    std::cout << (failures == 0 ? "verification passed" : "verification FAILED") << " ("
              << failures << " failing)\n";
    return failures == 0 ? kExitOk : kExitVerifyFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous Q-learning switching-system laboratory"};
    app.require_subcommand(1);
    CliOverrides cli;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "JSON config file");
        sub->add_option("--seed", cli.seed, "Base RNG seed override");
        sub->add_option("--out", cli.out, "Output directory (or file for generate)");
        sub->add_option("--runs", cli.runs, "Number of ensemble runs");
        sub->add_option("--horizon", cli.horizon, "Simulation horizon");
        sub->add_option("--model", cli.model, "Observation model: iid|markov");
    };
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "Run the full analysis pipeline");
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Run a coupled-trajectory ensemble");
    CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant verification suite");
    CLI::App* generate_cmd = app.add_subcommand("generate", "Generate an MDP file");
    CLI::App* mixing_cmd = app.add_subcommand("mixing", "Analyze chain mixing");
    for (CLI::App* sub : {analyze_cmd, simulate_cmd, verify_cmd, generate_cmd, mixing_cmd})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);
    try {
        if (analyze_cmd->parsed()) return cmd_analyze(cli);
        if (simulate_cmd->parsed()) return cmd_simulate(cli);
        if (verify_cmd->parsed()) return cmd_verify(cli);
        if (generate_cmd->parsed()) return cmd_generate(cli);
        if (mixing_cmd->parsed()) return cmd_mixing(cli);
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
