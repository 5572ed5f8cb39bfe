// Times the parallel ensemble driver against the serial reference
// implementation and checks that they produce identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "qlab/generators.hpp"
#include "qlab/simulator.hpp"

using namespace qlab;

namespace {

double time_seconds(const std::function<EnsembleResult()>& fn, EnsembleResult& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    const int num_runs = argc > 1 ? std::atoi(argv[1]) : 64;
    const long long horizon = argc > 2 ? std::atoll(argv[2]) : 20000;

    GeneratorSpec spec;
    spec.kind = GeneratorSpec::Kind::random_dense;
    spec.num_states = 5;
    spec.num_actions = 3;
    spec.discount = 0.8;
    spec.seed = 22;
    TabularMdp mdp = generate_mdp(spec);
    const int S = mdp.num_states(), A = mdp.num_actions();
    SimContext ctx = SimContext::build(std::move(mdp), BehaviorPolicy::uniform(S, A),
                                       ObservationModel::iid, Vec::Constant(S, 1.0 / S));

    EnsembleResult serial, parallel;
    const double t_serial =
        time_seconds([&] { return run_ensemble_serial(ctx, num_runs, 1, horizon); }, serial);
    const double t_parallel =
        time_seconds([&] { return run_ensemble(ctx, num_runs, 1, horizon); }, parallel);

    const bool identical = serial.mean_err_inf == parallel.mean_err_inf &&
                           serial.se_err_inf == parallel.se_err_inf &&
                           serial.mean_vz == parallel.mean_vz;
    std::printf("runs=%d horizon=%lld\n", num_runs, horizon);
    std::printf("serial:   %.3f s\n", t_serial);
    std::printf("parallel: %.3f s (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);
    std::printf("results identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
