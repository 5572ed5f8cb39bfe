#pragma once

#include <vector>

#include "qlab/generators.hpp"
#include "qlab/simulator.hpp"

namespace qlab::testing {

// The three reference MDPs used across the test suite: a 2x2 ring chain
// (gamma 0.5), a dense random 5x3 (gamma 0.8), and a 6x3 garnet with
// branching 3 (gamma 0.9).
inline GeneratorSpec reference_spec(int which) {
    GeneratorSpec spec;
    switch (which) {
        case 0:
            spec.kind = GeneratorSpec::Kind::chain;
            spec.num_states = 2;
            spec.num_actions = 2;
            spec.discount = 0.5;
            spec.seed = 11;
            break;
        case 1:
            spec.kind = GeneratorSpec::Kind::random_dense;
            spec.num_states = 5;
            spec.num_actions = 3;
            spec.discount = 0.8;
            spec.seed = 22;
            break;
        case 2:
            spec.kind = GeneratorSpec::Kind::garnet;
            spec.num_states = 6;
            spec.num_actions = 3;
            spec.discount = 0.9;
            spec.seed = 33;
            spec.branching = 3;
            break;
        default: throw InvalidInput("reference index out of range");
    }
    return spec;
}

inline TabularMdp reference_mdp(int which) { return generate_mdp(reference_spec(which)); }

inline SimContext reference_context(int which,
                                    ObservationModel model = ObservationModel::iid) {
    TabularMdp mdp = reference_mdp(which);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    return SimContext::build(std::move(mdp), BehaviorPolicy::uniform(S, A), model,
                             Vec::Constant(S, 1.0 / S));
}

// Deterministic corpus of random ergodic MDPs: sizes |S| in [2, 6],
// |A| in [2, 4], discount cycling {0.5, 0.8, 0.9}, alternating dense and
// garnet kinds.  Seeds whose chains fail the ergodicity check are skipped,
// so the corpus is reproducible.
inline std::vector<GeneratorSpec> ergodic_corpus(int count) {
    std::vector<GeneratorSpec> corpus;
    const double gammas[3] = {0.5, 0.8, 0.9};
    std::uint64_t seed = 1000;
    while (static_cast<int>(corpus.size()) < count) {
        Rng rng(seed, 0xC0);
        GeneratorSpec spec;
        spec.kind = seed % 2 == 0 ? GeneratorSpec::Kind::random_dense : GeneratorSpec::Kind::garnet;
        spec.num_states = 2 + static_cast<int>(rng.next_u64() % 5);
        spec.num_actions = 2 + static_cast<int>(rng.next_u64() % 3);
        spec.discount = gammas[seed % 3];
        spec.branching = 2 + static_cast<int>(rng.next_u64() % spec.num_states);
        spec.branching = std::min(spec.branching, spec.num_states);
        spec.seed = seed;
        ++seed;
        try {
            TabularMdp mdp = generate_mdp(spec);
            (void)stationary_distribution(
                mdp, BehaviorPolicy::uniform(spec.num_states, spec.num_actions));
        } catch (const Error&) {
            continue; // non-ergodic draw; deterministic skip
        }
        corpus.push_back(spec);
    }
    return corpus;
}

// Random Q table with entries in [-scale, scale].
inline Vec random_q(Rng& rng, int n, double scale) {
    Vec q(n);
    for (int i = 0; i < n; ++i) q(i) = rng.uniform(-scale, scale);
    return q;
}

} // namespace qlab::testing
