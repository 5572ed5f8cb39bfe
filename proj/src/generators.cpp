#include "qlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qlab/rng.hpp"

namespace qlab {

GeneratorSpec::Kind GeneratorSpec::parse_kind(const std::string& name) {
    if (name == "random-dense") return Kind::random_dense;
    if (name == "garnet") return Kind::garnet;
    if (name == "chain") return Kind::chain;
    throw InvalidInput("unknown generator kind: " + name);
}

std::string GeneratorSpec::kind_name(Kind kind) {
    switch (kind) {
        case Kind::random_dense: return "random-dense";
        case Kind::garnet: return "garnet";
        case Kind::chain: return "chain";
    }
    throw InvalidInput("unknown generator kind");
}

namespace {

// Flat Dirichlet via normalized unit-rate exponentials.
void dirichlet_row(Rng& rng, double* out, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = -std::log(1.0 - rng.next_double());
        total += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= total;
}

// Exact renormalization so each row sums to 1 at machine precision.
void renormalize(Mat& p) {
    for (int i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
}

} // namespace

TabularMdp generate_mdp(const GeneratorSpec& spec) {
    const int S = spec.num_states;
    const int A = spec.num_actions;
    if (S < 1 || A < 1) throw InvalidInput("generator sizes must be positive");
    if (spec.kind == GeneratorSpec::Kind::garnet && (spec.branching < 1 || spec.branching > S))
        throw InvalidInput("garnet branching factor must lie in [1, num_states]");
    Rng rng(spec.seed, /*stream=*/0x6d6470u); // one stream per generated MDP
    Mat trans = Mat::Zero(S * A, S);
    Vec reward(S * A);
    std::vector<double> row(S);
    switch (spec.kind) {
        case GeneratorSpec::Kind::random_dense:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    dirichlet_row(rng, row.data(), S);
                    for (int s2 = 0; s2 < S; ++s2) trans(sa_index(s, a, S), s2) = row[s2];
                }
            break;
        case GeneratorSpec::Kind::garnet: {
            std::vector<int> pool(S);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    std::iota(pool.begin(), pool.end(), 0);
                    // Partial Fisher-Yates draw of `branching` distinct states.
                    for (int b = 0; b < spec.branching; ++b) {
                        const int j = b + static_cast<int>(rng.next_double() * (S - b));
                        std::swap(pool[b], pool[std::min(j, S - 1)]);
                    }
                    dirichlet_row(rng, row.data(), spec.branching);
                    for (int b = 0; b < spec.branching; ++b)
                        trans(sa_index(s, a, S), pool[b]) = row[b];
                }
            break;
        }
        case GeneratorSpec::Kind::chain: {
            if (!(spec.chain_flip > 0.0 && spec.chain_flip < 1.0))
                throw InvalidInput("chain move probability must lie in (0, 1)");
            // Ring walk: every action steps right (s + 1 mod S); even
            // actions move with probability chain_flip, odd actions with
            // 1 - chain_flip.  Staying put keeps the chain aperiodic.
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const double move =
                        (A == 1 || a % 2 == 0) ? spec.chain_flip : 1.0 - spec.chain_flip;
                    trans(sa_index(s, a, S), (s + 1) % S) += move;
                    trans(sa_index(s, a, S), s) += 1.0 - move;
                }
            break;
        }
    }
    renormalize(trans);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) reward(sa_index(s, a, S)) = rng.uniform(-1.0, 1.0);
    return TabularMdp(S, A, spec.discount, std::move(trans), std::move(reward));
}

} // namespace qlab
