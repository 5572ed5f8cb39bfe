#pragma once

#include <cstdint>
#include <string>

#include "qlab/mdp.hpp"

namespace qlab {

// Deterministic random-MDP generators: the spec (kind, sizes, discount,
// seed) fully determines the output.
struct GeneratorSpec {
    enum class Kind { random_dense, garnet, chain };
    Kind kind = Kind::random_dense;
    int num_states = 2;
    int num_actions = 2;
    double discount = 0.9;
    std::uint64_t seed = 0;
    int branching = 2; // garnet only: number of successor states, <= |S|
    double chain_flip = 0.3; // chain only: probability of moving

    static Kind parse_kind(const std::string& name);
    static std::string kind_name(Kind kind);
};

// random-dense: each transition row ~ flat Dirichlet, rewards uniform in
// [-1, 1].  garnet: `branching` distinct uniformly chosen successors with
// Dirichlet weights.  chain: a ring walk where action 0 steps left and
// action 1 steps right with probability `chain_flip` (staying put
// otherwise); single-action chains always move with that probability.
TabularMdp generate_mdp(const GeneratorSpec& spec);

} // namespace qlab
