#pragma once

#include "avgq/mdp.hpp"

#include <cstdint>
#include <string>

namespace avgq {

struct GeneratorSpec {
    enum class Kind { RandomDirichlet, Ring, Cycle2 };
    Kind kind = Kind::Cycle2;
    int S = 2;
    int A = 1;
    double concentration = 1.0;
    double slip = 0.0;
    std::uint64_t seed = 0;
};

/// "cycle2", "ring:S,slip", "dirichlet:S,A,concentration[,seed]".
GeneratorSpec parse_generator(const std::string& text);
std::string to_string(const GeneratorSpec& spec);

/// random_dirichlet: every row ~ Dirichlet(concentration), rewards ~ U[0,1).
/// ring(S, slip): action 0 advances s -> s+1 (mod S) with probability 1-slip and stays
///   otherwise, action 1 stays put; only advancing out of state 0 pays reward 1.
/// cycle2: two states, one action, deterministic swap, rewards (1, 0).
Amdp generate_mdp(const GeneratorSpec& spec);

} // namespace avgq
