#pragma once

#include <cstdint>

#include "spac/attack.hpp"
#include "spac/graph.hpp"

namespace spac {

/// Flips `budget` distinct node pairs chosen uniformly at random.
AttackResult random_attack(const Graph& g, int budget, std::uint64_t seed);

/// DICE: each flip deletes a random intra-class edge or adds a random
/// inter-class non-edge with equal probability, falling back to the other
/// action when one pool is exhausted. Uses ground-truth labels.
AttackResult dice_attack(const Graph& g, int budget, std::uint64_t seed);

}  // namespace spac
