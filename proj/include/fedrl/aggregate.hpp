#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedrl/bundle.hpp"

namespace fedrl::fed {

// Dataset-size-weighted elementwise mean of the participants' parameters:
// weights are |D_i| / sum |D_j|. Bundles must be structurally identical.
TensorBundle fedavg_aggregate(
    const std::vector<std::pair<TensorBundle, std::uint64_t>>& states);

// Reward-weighted variant. Weights are the average rewards shifted into the
// positive range when any of them is negative (w_i = r_i - min(0, min_j r_j)
// + 1e-6), then normalized to sum one, so better-performing agents dominate
// regardless of the reward sign.
TensorBundle weighted_fedavg_aggregate(
    const std::vector<std::pair<TensorBundle, double>>& states);

}  // namespace fedrl::fed
