#pragma once

#include <vector>

#include "spgg/lattice.hpp"

namespace spgg::kernels {

// Whole-lattice kernels. The default versions run OpenMP-parallel over sites
// and write into per-site slots only, so results do not depend on the thread
// count. The `serial` namespace holds straightforward per-site reference
// versions used by the tests and the benchmark.

/// Focal-group cooperator count for every site.
std::vector<int> focal_counts(const StrategyGrid& grid);

PayoffGrid payoff_field(const StrategyGrid& grid, double enhancement);

std::vector<RewardRecord> reward_field(const StrategyGrid& grid, double enhancement,
                                       double lcr_weight);

std::vector<ObservationRecord> observation_field(const StrategyGrid& grid);

namespace serial {

PayoffGrid payoff_field(const StrategyGrid& grid, double enhancement);

std::vector<RewardRecord> reward_field(const StrategyGrid& grid, double enhancement,
                                       double lcr_weight);

std::vector<ObservationRecord> observation_field(const StrategyGrid& grid);

}  // namespace serial
}  // namespace spgg::kernels
