#include "spgg/kernels.hpp"

#include <cstdint>

namespace spgg::kernels {

namespace {
constexpr std::int64_t kParallelThreshold = 1024;
}

std::vector<int> focal_counts(const StrategyGrid& grid) {
  const auto n = static_cast<std::int64_t>(grid.size());
  const std::size_t side = grid.side();
  std::vector<int> counts(grid.size());
#pragma omp parallel for if (n >= kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto site = static_cast<std::size_t>(i);
    int c = grid[site];
    for (auto j : neighbors(site, side)) c += grid[j];
    counts[site] = c;
  }
  return counts;
}

PayoffGrid payoff_field(const StrategyGrid& grid, double enhancement) {
  const auto counts = focal_counts(grid);
  const auto n = static_cast<std::int64_t>(grid.size());
  const std::size_t side = grid.side();
  PayoffGrid field{side, std::vector<double>(grid.size())};
  const double share = enhancement / 5.0;
#pragma omp parallel for if (n >= kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto site = static_cast<std::size_t>(i);
    int pooled = counts[site];
    for (auto j : neighbors(site, side)) pooled += counts[j];
    field.values[site] = share * pooled - 5.0 * grid[site];
  }
  return field;
}

std::vector<RewardRecord> reward_field(const StrategyGrid& grid, double enhancement,
                                       double lcr_weight) {
  const auto counts = focal_counts(grid);
  const auto n = static_cast<std::int64_t>(grid.size());
  const std::size_t side = grid.side();
  std::vector<RewardRecord> out(grid.size());
  const double share = enhancement / 5.0;
#pragma omp parallel for if (n >= kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto site = static_cast<std::size_t>(i);
    int pooled = counts[site];
    for (auto j : neighbors(site, side)) pooled += counts[j];
    RewardRecord rec;
    rec.base = share * pooled - 5.0 * grid[site];
    rec.lcr = counts[site] / 4.0;
    rec.total = rec.base + lcr_weight * rec.lcr;
    out[site] = rec;
  }
  return out;
}

std::vector<ObservationRecord> observation_field(const StrategyGrid& grid) {
  const auto counts = focal_counts(grid);
  const double g = coop_fraction(grid);
  std::vector<ObservationRecord> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {grid[i], counts[i], g};
  return out;
}

namespace serial {

PayoffGrid payoff_field(const StrategyGrid& grid, double enhancement) {
  PayoffGrid field{grid.side(), std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) field.values[i] = total_payoff(grid, i, enhancement);
  return field;
}

std::vector<RewardRecord> reward_field(const StrategyGrid& grid, double enhancement,
                                       double lcr_weight) {
  std::vector<RewardRecord> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = shaped_reward(grid, i, enhancement, lcr_weight);
  return out;
}

std::vector<ObservationRecord> observation_field(const StrategyGrid& grid) {
  std::vector<ObservationRecord> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = encode_observation(grid, i);
  return out;
}

}  // namespace serial
}  // namespace spgg::kernels
