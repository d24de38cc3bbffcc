#include "spgg/lattice.hpp"

#include <algorithm>
#include <stdexcept>

#include "spgg/rng.hpp"

namespace spgg {

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::HalfHalf: return "halfhalf";
    case InitMode::Bernoulli: return "bernoulli";
    case InitMode::AllDefect: return "alldefect";
    case InitMode::AllCooperate: return "allcooperate";
  }
  return "unknown";
}

InitMode parse_init_mode(const std::string& text) {
  if (text == "halfhalf" || text == "half") return InitMode::HalfHalf;
  if (text == "bernoulli" || text == "random") return InitMode::Bernoulli;
  if (text == "alldefect" || text == "alld") return InitMode::AllDefect;
  if (text == "allcooperate" || text == "allc") return InitMode::AllCooperate;
  throw std::invalid_argument("unknown init mode: " + text);
}

void LatticeConfig::validate() const {
  if (side < 3) throw std::invalid_argument("lattice side must be >= 3");
  if (!(enhancement > 1.0)) throw std::invalid_argument("enhancement factor must be > 1");
  if (!(lcr_weight >= 0.0)) throw std::invalid_argument("lcr weight must be >= 0");
  if (!(bernoulli_p >= 0.0 && bernoulli_p <= 1.0))
    throw std::invalid_argument("bernoulli p must lie in [0, 1]");
}

StrategyGrid::StrategyGrid(std::size_t side, Strategy fill)
    : side_(side), cells_(side * side, static_cast<std::uint8_t>(fill)) {}

StrategyGrid::StrategyGrid(std::size_t side, std::vector<std::uint8_t> cells)
    : side_(side), cells_(std::move(cells)) {
  if (cells_.size() != side_ * side_)
    throw std::invalid_argument("strategy grid needs exactly side*side cells");
  if (std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c > 1; }))
    throw std::invalid_argument("strategy cells must be 0 or 1");
}

std::size_t StrategyGrid::cooperator_count() const {
  std::size_t n = 0;
  for (auto c : cells_) n += c;
  return n;
}

std::array<std::size_t, 4> neighbors(std::size_t index, std::size_t side) {
  const std::size_t row = index / side;
  const std::size_t col = index % side;
  const std::size_t up = (row + side - 1) % side;
  const std::size_t down = (row + 1) % side;
  const std::size_t left = (col + side - 1) % side;
  const std::size_t right = (col + 1) % side;
  return {up * side + col, down * side + col, row * side + left, row * side + right};
}

double group_payoff(int coop_count, Strategy own, double enhancement) {
  if (coop_count < 0 || coop_count > 5)
    throw std::invalid_argument("group cooperator count must lie in [0, 5]");
  const double share = enhancement * coop_count / 5.0;
  if (own == Strategy::Cooperate) {
    if (coop_count == 0)
      throw std::invalid_argument("a cooperator's group has at least one cooperator");
    return share - 1.0;
  }
  return share;
}

int focal_coop_count(const StrategyGrid& grid, std::size_t index) {
  int n = grid[index];
  for (auto j : neighbors(index, grid.side())) n += grid[j];
  return n;
}

double total_payoff(const StrategyGrid& grid, std::size_t index, double enhancement) {
  const auto own = static_cast<Strategy>(grid[index]);
  double total = group_payoff(focal_coop_count(grid, index), own, enhancement);
  for (auto centre : neighbors(index, grid.side()))
    total += group_payoff(focal_coop_count(grid, centre), own, enhancement);
  return total;
}

double lcr_signal(const StrategyGrid& grid, std::size_t index) {
  return focal_coop_count(grid, index) / 4.0;
}

RewardRecord shaped_reward(const StrategyGrid& grid, std::size_t index, double enhancement,
                           double lcr_weight) {
  RewardRecord rec;
  rec.base = total_payoff(grid, index, enhancement);
  rec.lcr = lcr_signal(grid, index);
  rec.total = rec.base + lcr_weight * rec.lcr;
  return rec;
}

ObservationRecord encode_observation(const StrategyGrid& grid, std::size_t index) {
  return {grid[index], focal_coop_count(grid, index), coop_fraction(grid)};
}

StrategyGrid init_grid(const LatticeConfig& config) {
  config.validate();
  const std::size_t side = config.side;
  switch (config.init) {
    case InitMode::AllDefect: return StrategyGrid(side, Strategy::Defect);
    case InitMode::AllCooperate: return StrategyGrid(side, Strategy::Cooperate);
    case InitMode::HalfHalf: {
      StrategyGrid grid(side, Strategy::Defect);
      for (std::size_t i = (side / 2) * side; i < side * side; ++i) grid.set(i, Strategy::Cooperate);
      return grid;
    }
    case InitMode::Bernoulli: {
      StrategyGrid grid(side, Strategy::Defect);
      for (std::size_t i = 0; i < side * side; ++i) {
        if (uniform01(config.seed, stream::kInitBernoulli, i) < config.bernoulli_p)
          grid.set(i, Strategy::Cooperate);
      }
      return grid;
    }
  }
  throw std::logic_error("unhandled init mode");
}

StrategyGrid apply_actions(const StrategyGrid& current, std::span<const std::uint8_t> actions) {
  if (actions.size() != current.size())
    throw std::invalid_argument("action array does not match lattice dimensions");
  return StrategyGrid(current.side(), std::vector<std::uint8_t>(actions.begin(), actions.end()));
}

double coop_fraction(const StrategyGrid& grid) {
  return static_cast<double>(grid.cooperator_count()) / static_cast<double>(grid.size());
}

}  // namespace spgg
