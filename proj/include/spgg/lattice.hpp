#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spgg {

enum class Strategy : std::uint8_t { Defect = 0, Cooperate = 1 };

enum class InitMode { HalfHalf, Bernoulli, AllDefect, AllCooperate };

std::string to_string(InitMode mode);
InitMode parse_init_mode(const std::string& text);

/// Lattice and game parameters for one run.
struct LatticeConfig {
  std::size_t side = 50;
  double enhancement = 4.4;
  double lcr_weight = 3.0;
  InitMode init = InitMode::HalfHalf;
  double bernoulli_p = 0.5;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when side < 3, r <= 1, zeta < 0 or p is
  /// outside [0, 1].
  void validate() const;
};

/// L x L binary strategy field, row-major, 1 = cooperate.
class StrategyGrid {
 public:
  StrategyGrid() = default;
  explicit StrategyGrid(std::size_t side, Strategy fill = Strategy::Defect);
  StrategyGrid(std::size_t side, std::vector<std::uint8_t> cells);

  std::size_t side() const { return side_; }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t operator[](std::size_t index) const { return cells_[index]; }
  std::uint8_t at(std::size_t row, std::size_t col) const { return cells_[row * side_ + col]; }
  void set(std::size_t index, Strategy s) { cells_[index] = static_cast<std::uint8_t>(s); }

  std::span<const std::uint8_t> cells() const { return cells_; }

  std::size_t cooperator_count() const;

  bool operator==(const StrategyGrid&) const = default;

 private:
  std::size_t side_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Accumulated payoff per site.
struct PayoffGrid {
  std::size_t side = 0;
  std::vector<double> values;

  double operator[](std::size_t index) const { return values[index]; }
};

struct ObservationRecord {
  std::uint8_t own_strategy = 0;
  int focal_coop_count = 0;
  double global_coop_ratio = 0.0;
};

struct RewardRecord {
  double base = 0.0;
  double lcr = 0.0;
  double total = 0.0;
};

/// Up, down, left, right with periodic wrap.
std::array<std::size_t, 4> neighbors(std::size_t index, std::size_t side);

/// Payoff one member receives from a single five-member group.
/// Throws std::invalid_argument for counts outside [0, 5] or a cooperator in
/// a group with zero cooperators.
double group_payoff(int coop_count, Strategy own, double enhancement);

/// Cooperators in the group centred on `index` (the site and its 4 neighbours).
int focal_coop_count(const StrategyGrid& grid, std::size_t index);

/// Sum of group payoffs over the five groups containing `index`.
double total_payoff(const StrategyGrid& grid, std::size_t index, double enhancement);

/// Focal-group cooperator count divided by four; ranges over {0, 0.25, ..., 1.25}.
double lcr_signal(const StrategyGrid& grid, std::size_t index);

RewardRecord shaped_reward(const StrategyGrid& grid, std::size_t index, double enhancement,
                           double lcr_weight);

ObservationRecord encode_observation(const StrategyGrid& grid, std::size_t index);

StrategyGrid init_grid(const LatticeConfig& config);

/// Synchronous update: the next grid is the action array itself.
StrategyGrid apply_actions(const StrategyGrid& current, std::span<const std::uint8_t> actions);

double coop_fraction(const StrategyGrid& grid);

}  // namespace spgg
