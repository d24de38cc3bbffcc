#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "spgg/lattice.hpp"
#include "spgg/mappo.hpp"

namespace spgg {

// ---- independent PPO ------------------------------------------------------

/// PPO with a shared-parameter local critic over the 3-feature observation
/// and no LCR shaping.
TrainResult independent_ppo_train(const LatticeConfig& lattice, const TrainConfig& config,
                                  const StepObserver& observer = {});

// ---- Fermi imitation -------------------------------------------------------

enum class FermiScheme { Synchronous, Asynchronous };

struct FermiConfig {
  double noise = 0.5;
  std::size_t steps = 10000;
  FermiScheme scheme = FermiScheme::Synchronous;

  void validate() const;
};

/// Probability that an agent with payoff `own` copies a neighbour with
/// payoff `neighbor`: 1 / (1 + exp((own - neighbor) / K)).
double fermi_probability(double own, double neighbor, double noise);

/// Synchronous step: every agent compares itself with one uniformly chosen
/// neighbour on the current grid; all adoptions are applied at once.
/// Draws come from (seed, step, site) so the result is thread-count independent.
StrategyGrid fermi_step(const StrategyGrid& grid, double enhancement, double noise,
                        std::uint64_t seed, std::uint64_t step);

/// Asynchronous Monte Carlo step: L^2 random sequential elementary updates.
StrategyGrid fermi_step_async(const StrategyGrid& grid, double enhancement, double noise,
                              std::uint64_t seed, std::uint64_t step);

namespace serial {
StrategyGrid fermi_step(const StrategyGrid& grid, double enhancement, double noise,
                        std::uint64_t seed, std::uint64_t step);
}  // namespace serial

Trajectory run_fermi(const LatticeConfig& lattice, const FermiConfig& config,
                     const StepObserver& observer = {});

// ---- tabular Q-learning ---------------------------------------------------

struct QConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.02;
  std::size_t steps = 10000;
  bool shared_table = false;

  void validate() const;
};

/// Table over (own strategy, cooperating neighbours 0..4); actions are
/// indexed 0 = cooperate, 1 = defect.
class QTable {
 public:
  static constexpr int kStates = 10;

  static int state_index(std::uint8_t own, int neighbor_coop) { return own * 5 + neighbor_coop; }

  double& at(int state, int action) { return values_[state][action]; }
  double at(int state, int action) const { return values_[state][action]; }
  double max_value(int state) const { return std::max(values_[state][0], values_[state][1]); }

  bool operator==(const QTable&) const = default;

 private:
  std::array<std::array<double, 2>, kStates> values_{};
};

/// Either one table shared by every agent or one table per site.
using QTables = std::vector<QTable>;

QTables make_qtables(std::size_t agents, bool shared);

inline const QTable& table_for(const QTables& tables, std::size_t site) {
  return tables.size() == 1 ? tables[0] : tables[site];
}
inline QTable& table_for(QTables& tables, std::size_t site) {
  return tables.size() == 1 ? tables[0] : tables[site];
}

struct QStepResult {
  StrategyGrid grid;
  QTables tables;
  double mean_reward = 0.0;
};

/// One synchronous epsilon-greedy step for every agent followed by the
/// one-step Q update, applied in site order.
QStepResult q_step(const StrategyGrid& grid, const QTables& tables, const QConfig& config,
                   double enhancement, std::uint64_t seed, std::uint64_t step);

Trajectory run_qlearning(const LatticeConfig& lattice, const QConfig& config,
                         const StepObserver& observer = {}, QTables* final_tables = nullptr);

}  // namespace spgg
