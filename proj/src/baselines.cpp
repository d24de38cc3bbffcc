#include "spgg/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spgg/kernels.hpp"
#include "spgg/rng.hpp"

namespace spgg {

TrainResult independent_ppo_train(const LatticeConfig& lattice, const TrainConfig& config,
                                  const StepObserver& observer) {
  return train(lattice, config, Algorithm::Ppo, observer);
}

void FermiConfig::validate() const {
  if (!(noise > 0.0)) throw std::invalid_argument("fermi noise K must be > 0");
}

double fermi_probability(double own, double neighbor, double noise) {
  return 1.0 / (1.0 + std::exp((own - neighbor) / noise));
}

namespace {

std::uint8_t fermi_decision(const StrategyGrid& grid, const PayoffGrid& payoff, std::size_t site,
                            double noise, std::uint64_t seed, std::uint64_t step) {
  const auto nb = neighbors(site, grid.side());
  const double pick = uniform01(seed, stream::kFermiNeighbor, step_site(step, site));
  const std::size_t j = nb[static_cast<std::size_t>(pick * 4.0)];
  const double adopt = uniform01(seed, stream::kFermiAdopt, step_site(step, site));
  return adopt < fermi_probability(payoff[site], payoff[j], noise) ? grid[j] : grid[site];
}

// Payoff of `site` computed locally (used by the asynchronous scheme).
double local_payoff(const StrategyGrid& grid, std::size_t site, double enhancement) {
  return total_payoff(grid, site, enhancement);
}

}  // namespace

StrategyGrid fermi_step(const StrategyGrid& grid, double enhancement, double noise,
                        std::uint64_t seed, std::uint64_t step) {
  const PayoffGrid payoff = kernels::payoff_field(grid, enhancement);
  std::vector<std::uint8_t> next(grid.size());
  const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for if (n >= 1024)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto site = static_cast<std::size_t>(i);
    next[site] = fermi_decision(grid, payoff, site, noise, seed, step);
  }
  return StrategyGrid(grid.side(), std::move(next));
}

namespace serial {
StrategyGrid fermi_step(const StrategyGrid& grid, double enhancement, double noise,
                        std::uint64_t seed, std::uint64_t step) {
  const PayoffGrid payoff = kernels::serial::payoff_field(grid, enhancement);
  std::vector<std::uint8_t> next(grid.size());
  for (std::size_t site = 0; site < grid.size(); ++site)
    next[site] = fermi_decision(grid, payoff, site, noise, seed, step);
  return StrategyGrid(grid.side(), std::move(next));
}
}  // namespace serial

StrategyGrid fermi_step_async(const StrategyGrid& grid, double enhancement, double noise,
                              std::uint64_t seed, std::uint64_t step) {
  StrategyGrid g = grid;
  const std::size_t n = g.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t counter = step_site(step, k);
    const auto site = static_cast<std::size_t>(
        uniform01(seed, stream::kFermiAsyncSite, counter) * static_cast<double>(n));
    const auto nb = neighbors(site, g.side());
    const std::size_t j =
        nb[static_cast<std::size_t>(uniform01(seed, stream::kFermiNeighbor, counter) * 4.0)];
    if (g[site] == g[j]) continue;
    const double p = fermi_probability(local_payoff(g, site, enhancement),
                                       local_payoff(g, j, enhancement), noise);
    if (uniform01(seed, stream::kFermiAdopt, counter) < p) g.set(site, static_cast<Strategy>(g[j]));
  }
  return g;
}

Trajectory run_fermi(const LatticeConfig& lattice, const FermiConfig& config,
                     const StepObserver& observer) {
  lattice.validate();
  config.validate();
  StrategyGrid grid = init_grid(lattice);
  auto mean_payoff = [&](const StrategyGrid& g) {
    const auto field = kernels::payoff_field(g, lattice.enhancement);
    double s = 0.0;
    for (double v : field.values) s += v;
    return s / static_cast<double>(g.size());
  };
  Trajectory traj;
  if (observer) observer(0, grid);
  traj.push_back({0, coop_fraction(grid), mean_payoff(grid), 0.0, 0.0, 0.0});
  for (std::size_t t = 0; t < config.steps; ++t) {
    grid = config.scheme == FermiScheme::Synchronous
               ? fermi_step(grid, lattice.enhancement, config.noise, lattice.seed, t)
               : fermi_step_async(grid, lattice.enhancement, config.noise, lattice.seed, t);
    traj.push_back({t + 1, coop_fraction(grid), mean_payoff(grid), 0.0, 0.0, 0.0});
    if (observer) observer(t + 1, grid);
  }
  return traj;
}

void QConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("q alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("q gamma must lie in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("q epsilon must lie in [0, 1]");
}

QTables make_qtables(std::size_t agents, bool shared) {
  if (agents == 0) throw std::invalid_argument("make_qtables: no agents");
  return QTables(shared ? 1 : agents);
}

QStepResult q_step(const StrategyGrid& grid, const QTables& tables, const QConfig& config,
                   double enhancement, std::uint64_t seed, std::uint64_t step) {
  const std::size_t n = grid.size();
  if (tables.size() != 1 && tables.size() != n) {
    throw std::invalid_argument("q_step: table count must be 1 or the number of sites");
  }
  const auto counts = kernels::focal_counts(grid);
  std::vector<int> states(n);
  std::vector<std::uint8_t> actions(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for if (count >= 1024)
  for (std::int64_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const QTable& table = table_for(tables, i);
    const int s = QTable::state_index(grid[i], counts[i] - grid[i]);
    states[i] = s;
    const std::uint64_t counter = step_site(step, i);
    const double coin = uniform01(seed, stream::kQAction, counter);
    int a;
    if (uniform01(seed, stream::kQExplore, counter) < config.epsilon) {
      a = coin < 0.5 ? 0 : 1;
    } else if (table.at(s, 0) == table.at(s, 1)) {
      a = coin < 0.5 ? 0 : 1;
    } else {
      a = table.at(s, 0) > table.at(s, 1) ? 0 : 1;
    }
    actions[i] = a == 0 ? 1 : 0;
  }

  QStepResult out{apply_actions(grid, actions), tables, 0.0};
  const PayoffGrid payoff = kernels::payoff_field(out.grid, enhancement);
  const auto next_counts = kernels::focal_counts(out.grid);
  double reward_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    QTable& table = table_for(out.tables, i);
    const int next_state = QTable::state_index(out.grid[i], next_counts[i] - out.grid[i]);
    const int a = action_index(actions[i]);
    double& q = table.at(states[i], a);
    q += config.alpha * (payoff.values[i] + config.gamma * table.max_value(next_state) - q);
    reward_sum += payoff.values[i];
  }
  out.mean_reward = reward_sum / static_cast<double>(n);
  return out;
}

Trajectory run_qlearning(const LatticeConfig& lattice, const QConfig& config,
                         const StepObserver& observer, QTables* final_tables) {
  lattice.validate();
  config.validate();
  StrategyGrid grid = init_grid(lattice);
  QTables tables = make_qtables(grid.size(), config.shared_table);
  Trajectory traj;
  if (observer) observer(0, grid);
  traj.push_back({0, coop_fraction(grid), 0.0, 0.0, 0.0, 0.0});
  for (std::size_t t = 0; t < config.steps; ++t) {
    QStepResult res = q_step(grid, tables, config, lattice.enhancement, lattice.seed, t);
    grid = std::move(res.grid);
    tables = std::move(res.tables);
    traj.push_back({t + 1, coop_fraction(grid), res.mean_reward, 0.0, 0.0, 0.0});
    if (observer) observer(t + 1, grid);
  }
  if (final_tables) *final_tables = std::move(tables);
  return traj;
}

}  // namespace spgg
