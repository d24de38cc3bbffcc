#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spgg/lattice.hpp"
#include "spgg/nn.hpp"

namespace spgg {

enum class Algorithm { MappoLcr, Mappo, Ppo, QLearning, Fermi };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& text);

struct TrainConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double entropy_weight = 0.001;
  double value_weight = 0.5;
  double lr = 1e-3;
  std::size_t iterations = 1000;
  std::size_t ppo_epochs = 4;
  std::size_t rollout_length = 1;
  int actor_hidden1 = 64;
  int actor_hidden2 = 64;
  int critic_hidden1 = 128;
  int critic_hidden2 = 64;
  /// Standardize advantages over each rollout batch before the policy loss.
  bool normalize_advantages = true;

  void validate() const;
};

/// Centralized: one value per global state, computed from vec(S_t).
/// Local: one value per agent, computed from its 3-feature observation.
enum class CriticMode { Centralized, Local };

/// Actor input (x, n/5, g).
Eigen::VectorXd actor_input(const ObservationRecord& obs);

/// Centralized critic input vec(S_t) as 0/1 doubles.
Eigen::VectorXd critic_input(const StrategyGrid& grid);

/// Softmax index of a strategy: 0 = cooperate, 1 = defect.
inline int action_index(std::uint8_t strategy) { return strategy == 1 ? 0 : 1; }

struct ActorCritic {
  nn::Mlp3 actor;
  nn::Mlp3 critic;
  CriticMode mode = CriticMode::Centralized;

  /// Seeded fan-in initialization; the critic input width is L^2 for the
  /// centralized critic and 3 for the local critic.
  static ActorCritic create(std::size_t side, const TrainConfig& config, CriticMode mode,
                            std::uint64_t seed);

  /// (P(C), P(D)).
  Eigen::VectorXd policy(const ObservationRecord& obs) const;
};

/// Transitions for `steps` environment steps over all agents. Per-agent
/// arrays are indexed [t * agents + i].
struct RolloutBuffer {
  std::size_t steps = 0;
  std::size_t agents = 0;
  std::vector<ObservationRecord> observations;
  std::vector<std::uint8_t> actions;  // 1 = cooperate
  std::vector<double> old_log_probs;
  std::vector<double> rewards;
  std::vector<StrategyGrid> states;   // S_t, one per step
  StrategyGrid final_state;           // state after the last step
  // Values have `value_width` entries per step: 1 for a centralized critic,
  // `agents` for a local critic.
  std::size_t value_width = 1;
  std::vector<double> values;
  std::vector<double> bootstrap_values;

  double value(std::size_t t, std::size_t i) const {
    return values[t * value_width + (value_width == 1 ? 0 : i)];
  }
  double next_value(std::size_t t, std::size_t i) const;

  /// Throws std::invalid_argument if any array has the wrong length.
  void validate() const;
};

struct AdvantageBatch {
  std::size_t steps = 0;
  std::size_t agents = 0;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// GAE by backward recursion. Throws std::invalid_argument when the
/// bootstrap values are missing.
AdvantageBatch compute_gae(const RolloutBuffer& buffer, double gamma, double lambda);

/// Rescales advantages to zero mean and unit variance (returns untouched).
void normalize_advantages(AdvantageBatch& batch);

/// -mean(min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)).
double ppo_clip_loss(std::span<const double> new_log_probs, std::span<const double> old_log_probs,
                     std::span<const double> advantages, double clip_epsilon);

/// Mean squared error.
double value_loss(std::span<const double> predicted, std::span<const double> returns);

double combined_loss(double policy_loss, double value_loss, double entropy, double value_weight,
                     double entropy_weight);

struct LossTerms {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

struct LossGradients {
  nn::MlpGradients actor;
  nn::MlpGradients critic;
};

/// Full objective and its parameter gradients. Actor passes run once per
/// distinct observation in a step; per-agent terms are computed in parallel
/// and folded into per-observation logit gradients in site order.
/// `grads` may be null when only the loss is wanted.
LossTerms evaluate_loss(const ActorCritic& nets, const RolloutBuffer& buffer,
                        const AdvantageBatch& batch, const TrainConfig& config,
                        LossGradients* grads);

namespace reference {
/// Serial per-agent forward/backward version of evaluate_loss.
LossTerms evaluate_loss(const ActorCritic& nets, const RolloutBuffer& buffer,
                        const AdvantageBatch& batch, const TrainConfig& config,
                        LossGradients* grads);
}  // namespace reference

struct TrajectoryRow {
  std::size_t iteration = 0;
  double coop_fraction = 0.0;
  double mean_reward = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

using Trajectory = std::vector<TrajectoryRow>;

/// Called with the step index and grid: once for the initial grid (step 0)
/// and after every environment step.
using StepObserver = std::function<void(std::size_t, const StrategyGrid&)>;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Lcr weight actually used by an algorithm: the configured value for
/// MAPPO-LCR, zero for everything else.
double effective_lcr_weight(Algorithm algo, const LatticeConfig& lattice);

/// Actor-critic training on the lattice (MAPPO-LCR, MAPPO or independent PPO).
class Trainer {
 public:
  Trainer(LatticeConfig lattice, TrainConfig config, Algorithm algo);

  const StrategyGrid& grid() const { return grid_; }
  const ActorCritic& networks() const { return nets_; }
  ActorCritic& networks() { return nets_; }
  std::size_t env_step() const { return env_step_; }
  double lcr_weight() const { return lcr_weight_; }

  /// Actor then critic, each with its optimizer state.
  std::vector<nn::NetworkState> checkpoint_state() const;

  /// Samples `steps` synchronous environment steps and advances the grid.
  RolloutBuffer collect_rollout(std::size_t steps);

  /// K optimizer epochs over one rollout; returns the first epoch's loss.
  LossTerms update(const RolloutBuffer& buffer);

  /// Runs all iterations; the first trajectory row is the initial grid.
  Trajectory run(const StepObserver& observer = {});

 private:
  LatticeConfig lattice_;
  TrainConfig config_;
  Algorithm algo_;
  double lcr_weight_;
  StrategyGrid grid_;
  ActorCritic nets_;
  nn::AdamState actor_adam_;
  nn::AdamState critic_adam_;
  std::size_t env_step_ = 0;
};

struct TrainResult {
  Trajectory trajectory;
  ActorCritic networks;
  StrategyGrid final_grid;
  std::vector<nn::NetworkState> checkpoint;
};

/// Trains MAPPO-LCR or plain MAPPO (or PPO) from the configured initial grid.
TrainResult train(const LatticeConfig& lattice, const TrainConfig& config, Algorithm algo,
                  const StepObserver& observer = {});

}  // namespace spgg
