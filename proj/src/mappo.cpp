#include "spgg/mappo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>

#include "spgg/kernels.hpp"
#include "spgg/rng.hpp"

namespace spgg {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::MappoLcr: return "mappo_lcr";
    case Algorithm::Mappo: return "mappo";
    case Algorithm::Ppo: return "ppo";
    case Algorithm::QLearning: return "qlearning";
    case Algorithm::Fermi: return "fermi";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "mappo_lcr" || text == "mappo-lcr" || text == "lcr") return Algorithm::MappoLcr;
  if (text == "mappo") return Algorithm::Mappo;
  if (text == "ppo") return Algorithm::Ppo;
  if (text == "qlearning" || text == "q") return Algorithm::QLearning;
  if (text == "fermi") return Algorithm::Fermi;
  throw std::invalid_argument("unknown algorithm: " + text);
}

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw std::invalid_argument("clip epsilon must be > 0");
  if (!(entropy_weight >= 0.0)) throw std::invalid_argument("entropy weight must be >= 0");
  if (!(value_weight >= 0.0)) throw std::invalid_argument("value weight must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (ppo_epochs < 1) throw std::invalid_argument("ppo epochs must be >= 1");
  if (rollout_length < 1) throw std::invalid_argument("rollout length must be >= 1");
}

Eigen::VectorXd actor_input(const ObservationRecord& obs) {
  Eigen::VectorXd v(3);
  v << static_cast<double>(obs.own_strategy), obs.focal_coop_count / 5.0, obs.global_coop_ratio;
  return v;
}

Eigen::VectorXd critic_input(const StrategyGrid& grid) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) z(static_cast<Eigen::Index>(i)) = grid[i];
  return z;
}

ActorCritic ActorCritic::create(std::size_t side, const TrainConfig& config, CriticMode mode,
                                std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x6e6574776f726bULL));
  ActorCritic ac;
  ac.mode = mode;
  ac.actor = nn::Mlp3::random({3, config.actor_hidden1, config.actor_hidden2, 2}, nn::Head::Softmax, rng);
  const int critic_in = mode == CriticMode::Centralized ? static_cast<int>(side * side) : 3;
  ac.critic = nn::Mlp3::random({critic_in, config.critic_hidden1, config.critic_hidden2, 1},
                               nn::Head::Identity, rng);
  return ac;
}

Eigen::VectorXd ActorCritic::policy(const ObservationRecord& obs) const {
  return actor.forward(actor_input(obs));
}

double RolloutBuffer::next_value(std::size_t t, std::size_t i) const {
  if (t + 1 < steps) return value(t + 1, i);
  return bootstrap_values[value_width == 1 ? 0 : i];
}

void RolloutBuffer::validate() const {
  const std::size_t n = steps * agents;
  if (observations.size() != n || actions.size() != n || old_log_probs.size() != n ||
      rewards.size() != n)
    throw std::invalid_argument("rollout buffer: per-agent arrays must have steps*agents entries");
  if (value_width != 1 && value_width != agents)
    throw std::invalid_argument("rollout buffer: value width must be 1 or the agent count");
  if (values.size() != steps * value_width)
    throw std::invalid_argument("rollout buffer: values must have steps*value_width entries");
}

AdvantageBatch compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  buffer.validate();
  if (buffer.bootstrap_values.size() != buffer.value_width)
    throw std::invalid_argument("compute_gae: bootstrap value missing");
  AdvantageBatch out;
  out.steps = buffer.steps;
  out.agents = buffer.agents;
  out.advantages.assign(buffer.steps * buffer.agents, 0.0);
  out.returns.assign(buffer.steps * buffer.agents, 0.0);
  const std::size_t n = buffer.agents;
  for (std::size_t i = 0; i < n; ++i) {
    double running = 0.0;
    for (std::size_t t = buffer.steps; t-- > 0;) {
      const std::size_t k = t * n + i;
      const double v = buffer.value(t, i);
      const double delta = buffer.rewards[k] + gamma * buffer.next_value(t, i) - v;
      running = delta + gamma * lambda * running;
      out.advantages[k] = running;
      out.returns[k] = running + v;
    }
  }
  return out;
}

void normalize_advantages(AdvantageBatch& batch) {
  auto& a = batch.advantages;
  if (a.empty()) return;
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  var /= static_cast<double>(a.size());
  const double denom = std::sqrt(var) + 1e-8;
  for (double& x : a) x = (x - mean) / denom;
}

namespace {

struct ClipTerm {
  double value;       // min(ratio * A, clip(ratio) * A)
  double d_log_prob;  // derivative of `value` w.r.t. the new log-probability
};

ClipTerm clip_term(double new_lp, double old_lp, double adv, double eps) {
  const double ratio = std::exp(new_lp - old_lp);
  if (adv >= 0.0) {
    const bool active = ratio <= 1.0 + eps;
    return {adv * std::min(ratio, 1.0 + eps), active ? ratio * adv : 0.0};
  }
  const bool active = ratio >= 1.0 - eps;
  return {adv * std::max(ratio, 1.0 - eps), active ? ratio * adv : 0.0};
}

// d log p_a / d logits, zero when the floor is active.
Eigen::VectorXd log_prob_gradient(const Eigen::VectorXd& probs, int action) {
  Eigen::VectorXd g = -probs;
  g(action) += 1.0;
  if (probs(action) < nn::kProbFloor) g.setZero();
  return g;
}

constexpr int kObsKeys = 12;

int obs_key(const ObservationRecord& o) { return o.own_strategy * 6 + o.focal_coop_count; }

struct KeyedPass {
  std::array<bool, kObsKeys> present{};
  std::array<nn::ForwardCache, kObsKeys> cache;
  std::array<Eigen::VectorXd, kObsKeys> out;  // logits
};

// One forward pass per distinct observation among `obs`.
void forward_by_key(const nn::Mlp3& net, std::span<const ObservationRecord> obs, KeyedPass& pass) {
  pass.present.fill(false);
  for (const auto& o : obs) {
    const int k = obs_key(o);
    if (pass.present[k]) continue;
    pass.present[k] = true;
    pass.out[k] = net.logits(actor_input(o), pass.cache[k]);
  }
}

void check_finite_inputs(std::span<const double> a, const char* what) {
  for (double x : a)
    if (std::isnan(x)) throw std::invalid_argument(std::string("NaN in ") + what);
}

}  // namespace

double ppo_clip_loss(std::span<const double> new_log_probs, std::span<const double> old_log_probs,
                     std::span<const double> advantages, double clip_epsilon) {
  if (new_log_probs.size() != old_log_probs.size() || new_log_probs.size() != advantages.size())
    throw std::invalid_argument("ppo_clip_loss: arrays differ in length");
  if (new_log_probs.empty()) throw std::invalid_argument("ppo_clip_loss: empty batch");
  if (!(clip_epsilon > 0.0)) throw std::invalid_argument("ppo_clip_loss: clip epsilon must be > 0");
  check_finite_inputs(new_log_probs, "new log-probabilities");
  check_finite_inputs(old_log_probs, "old log-probabilities");
  check_finite_inputs(advantages, "advantages");
  double sum = 0.0;
  for (std::size_t k = 0; k < advantages.size(); ++k)
    sum += clip_term(new_log_probs[k], old_log_probs[k], advantages[k], clip_epsilon).value;
  return -sum / static_cast<double>(advantages.size());
}

double value_loss(std::span<const double> predicted, std::span<const double> returns) {
  if (predicted.size() != returns.size() || predicted.empty())
    throw std::invalid_argument("value_loss: arrays must be non-empty and equal length");
  double sum = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double d = predicted[k] - returns[k];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

double combined_loss(double policy_loss, double value_loss, double entropy, double value_weight,
                     double entropy_weight) {
  return policy_loss + value_weight * value_loss - entropy_weight * entropy;
}

namespace {

void prepare_gradients(const ActorCritic& nets, LossGradients* grads) {
  if (!grads) return;
  auto reset = [](const nn::Mlp3& net, nn::MlpGradients& g) {
    bool same = true;
    for (std::size_t k = 0; k < 3; ++k) same = same && g.layers[k].same_shape(net.layers()[k]);
    if (same) {
      g.set_zero();
    } else {
      g = net.zero_gradients();
    }
  };
  reset(nets.actor, grads->actor);
  reset(nets.critic, grads->critic);
}

double step_mean_return(const AdvantageBatch& batch, std::size_t t) {
  double s = 0.0;
  for (std::size_t i = 0; i < batch.agents; ++i) s += batch.returns[t * batch.agents + i];
  return s / static_cast<double>(batch.agents);
}

// Centralized value loss for one step; shared by both loss implementations.
double centralized_value_step(const ActorCritic& nets, const RolloutBuffer& buffer,
                              const AdvantageBatch& batch, std::size_t t,
                              const TrainConfig& config, LossGradients* grads) {
  nn::ForwardCache cache;
  const double v = nets.critic.logits(critic_input(buffer.states[t]), cache)(0);
  const double diff = v - step_mean_return(batch, t);
  if (grads) {
    Eigen::VectorXd g(1);
    g(0) = config.value_weight * 2.0 * diff / static_cast<double>(buffer.steps);
    nets.critic.backward(cache, g, grads->critic);
  }
  return diff * diff;
}

void check_batch(const RolloutBuffer& buffer, const AdvantageBatch& batch) {
  buffer.validate();
  if (batch.steps != buffer.steps || batch.agents != buffer.agents ||
      batch.advantages.size() != buffer.steps * buffer.agents ||
      batch.returns.size() != batch.advantages.size())
    throw std::invalid_argument("advantage batch does not match rollout buffer");
  if (buffer.steps == 0 || buffer.agents == 0) throw std::invalid_argument("empty rollout buffer");
}

}  // namespace

LossTerms evaluate_loss(const ActorCritic& nets, const RolloutBuffer& buffer,
                        const AdvantageBatch& batch, const TrainConfig& config,
                        LossGradients* grads) {
  check_batch(buffer, batch);
  prepare_gradients(nets, grads);
  const std::size_t n = buffer.agents;
  const double scale = 1.0 / static_cast<double>(buffer.steps * n);
  const double eps = config.clip_epsilon;

  double policy_sum = 0.0;
  double entropy_sum = 0.0;
  double value_sum = 0.0;

  std::vector<ClipTerm> terms(n);
  std::vector<int> keys(n);
  KeyedPass actor_pass;
  KeyedPass critic_pass;

  for (std::size_t t = 0; t < buffer.steps; ++t) {
    const std::span<const ObservationRecord> obs(buffer.observations.data() + t * n, n);
    forward_by_key(nets.actor, obs, actor_pass);
    std::array<Eigen::VectorXd, kObsKeys> probs;
    std::array<Eigen::VectorXd, kObsKeys> logp;
    std::array<double, kObsKeys> entropy{};
    for (int k = 0; k < kObsKeys; ++k) {
      if (!actor_pass.present[k]) continue;
      probs[k] = nn::softmax(actor_pass.out[k]);
      logp[k] = nn::log_softmax(actor_pass.out[k]);
      entropy[k] = nn::categorical_entropy({probs[k].data(), 2});
    }

    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for if (count >= 1024)
    for (std::int64_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const std::size_t k = t * n + i;
      const int key = obs_key(obs[i]);
      keys[i] = key;
      terms[i] = clip_term(logp[key](action_index(buffer.actions[k])), buffer.old_log_probs[k],
                           batch.advantages[k], eps);
    }

    // Fold per-agent terms in site order.
    std::array<std::array<double, 2>, kObsKeys> coef{};
    std::array<double, kObsKeys> members{};
    for (std::size_t i = 0; i < n; ++i) {
      policy_sum += terms[i].value;
      entropy_sum += entropy[keys[i]];
      coef[keys[i]][action_index(buffer.actions[t * n + i])] += terms[i].d_log_prob;
      members[keys[i]] += 1.0;
    }

    if (grads) {
      for (int k = 0; k < kObsKeys; ++k) {
        if (!actor_pass.present[k]) continue;
        Eigen::VectorXd g = -scale * coef[k][0] * log_prob_gradient(probs[k], 0) -
                            scale * coef[k][1] * log_prob_gradient(probs[k], 1) -
                            config.entropy_weight * scale * members[k] *
                                nn::entropy_logit_gradient(probs[k]);
        nets.actor.backward(actor_pass.cache[k], g, grads->actor);
      }
    }

    if (nets.mode == CriticMode::Centralized) {
      value_sum += centralized_value_step(nets, buffer, batch, t, config, grads);
    } else {
      forward_by_key(nets.critic, obs, critic_pass);
      std::array<double, kObsKeys> vcoef{};
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = critic_pass.out[keys[i]](0) - batch.returns[t * n + i];
        value_sum += diff * diff;
        vcoef[keys[i]] += 2.0 * diff;
      }
      if (grads) {
        for (int k = 0; k < kObsKeys; ++k) {
          if (!critic_pass.present[k]) continue;
          Eigen::VectorXd g(1);
          g(0) = config.value_weight * scale * vcoef[k];
          nets.critic.backward(critic_pass.cache[k], g, grads->critic);
        }
      }
    }
  }

  LossTerms out;
  out.policy = -policy_sum * scale;
  out.entropy = entropy_sum * scale;
  out.value = nets.mode == CriticMode::Centralized ? value_sum / static_cast<double>(buffer.steps)
                                                   : value_sum * scale;
  out.total = combined_loss(out.policy, out.value, out.entropy, config.value_weight,
                            config.entropy_weight);
  return out;
}

namespace reference {

LossTerms evaluate_loss(const ActorCritic& nets, const RolloutBuffer& buffer,
                        const AdvantageBatch& batch, const TrainConfig& config,
                        LossGradients* grads) {
  check_batch(buffer, batch);
  prepare_gradients(nets, grads);
  const std::size_t n = buffer.agents;
  const double scale = 1.0 / static_cast<double>(buffer.steps * n);

  double policy_sum = 0.0;
  double entropy_sum = 0.0;
  double value_sum = 0.0;
  nn::ForwardCache cache;

  for (std::size_t t = 0; t < buffer.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = t * n + i;
      const Eigen::VectorXd input = actor_input(buffer.observations[k]);
      const Eigen::VectorXd logits = nets.actor.logits(input, cache);
      const Eigen::VectorXd probs = nn::softmax(logits);
      const Eigen::VectorXd logp = nn::log_softmax(logits);
      const int a = action_index(buffer.actions[k]);
      const ClipTerm term = clip_term(logp(a), buffer.old_log_probs[k], batch.advantages[k],
                                      config.clip_epsilon);
      policy_sum += term.value;
      entropy_sum += nn::categorical_entropy({probs.data(), 2});
      if (grads) {
        Eigen::VectorXd g = -scale * term.d_log_prob * log_prob_gradient(probs, a) -
                            config.entropy_weight * scale * nn::entropy_logit_gradient(probs);
        nets.actor.backward(cache, g, grads->actor);
      }
      if (nets.mode == CriticMode::Local) {
        const double diff =
            nets.critic.logits(actor_input(buffer.observations[k]), cache)(0) - batch.returns[k];
        value_sum += diff * diff;
        if (grads) {
          Eigen::VectorXd g(1);
          g(0) = config.value_weight * scale * 2.0 * diff;
          nets.critic.backward(cache, g, grads->critic);
        }
      }
    }
    if (nets.mode == CriticMode::Centralized)
      value_sum += centralized_value_step(nets, buffer, batch, t, config, grads);
  }

  LossTerms out;
  out.policy = -policy_sum * scale;
  out.entropy = entropy_sum * scale;
  out.value = nets.mode == CriticMode::Centralized ? value_sum / static_cast<double>(buffer.steps)
                                                   : value_sum * scale;
  out.total = combined_loss(out.policy, out.value, out.entropy, config.value_weight,
                            config.entropy_weight);
  return out;
}

}  // namespace reference

double effective_lcr_weight(Algorithm algo, const LatticeConfig& lattice) {
  return algo == Algorithm::MappoLcr ? lattice.lcr_weight : 0.0;
}

Trainer::Trainer(LatticeConfig lattice, TrainConfig config, Algorithm algo)
    : lattice_(lattice), config_(config), algo_(algo) {
  lattice_.validate();
  config_.validate();
  if (algo != Algorithm::MappoLcr && algo != Algorithm::Mappo && algo != Algorithm::Ppo)
    throw std::invalid_argument("Trainer handles mappo_lcr, mappo and ppo only");
  lcr_weight_ = effective_lcr_weight(algo, lattice_);
  grid_ = init_grid(lattice_);
  const CriticMode mode = algo == Algorithm::Ppo ? CriticMode::Local : CriticMode::Centralized;
  nets_ = ActorCritic::create(lattice_.side, config_, mode, lattice_.seed);
  actor_adam_ = nn::AdamState(nets_.actor, {config_.lr});
  critic_adam_ = nn::AdamState(nets_.critic, {config_.lr});
}

RolloutBuffer Trainer::collect_rollout(std::size_t steps) {
  const std::size_t n = grid_.size();
  RolloutBuffer buf;
  buf.steps = steps;
  buf.agents = n;
  buf.value_width = nets_.mode == CriticMode::Centralized ? 1 : n;
  buf.observations.reserve(steps * n);
  buf.actions.resize(steps * n);
  buf.old_log_probs.resize(steps * n);
  buf.rewards.resize(steps * n);
  buf.values.reserve(steps * buf.value_width);

  KeyedPass pass;
  auto append_values = [&](const StrategyGrid& g, std::span<const ObservationRecord> obs,
                           std::vector<double>& dst) {
    if (nets_.mode == CriticMode::Centralized) {
      dst.push_back(nets_.critic.logits(critic_input(g))(0));
      return;
    }
    forward_by_key(nets_.critic, obs, pass);
    for (const auto& o : obs) dst.push_back(pass.out[obs_key(o)](0));
  };

  for (std::size_t s = 0; s < steps; ++s) {
    const auto obs = kernels::observation_field(grid_);
    KeyedPass actor_pass;
    forward_by_key(nets_.actor, obs, actor_pass);
    std::array<Eigen::VectorXd, kObsKeys> probs;
    std::array<Eigen::VectorXd, kObsKeys> logp;
    for (int k = 0; k < kObsKeys; ++k) {
      if (!actor_pass.present[k]) continue;
      probs[k] = nn::softmax(actor_pass.out[k]);
      logp[k] = nn::log_softmax(actor_pass.out[k]);
    }

    std::vector<std::uint8_t> actions(n);
    const auto count = static_cast<std::int64_t>(n);
    const std::uint64_t seed = lattice_.seed;
    const std::uint64_t step = env_step_;
#pragma omp parallel for if (count >= 1024)
    for (std::int64_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const int key = obs_key(obs[i]);
      const double u = uniform01(seed, stream::kActionSample, step_site(step, i));
      const std::uint8_t a = u < probs[key](0) ? 1 : 0;
      actions[i] = a;
      buf.old_log_probs[s * n + i] = logp[key](action_index(a));
    }

    append_values(grid_, obs, buf.values);
    buf.states.push_back(grid_);
    buf.observations.insert(buf.observations.end(), obs.begin(), obs.end());
    std::copy(actions.begin(), actions.end(), buf.actions.begin() + static_cast<std::ptrdiff_t>(s * n));

    grid_ = apply_actions(grid_, actions);
    const auto rewards = kernels::reward_field(grid_, lattice_.enhancement, lcr_weight_);
    for (std::size_t i = 0; i < n; ++i) buf.rewards[s * n + i] = rewards[i].total;
    ++env_step_;
  }

  buf.final_state = grid_;
  if (nets_.mode == CriticMode::Centralized) {
    append_values(grid_, {}, buf.bootstrap_values);
  } else {
    const auto obs = kernels::observation_field(grid_);
    append_values(grid_, obs, buf.bootstrap_values);
  }
  return buf;
}

LossTerms Trainer::update(const RolloutBuffer& buffer) {
  AdvantageBatch batch = compute_gae(buffer, config_.gamma, config_.gae_lambda);
  if (config_.normalize_advantages) normalize_advantages(batch);
  LossGradients grads;
  LossTerms first;
  for (std::size_t epoch = 0; epoch < config_.ppo_epochs; ++epoch) {
    const LossTerms terms = evaluate_loss(nets_, buffer, batch, config_, &grads);
    if (!std::isfinite(terms.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << env_step_ << " (policy " << terms.policy << ", value "
          << terms.value << ", entropy " << terms.entropy << ")";
      throw DivergenceError(env_step_, msg.str());
    }
    if (epoch == 0) first = terms;
    actor_adam_.step(nets_.actor, grads.actor);
    critic_adam_.step(nets_.critic, grads.critic);
  }
  if (!nets_.actor.all_finite() || !nets_.critic.all_finite())
    throw DivergenceError(env_step_, "non-finite network parameters at step " + std::to_string(env_step_));
  return first;
}

Trajectory Trainer::run(const StepObserver& observer) {
  Trajectory traj;
  if (observer) observer(env_step_, grid_);
  traj.push_back({env_step_, coop_fraction(grid_), 0.0, 0.0, 0.0, 0.0});
  for (std::size_t it = 0; it < config_.iterations; ++it) {
    const std::size_t start = env_step_;
    const RolloutBuffer buf = collect_rollout(config_.rollout_length);
    const LossTerms terms = update(buf);
    const std::size_t n = buf.agents;
    for (std::size_t s = 0; s < buf.steps; ++s) {
      const StrategyGrid& next = s + 1 < buf.steps ? buf.states[s + 1] : buf.final_state;
      double reward = 0.0;
      for (std::size_t i = 0; i < n; ++i) reward += buf.rewards[s * n + i];
      traj.push_back({start + s + 1, coop_fraction(next), reward / static_cast<double>(n),
                      terms.policy, terms.value, terms.entropy});
      if (observer) observer(start + s + 1, next);
    }
  }
  return traj;
}

std::vector<nn::NetworkState> Trainer::checkpoint_state() const {
  return {nn::NetworkState{nets_.actor, actor_adam_}, nn::NetworkState{nets_.critic, critic_adam_}};
}

TrainResult train(const LatticeConfig& lattice, const TrainConfig& config, Algorithm algo,
                  const StepObserver& observer) {
  Trainer trainer(lattice, config, algo);
  TrainResult out;
  out.trajectory = trainer.run(observer);
  out.networks = trainer.networks();
  out.final_grid = trainer.grid();
  out.checkpoint = trainer.checkpoint_state();
  return out;
}

}  // namespace spgg
