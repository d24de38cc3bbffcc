#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "spgg/mappo.hpp"

namespace fd {

struct Report {
  std::size_t components = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;
};

inline std::vector<double*> params(spgg::nn::Mlp3& net) {
  std::vector<double*> out;
  for (auto& layer : net.layers()) {
    for (Eigen::Index k = 0; k < layer.weights.size(); ++k) out.push_back(layer.weights.data() + k);
    for (Eigen::Index k = 0; k < layer.biases.size(); ++k) out.push_back(layer.biases.data() + k);
  }
  return out;
}

inline std::vector<double> values(const spgg::nn::MlpGradients& g) {
  std::vector<double> out;
  for (const auto& layer : g.layers) {
    out.insert(out.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
    out.insert(out.end(), layer.biases.data(), layer.biases.data() + layer.biases.size());
  }
  return out;
}

// Central differences of the total loss against the analytic gradient, per
// component: |a - fd| <= tol * max(|a|, |fd|) with an absolute floor.
inline Report check_loss_gradient(spgg::ActorCritic nets, const spgg::RolloutBuffer& buffer,
                                  const spgg::AdvantageBatch& batch, const spgg::TrainConfig& cfg,
                                  double step = 1e-5, double tol = 1e-4, double floor = 1e-7) {
  spgg::LossGradients grads;
  spgg::evaluate_loss(nets, buffer, batch, cfg, &grads);
  Report rep;
  auto sweep = [&](spgg::nn::Mlp3& net, const spgg::nn::MlpGradients& g) {
    const auto analytic = values(g);
    const auto ps = params(net);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double keep = *ps[k];
      *ps[k] = keep + step;
      const double up = spgg::evaluate_loss(nets, buffer, batch, cfg, nullptr).total;
      *ps[k] = keep - step;
      const double down = spgg::evaluate_loss(nets, buffer, batch, cfg, nullptr).total;
      *ps[k] = keep;
      const double numeric = (up - down) / (2.0 * step);
      const double scale = std::max(std::abs(analytic[k]), std::abs(numeric));
      const double err = std::abs(analytic[k] - numeric);
      ++rep.components;
      if (scale > floor) rep.worst_rel = std::max(rep.worst_rel, err / scale);
      if (err > std::max(floor, tol * scale)) ++rep.failures;
    }
  };
  sweep(nets.actor, grads.actor);
  sweep(nets.critic, grads.critic);
  return rep;
}

}  // namespace fd
