#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spgg::nn {

/// Floor applied to probabilities before taking logs.
inline constexpr double kProbFloor = 1e-10;

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;   // out

  bool same_shape(const DenseLayer& other) const {
    return weights.rows() == other.weights.rows() && weights.cols() == other.weights.cols() &&
           biases.size() == other.biases.size();
  }
};

enum class Head { Softmax, Identity };

/// Layer widths: input -> hidden1 -> hidden2 -> output.
struct MlpShape {
  int input = 3;
  int hidden1 = 64;
  int hidden2 = 64;
  int output = 2;
};

/// Activations kept from a forward pass for the backward pass.
struct ForwardCache {
  Eigen::VectorXd input;
  Eigen::VectorXd hidden1;  // post-ReLU
  Eigen::VectorXd hidden2;  // post-ReLU
  bool filled = false;
};

/// Gradient buffers with the same layout as the network parameters.
struct MlpGradients {
  std::array<DenseLayer, 3> layers;

  void set_zero();
  MlpGradients& operator+=(const MlpGradients& other);
};

/// FC -> ReLU -> FC -> ReLU -> FC, followed by an optional softmax head.
class Mlp3 {
 public:
  Mlp3() = default;
  /// All-zero parameters.
  Mlp3(MlpShape shape, Head head);

  /// Fan-in scaled uniform weights in +-sqrt(6 / fan_in), zero biases.
  static Mlp3 random(MlpShape shape, Head head, std::mt19937_64& rng);

  const MlpShape& shape() const { return shape_; }
  Head head() const { return head_; }
  std::array<DenseLayer, 3>& layers() { return layers_; }
  const std::array<DenseLayer, 3>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  /// Output of the last linear layer (logits for a softmax head).
  Eigen::VectorXd logits(const Eigen::VectorXd& input) const;
  Eigen::VectorXd logits(const Eigen::VectorXd& input, ForwardCache& cache) const;

  /// Head applied to the logits.
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

  MlpGradients zero_gradients() const;

  /// Accumulates into `grads` the parameter gradients given dLoss/dlogits.
  /// Throws std::logic_error if `cache` was not filled by a forward pass.
  void backward(const ForwardCache& cache, const Eigen::VectorXd& grad_logits,
                MlpGradients& grads) const;

  bool all_finite() const;

 private:
  void check_input(const Eigen::VectorXd& input) const;

  MlpShape shape_{};
  Head head_ = Head::Identity;
  std::array<DenseLayer, 3> layers_;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Log-softmax with each log-probability floored at log(kProbFloor).
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

/// -sum p log p, with p floored at kProbFloor inside the log.
double categorical_entropy(std::span<const double> probs);

/// d entropy / d logits for a softmax distribution.
Eigen::VectorXd entropy_logit_gradient(const Eigen::VectorXd& probs);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam moments for one network.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const Mlp3& net, AdamConfig config);

  /// Applies one update to `net`. Throws std::invalid_argument on shape mismatch.
  void step(Mlp3& net, const MlpGradients& grads);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_count_; }
  const std::array<DenseLayer, 3>& first_moment() const { return first_; }
  const std::array<DenseLayer, 3>& second_moment() const { return second_; }

 private:
  friend struct CheckpointAccess;
  AdamConfig config_{};
  std::uint64_t step_count_ = 0;
  std::array<DenseLayer, 3> first_;
  std::array<DenseLayer, 3> second_;
};

/// A network together with its optimizer state.
struct NetworkState {
  Mlp3 net;
  AdamState adam;
};

// Checkpoint layout (little-endian):
//   8 bytes  magic "SPGGCKPT"
//   u32      format version (1)
//   u32      network count
//   per network:
//     u32 head (0 softmax, 1 identity)
//     4 x u64 widths input, hidden1, hidden2, output
//     parameters: for each layer, weights row-major then biases, f64
//     u64 adam step count; f64 lr, beta1, beta2, epsilon
//     first moment, then second moment, same layout as the parameters
void write_checkpoint(std::ostream& out, std::span<const NetworkState> networks);
std::vector<NetworkState> read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, std::span<const NetworkState> networks);
std::vector<NetworkState> load_checkpoint(const std::string& path);

}  // namespace spgg::nn
