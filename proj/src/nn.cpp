#include "spgg/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace spgg::nn {

namespace {

DenseLayer zero_layer(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

std::array<DenseLayer, 3> zero_layers(const MlpShape& s) {
  return {zero_layer(s.hidden1, s.input), zero_layer(s.hidden2, s.hidden1),
          zero_layer(s.output, s.hidden2)};
}

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

Eigen::VectorXd relu_mask(const Eigen::VectorXd& activated) {
  return (activated.array() > 0.0).cast<double>().matrix();
}

}  // namespace

void MlpGradients::set_zero() {
  for (auto& l : layers) {
    l.weights.setZero();
    l.biases.setZero();
  }
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weights += other.layers[k].weights;
    layers[k].biases += other.layers[k].biases;
  }
  return *this;
}

Mlp3::Mlp3(MlpShape shape, Head head) : shape_(shape), head_(head), layers_(zero_layers(shape)) {
  if (shape.input < 1 || shape.hidden1 < 1 || shape.hidden2 < 1 || shape.output < 1)
    throw std::invalid_argument("network widths must be positive");
}

Mlp3 Mlp3::random(MlpShape shape, Head head, std::mt19937_64& rng) {
  Mlp3 net(shape, head);
  for (auto& layer : net.layers_) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
  }
  return net;
}

std::size_t Mlp3::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
  return n;
}

void Mlp3::check_input(const Eigen::VectorXd& input) const {
  if (input.size() != shape_.input)
    throw std::invalid_argument("network input has " + std::to_string(input.size()) +
                                " entries, expected " + std::to_string(shape_.input));
}

Eigen::VectorXd Mlp3::logits(const Eigen::VectorXd& input) const {
  check_input(input);
  Eigen::VectorXd h1 = relu(layers_[0].weights * input + layers_[0].biases);
  Eigen::VectorXd h2 = relu(layers_[1].weights * h1 + layers_[1].biases);
  return layers_[2].weights * h2 + layers_[2].biases;
}

Eigen::VectorXd Mlp3::logits(const Eigen::VectorXd& input, ForwardCache& cache) const {
  check_input(input);
  cache.input = input;
  cache.hidden1 = relu(layers_[0].weights * input + layers_[0].biases);
  cache.hidden2 = relu(layers_[1].weights * cache.hidden1 + layers_[1].biases);
  cache.filled = true;
  return layers_[2].weights * cache.hidden2 + layers_[2].biases;
}

Eigen::VectorXd Mlp3::forward(const Eigen::VectorXd& input) const {
  Eigen::VectorXd out = logits(input);
  return head_ == Head::Softmax ? softmax(out) : out;
}

MlpGradients Mlp3::zero_gradients() const { return {zero_layers(shape_)}; }

void Mlp3::backward(const ForwardCache& cache, const Eigen::VectorXd& grad_logits,
                    MlpGradients& grads) const {
  if (!cache.filled) throw std::logic_error("backward called without a forward cache");
  if (grad_logits.size() != shape_.output)
    throw std::invalid_argument("upstream gradient has the wrong length");
  auto& g = grads.layers;
  g[2].weights.noalias() += grad_logits * cache.hidden2.transpose();
  g[2].biases += grad_logits;
  Eigen::VectorXd d2 = (layers_[2].weights.transpose() * grad_logits).cwiseProduct(relu_mask(cache.hidden2));
  g[1].weights.noalias() += d2 * cache.hidden1.transpose();
  g[1].biases += d2;
  Eigen::VectorXd d1 = (layers_[1].weights.transpose() * d2).cwiseProduct(relu_mask(cache.hidden1));
  g[0].weights.noalias() += d1 * cache.input.transpose();
  g[0].biases += d1;
}

bool Mlp3::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weights.allFinite() || !l.biases.allFinite()) return false;
  return true;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).cwiseMax(std::log(kProbFloor)).matrix();
}

double categorical_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("negative probability");
    h -= p * std::log(std::max(p, kProbFloor));
  }
  return h;
}

Eigen::VectorXd entropy_logit_gradient(const Eigen::VectorXd& probs) {
  // dH/dz_j = -p_j (log p_j + H)
  Eigen::VectorXd logp = probs.array().max(kProbFloor).log().matrix();
  const double h = -probs.dot(logp);
  return -(probs.array() * (logp.array() + h)).matrix();
}

AdamState::AdamState(const Mlp3& net, AdamConfig config)
    : config_(config), first_(net.zero_gradients().layers), second_(net.zero_gradients().layers) {}

void AdamState::step(Mlp3& net, const MlpGradients& grads) {
  auto& params = net.layers();
  for (std::size_t k = 0; k < 3; ++k) {
    if (!params[k].same_shape(grads.layers[k]) || !params[k].same_shape(first_[k]))
      throw std::invalid_argument("adam: parameter and gradient shapes differ");
  }
  ++step_count_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  const double lr = config_.lr;
  const double eps = config_.epsilon;

  const double step_size = lr / c1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(c2);
  // Single fused pass per tensor.
  auto update = [&](double* __restrict p, double* __restrict m, double* __restrict v,
                    const double* __restrict g, Eigen::Index size) {
    for (Eigen::Index k = 0; k < size; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      p[k] -= step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_c2 + eps);
    }
  };
  for (std::size_t k = 0; k < 3; ++k) {
    update(params[k].weights.data(), first_[k].weights.data(), second_[k].weights.data(),
           grads.layers[k].weights.data(), params[k].weights.size());
    update(params[k].biases.data(), first_[k].biases.data(), second_[k].biases.data(),
           grads.layers[k].biases.data(), params[k].biases.size());
  }
}

// ---- checkpoint ---------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'P', 'G', 'G', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return value;
}

void put_layers(std::ostream& out, const std::array<DenseLayer, 3>& layers) {
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) put<double>(out, l.weights(r, c));
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) put<double>(out, l.biases(r));
  }
}

void get_layers(std::istream& in, std::array<DenseLayer, 3>& layers) {
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = get<double>(in);
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) l.biases(r) = get<double>(in);
  }
}

}  // namespace

struct CheckpointAccess {
  static void write(std::ostream& out, const AdamState& a) {
    put<std::uint64_t>(out, a.step_count_);
    put<double>(out, a.config_.lr);
    put<double>(out, a.config_.beta1);
    put<double>(out, a.config_.beta2);
    put<double>(out, a.config_.epsilon);
    put_layers(out, a.first_);
    put_layers(out, a.second_);
  }
  static AdamState read(std::istream& in, const Mlp3& net) {
    AdamState a(net, {});
    a.step_count_ = get<std::uint64_t>(in);
    a.config_.lr = get<double>(in);
    a.config_.beta1 = get<double>(in);
    a.config_.beta2 = get<double>(in);
    a.config_.epsilon = get<double>(in);
    get_layers(in, a.first_);
    get_layers(in, a.second_);
    return a;
  }
};

void write_checkpoint(std::ostream& out, std::span<const NetworkState> networks) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(networks.size()));
  for (const auto& ns : networks) {
    const auto& s = ns.net.shape();
    put<std::uint32_t>(out, ns.net.head() == Head::Softmax ? 0u : 1u);
    for (int w : {s.input, s.hidden1, s.hidden2, s.output}) put<std::uint64_t>(out, static_cast<std::uint64_t>(w));
    put_layers(out, ns.net.layers());
    CheckpointAccess::write(out, ns.adam);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

std::vector<NetworkState> read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("unsupported checkpoint version");
  const auto count = get<std::uint32_t>(in);
  std::vector<NetworkState> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto head = get<std::uint32_t>(in) == 0 ? Head::Softmax : Head::Identity;
    MlpShape s;
    s.input = static_cast<int>(get<std::uint64_t>(in));
    s.hidden1 = static_cast<int>(get<std::uint64_t>(in));
    s.hidden2 = static_cast<int>(get<std::uint64_t>(in));
    s.output = static_cast<int>(get<std::uint64_t>(in));
    Mlp3 net(s, head);
    get_layers(in, net.layers());
    AdamState adam = CheckpointAccess::read(in, net);
    out.push_back({std::move(net), std::move(adam)});
  }
  return out;
}

void save_checkpoint(const std::string& path, std::span<const NetworkState> networks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(out, networks);
}

std::vector<NetworkState> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace spgg::nn
