#include "spgg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace spgg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw std::invalid_argument(key + ": expected a real, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const std::uint64_t v = to_uint(key, text);
  if (v > 1'000'000'000ULL) throw std::invalid_argument(key + ": value too large");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + text + "'");
}

}  // namespace

std::vector<double> parse_r_values(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw std::invalid_argument("r sweep must be start:stop:step");
    const double start = to_double("r", parts[0]);
    const double stop = to_double("r", parts[1]);
    const double step = to_double("r", parts[2]);
    if (step <= 0.0 || stop < start) throw std::invalid_argument("r sweep: need step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) {
      // round to 1e-9 so 4.0 + 3 * 0.1 prints as 4.3
      out.push_back(std::round((start + static_cast<double>(k) * step) * 1e9) / 1e9);
    }
  } else {
    for (const auto& part : split(t, ',')) out.push_back(to_double("r", part));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(to_uint("snapshots", part));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t ExperimentPlan::horizon() const {
  switch (algorithm) {
    case Algorithm::Fermi: return fermi.steps;
    case Algorithm::QLearning: return qlearning.steps;
    default: return train.iterations * train.rollout_length;
  }
}

std::vector<std::size_t> ExperimentPlan::effective_snapshot_times() const {
  if (!snapshot_times.empty()) return snapshot_times;
  std::vector<std::size_t> out;
  for (std::size_t t : {0, 1, 10, 100, 1000}) {
    if (t <= horizon()) out.push_back(t);
  }
  return out;
}

void ExperimentPlan::validate() const {
  if (r_values.empty()) throw std::invalid_argument("plan: no r values");
  if (!std::is_sorted(r_values.begin(), r_values.end())) {
    throw std::invalid_argument("plan: r values must be sorted");
  }
  for (double r : r_values) {
    LatticeConfig probe = lattice;
    probe.enhancement = r;
    probe.validate();
  }
  if (runs_per_point < 1) throw std::invalid_argument("plan: runs_per_point must be >= 1");
  if (parallel < 1) throw std::invalid_argument("plan: parallel must be >= 1");
  train.validate();
  fermi.validate();
  qlearning.validate();
  for (std::size_t t : snapshot_times) {
    if (t > horizon()) {
      throw std::invalid_argument("plan: snapshot time " + std::to_string(t) + " exceeds horizon " +
                                  std::to_string(horizon()));
    }
  }
}

void apply_setting(ExperimentPlan& plan, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(value);
  auto& lat = plan.lattice;
  auto& tr = plan.train;
  auto& fe = plan.fermi;
  auto& q = plan.qlearning;

  if (key == "harness.algo" || key == "harness.algorithm") plan.algorithm = parse_algorithm(v);
  else if (key == "harness.r") plan.r_values = parse_r_values(v);
  else if (key == "harness.runs") plan.runs_per_point = to_uint(key, v);
  else if (key == "harness.seed") plan.base_seed = to_uint(key, v);
  else if (key == "harness.snapshots") plan.snapshot_times = parse_index_list(v);
  else if (key == "harness.out_dir") plan.output_dir = v;
  else if (key == "harness.parallel") plan.parallel = to_int(key, v);
  else if (key == "harness.checkpoints") plan.save_checkpoints = to_bool(key, v);
  else if (key == "harness.iters") {
    const std::uint64_t n = to_uint(key, v);
    tr.iterations = n;
    fe.steps = n;
    q.steps = n;
  }
  else if (key == "lattice.L" || key == "lattice.side") lat.side = to_int(key, v);
  else if (key == "lattice.zeta" || key == "lattice.lcr_weight") lat.lcr_weight = to_double(key, v);
  else if (key == "lattice.init") lat.init = parse_init_mode(v);
  else if (key == "lattice.bernoulli_p") lat.bernoulli_p = to_double(key, v);
  else if (key == "train.gamma") tr.gamma = to_double(key, v);
  else if (key == "train.lambda" || key == "train.gae_lambda") tr.gae_lambda = to_double(key, v);
  else if (key == "train.clip" || key == "train.clip_epsilon") tr.clip_epsilon = to_double(key, v);
  else if (key == "train.rho" || key == "train.entropy_weight") tr.entropy_weight = to_double(key, v);
  else if (key == "train.delta" || key == "train.value_weight") tr.value_weight = to_double(key, v);
  else if (key == "train.lr") tr.lr = to_double(key, v);
  else if (key == "train.iterations") tr.iterations = to_uint(key, v);
  else if (key == "train.epochs" || key == "train.ppo_epochs") tr.ppo_epochs = to_uint(key, v);
  else if (key == "train.rollout" || key == "train.rollout_length") tr.rollout_length = to_uint(key, v);
  else if (key == "train.actor_hidden1") tr.actor_hidden1 = to_int(key, v);
  else if (key == "train.actor_hidden2") tr.actor_hidden2 = to_int(key, v);
  else if (key == "train.critic_hidden1") tr.critic_hidden1 = to_int(key, v);
  else if (key == "train.critic_hidden2") tr.critic_hidden2 = to_int(key, v);
  else if (key == "train.normalize_advantages") tr.normalize_advantages = to_bool(key, v);
  else if (key == "fermi.noise" || key == "fermi.K") fe.noise = to_double(key, v);
  else if (key == "fermi.steps") fe.steps = to_uint(key, v);
  else if (key == "fermi.async") {
    fe.scheme = to_bool(key, v) ? FermiScheme::Asynchronous : FermiScheme::Synchronous;
  }
  else if (key == "qlearning.alpha") q.alpha = to_double(key, v);
  else if (key == "qlearning.gamma") q.gamma = to_double(key, v);
  else if (key == "qlearning.epsilon") q.epsilon = to_double(key, v);
  else if (key == "qlearning.steps") q.steps = to_uint(key, v);
  else if (key == "qlearning.shared_table") q.shared_table = to_bool(key, v);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config(ExperimentPlan& plan, std::istream& in) {
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      if (section.empty()) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": key outside a section");
      }
      key = section + "." + key;
    }
    try {
      apply_setting(plan, key, line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentPlan& plan, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  apply_config(plan, in);
}

}  // namespace spgg
