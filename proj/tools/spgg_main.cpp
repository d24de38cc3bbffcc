#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "spgg/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spatial public goods game simulator and trainer"};

  std::string config_path;
  app.add_option("--config", config_path, "key = value config file with [section] headers");

  // every flag maps onto a config key and is applied after the file
  std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--algo", "harness.algo"},       {"--L", "lattice.L"},
      {"--r", "harness.r"},             {"--zeta", "lattice.zeta"},
      {"--rho", "train.rho"},           {"--runs", "harness.runs"},
      {"--iters", "harness.iters"},     {"--init", "lattice.init"},
      {"--seed", "harness.seed"},       {"--snapshots", "harness.snapshots"},
      {"--out-dir", "harness.out_dir"}, {"--parallel", "harness.parallel"},
      {"--bernoulli-p", "lattice.bernoulli_p"}, {"--epochs", "train.epochs"},
      {"--rollout", "train.rollout"},   {"--lr", "train.lr"},
      {"--fermi-k", "fermi.noise"},     {"--q-shared", "qlearning.shared_table"},
      {"--normalize-adv", "train.normalize_advantages"},
  };
  const std::vector<std::string> help = {
      "mappo_lcr | mappo | ppo | qlearning | fermi",
      "lattice side length",
      "enhancement factor: value, start:stop:step or comma list",
      "LCR weight",
      "entropy weight",
      "independent runs per r",
      "horizon in environment steps for every algorithm",
      "halfhalf | bernoulli | alldefect | allcooperate",
      "base seed; run k uses seed + k",
      "snapshot steps, comma separated",
      "output directory",
      "concurrent runs",
      "cooperator probability for bernoulli init",
      "optimizer epochs per rollout",
      "environment steps per rollout",
      "Adam learning rate",
      "Fermi noise K",
      "one Q table shared by all agents (true/false)",
      "standardize advantages per batch (true/false)",
  };
  std::vector<std::optional<std::string>> values(flag_keys.size());
  for (std::size_t i = 0; i < flag_keys.size(); ++i) {
    app.add_option_function<std::string>(
        flag_keys[i].first, [&values, i](const std::string& v) { values[i] = v; }, help[i]);
  }
  bool fermi_async = false;
  bool checkpoints = false;
  app.add_flag("--fermi-async", fermi_async, "random sequential Fermi updates");
  app.add_flag("--checkpoints", checkpoints, "write checkpoint.bin for trained networks");

  CLI11_PARSE(app, argc, argv);

  spgg::ExperimentPlan plan;
  try {
    if (!config_path.empty()) spgg::apply_config_file(plan, config_path);
    for (std::size_t i = 0; i < flag_keys.size(); ++i) {
      if (values[i]) spgg::apply_setting(plan, flag_keys[i].second, *values[i]);
    }
    if (fermi_async) plan.fermi.scheme = spgg::FermiScheme::Asynchronous;
    if (checkpoints) plan.save_checkpoints = true;
    plan.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  spgg::SweepResult result;
  try {
    result = spgg::run_sweep(plan, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string algo = spgg::to_string(plan.algorithm);
  for (const auto& s : result.summaries) {
    std::printf("%s r=%s mean=%.4f std=%.4f ci=[%.4f, %.4f] n=%zu\n", algo.c_str(),
                spgg::format_r(s.r).c_str(), s.mean, s.std, s.ci_low, s.ci_high, s.n);
  }
  for (const auto& f : result.failures) std::fprintf(stderr, "failed: %s\n", f.message.c_str());
  return result.failures.empty() ? 0 : 2;
}
