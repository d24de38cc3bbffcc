#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fd.hpp"
#include "oracles.hpp"
#include "spgg/baselines.hpp"
#include "spgg/harness.hpp"
#include "spgg/kernels.hpp"

using namespace spgg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

ExperimentPlan desk_plan(Algorithm algo, InitMode init = InitMode::HalfHalf) {
  ExperimentPlan plan;
  plan.algorithm = algo;
  plan.lattice.side = 50;
  plan.lattice.lcr_weight = 3.0;
  plan.lattice.init = init;
  plan.base_seed = 1;
  return plan;
}

std::vector<double> finals_at(ExperimentPlan plan, double r, std::size_t runs) {
  plan.r_values = {r};
  plan.runs_per_point = runs;
  const auto res = run_sweep(plan);
  std::vector<double> out;
  for (const auto& f : res.finals) out.push_back(f.final_coop_fraction);
  return out;
}

std::string list(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) s += (k ? " " : "") + fmt("%.3f", xs[k]);
  return s + "]";
}

Outcome conservation() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  const std::size_t sides[3] = {4, 8, 16};
  const double rs[3] = {3.0, 4.4, 6.0};
  double worst_sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t L = sides[k % 3];
    const double r = rs[(k / 3) % 3];
    const auto g = oracle::random_grid(L, density(rng), rng);
    const auto field = kernels::payoff_field(g, r);
    double sum = 0.0;
    for (double v : field.values) sum += v;
    worst_sum = std::max(worst_sum, std::abs(sum - 5.0 * (r - 1.0) * double(g.cooperator_count())));
  }
  double worst_oracle = 0.0;
  for (unsigned mask = 0; mask < 512; ++mask) {
    std::vector<std::uint8_t> cells(9);
    for (int b = 0; b < 9; ++b) cells[b] = (mask >> b) & 1u;
    const StrategyGrid g(3, cells);
    for (double r : rs) {
      const auto expect = oracle::payoff(cells, 3, r);
      const auto field = kernels::payoff_field(g, r);
      for (std::size_t i = 0; i < 9; ++i) worst_oracle = std::max(worst_oracle, std::abs(field[i] - expect[i]));
    }
  }
  const double secs = seconds_since(start);
  return {worst_sum <= 1e-9 && worst_oracle <= 1e-12 && secs < 10.0,
          "max conservation error " + fmt("%.2e", worst_sum) + ", max oracle deviation " +
              fmt("%.2e", worst_oracle) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome gradient_fidelity() {
  const auto start = Clock::now();
  TrainConfig cfg;
  cfg.actor_hidden1 = 4;
  cfg.actor_hidden2 = 4;
  cfg.critic_hidden1 = 8;
  cfg.critic_hidden2 = 4;
  std::size_t components = 0, failures = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LatticeConfig lat;
    lat.side = 3;
    lat.init = InitMode::Bernoulli;
    lat.seed = seed;
    Trainer trainer(lat, cfg, Algorithm::MappoLcr);
    const auto buf = trainer.collect_rollout(1 + seed % 3);
    const auto batch = compute_gae(buf, cfg.gamma, cfg.gae_lambda);
    ActorCritic nets = trainer.networks();
    if (seed % 2 == 0) {
      // move the actor away from the sampling policy so clipping is exercised
      std::mt19937_64 rng(seed * 77);
      nets.actor = nn::Mlp3::random(nets.actor.shape(), nn::Head::Softmax, rng);
    }
    const auto rep = fd::check_loss_gradient(nets, buf, batch, cfg, 1e-5, 1e-4, 1e-7);
    components += rep.components;
    failures += rep.failures;
    worst = std::max(worst, rep.worst_rel);
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 30.0,
          std::to_string(failures) + "/" + std::to_string(components) +
              " components outside tolerance, worst relative error " + fmt("%.2e", worst) + ", " +
              fmt("%.2f", secs) + " s"};
}

Outcome gae_oracle() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t T = 1 + k % 8;
    const double gamma = 0.5 + 0.49 * u(rng);
    const double lambda = k % 10 == 0 ? 0.0 : (k % 10 == 1 ? 1.0 : u(rng));
    const auto buf = oracle::random_buffer(T, 3, rng);
    const auto batch = compute_gae(buf, gamma, lambda);
    std::vector<std::vector<double>> rewards(T, std::vector<double>(3));
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < 3; ++i) rewards[t][i] = buf.rewards[t * 3 + i];
    std::vector<double> values(buf.values);
    values.push_back(buf.bootstrap_values[0]);
    const auto expect = oracle::gae(rewards, values, gamma, lambda);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(batch.advantages[t * 3 + i] - expect[t][i]));
  }
  return {worst <= 1e-10, "100 buffers, max deviation " + fmt("%.2e", worst)};
}

Outcome bistability() {
  const auto plan = desk_plan(Algorithm::MappoLcr);
  const auto high = finals_at(plan, 4.7, 10);
  const auto low = finals_at(plan, 4.1, 10);
  const auto up = std::count_if(high.begin(), high.end(), [](double x) { return x >= 0.99; });
  const auto down = std::count_if(low.begin(), low.end(), [](double x) { return x <= 0.01; });
  return {high.size() == 10 && low.size() == 10 && up >= 8 && down >= 8,
          "r=4.7: " + std::to_string(up) + "/10 >= 0.99 " + list(high) + "; r=4.1: " +
              std::to_string(down) + "/10 <= 0.01 " + list(low)};
}

struct Transition {
  std::optional<double> r;
  std::vector<StatsSummary> summaries;
};

Transition locate(Algorithm algo, std::vector<double> grid, std::size_t runs) {
  auto plan = desk_plan(algo);
  plan.r_values = std::move(grid);
  plan.runs_per_point = runs;
  const auto res = run_sweep(plan);
  return {estimate_transition(res.summaries), res.summaries};
}

std::vector<double> r_grid(double lo, double hi) {
  std::ostringstream text;
  text << lo << ":" << hi << ":0.1";
  return parse_r_values(text.str());
}

std::string means(const std::vector<StatsSummary>& s) {
  std::string out;
  for (const auto& x : s) out += " " + format_r(x.r) + ":" + fmt("%.2f", x.mean);
  return out;
}

Transition lcr_transition, mappo_transition;

Outcome threshold_ordering() {
  lcr_transition = locate(Algorithm::MappoLcr, r_grid(3.9, 5.4), 3);
  mappo_transition = locate(Algorithm::Mappo, r_grid(3.9, 5.4), 3);
  const bool found = lcr_transition.r && mappo_transition.r;
  const double gap = found ? *mappo_transition.r - *lcr_transition.r : 0.0;
  std::string detail = "MAPPO-LCR " + (lcr_transition.r ? fmt("%.3f", *lcr_transition.r) : "none") +
                       ", MAPPO " + (mappo_transition.r ? fmt("%.3f", *mappo_transition.r) : "none") +
                       ", gap " + fmt("%.3f", gap) + " | LCR means" + means(lcr_transition.summaries) +
                       " | MAPPO means" + means(mappo_transition.summaries);
  return {found && gap >= 0.2, detail};
}

Outcome alldefect_escape() {
  const auto plan = desk_plan(Algorithm::MappoLcr, InitMode::AllDefect);
  const auto finals = finals_at(plan, 4.7, 10);
  const auto up = std::count_if(finals.begin(), finals.end(), [](double x) { return x >= 0.99; });

  LatticeConfig lat;
  lat.side = 50;
  lat.enhancement = 4.7;
  lat.init = InitMode::AllDefect;
  FermiConfig fermi;
  fermi.steps = 1000;
  bool stays = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    lat.seed = seed;
    for (const auto& row : run_fermi(lat, fermi)) stays = stays && row.coop_fraction == 0.0;
  }
  return {up >= 8 && stays, "MAPPO-LCR " + std::to_string(up) + "/10 >= 0.99 " + list(finals) +
                                "; Fermi all-D " + (stays ? "stays at 0" : "left 0")};
}

Outcome fermi_plateau() {
  LatticeConfig lat;
  lat.side = 100;
  lat.enhancement = 4.4;
  lat.init = InitMode::HalfHalf;
  FermiConfig cfg;
  cfg.noise = 0.5;
  cfg.steps = 10000;
  std::vector<double> tails;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    lat.seed = seed;
    const auto traj = run_fermi(lat, cfg);
    double sum = 0.0;
    for (std::size_t t = traj.size() - 1000; t < traj.size(); ++t) sum += traj[t].coop_fraction;
    tails.push_back(sum / 1000.0);
  }
  double mean = 0.0;
  for (double x : tails) mean += x / tails.size();
  return {mean >= 0.6 && mean <= 0.9, "mean of last-1000-step averages " + fmt("%.4f", mean) + " " + list(tails)};
}

Outcome stability_contrast() {
  if (!mappo_transition.r) return {false, "MAPPO transition not located"};
  const double r_mappo = std::round(*mappo_transition.r * 10.0) / 10.0;
  const auto ppo = locate(Algorithm::Ppo, r_grid(1.5, 5.4), 3);
  if (!ppo.r) return {false, "PPO transition not located |" + means(ppo.summaries)};
  const double r_ppo = std::max(1.1, std::round(*ppo.r * 10.0) / 10.0);
  const auto m = aggregate_stats(finals_at(desk_plan(Algorithm::Mappo), r_mappo, 20), r_mappo);
  const auto p = aggregate_stats(finals_at(desk_plan(Algorithm::Ppo), r_ppo, 20), r_ppo);
  return {m.std <= p.std, "MAPPO r=" + format_r(r_mappo) + " std " + fmt("%.4f", m.std) + " (mean " +
                              fmt("%.3f", m.mean) + "); PPO r=" + format_r(r_ppo) + " std " +
                              fmt("%.4f", p.std) + " (mean " + fmt("%.3f", p.mean) + ")"};
}

Outcome statistics_suite() {
  bool ok = true;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  const auto a = aggregate_stats(std::vector<double>{1, 1, 1});
  ok = ok && a.mean == 1.0 && a.std == 0.0 && a.ci_low == 1.0 && a.ci_high == 1.0;
  const auto b = aggregate_stats(std::vector<double>{0, 1});
  ok = ok && b.mean == 0.5 && near(b.std, std::sqrt(0.5)) && near(b.ci_low, 0.5 - 0.98) && near(b.ci_high, 0.5 + 0.98);
  const auto c = aggregate_stats(std::vector<double>{0.3});
  ok = ok && c.mean == 0.3 && c.std == 0.0 && c.ci_low == 0.3 && c.ci_high == 0.3;
  const auto d = aggregate_stats(std::vector<double>{0.4, 0.5, 0.45});
  const double half = 1.96 * 0.05 / std::sqrt(3.0);
  ok = ok && near(d.mean, 0.45) && near(d.std, 0.05) && near(d.ci_low, 0.45 - half) && near(d.ci_high, 0.45 + half);
  const auto e = aggregate_stats(std::vector<double>(50, 0.0));
  ok = ok && e.std == 0.0 && e.ci_low == 0.0 && e.ci_high == 0.0;

  // byte stability of every export across reruns of the same plan
  ExperimentPlan plan;
  plan.algorithm = Algorithm::MappoLcr;
  plan.lattice.side = 8;
  plan.train.iterations = 20;
  plan.r_values = {4.4, 4.8};
  plan.runs_per_point = 2;
  plan.save_checkpoints = true;
  const auto root = std::filesystem::temp_directory_path() / "spgg_acceptance_stats";
  std::filesystem::remove_all(root);
  std::vector<std::string> dumps;
  for (int pass = 0; pass < 2; ++pass) {
    plan.output_dir = root / ("pass" + std::to_string(pass));
    run_sweep(plan, true);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(plan.output_dir))
      if (entry.is_regular_file()) files.push_back(std::filesystem::relative(entry.path(), plan.output_dir));
    std::sort(files.begin(), files.end());
    std::string dump;
    for (const auto& f : files) {
      std::ifstream in(plan.output_dir / f, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      dump += f.string() + "\n" + ss.str();
    }
    dumps.push_back(dump);
  }
  std::filesystem::remove_all(root);
  const bool stable = !dumps[0].empty() && dumps[0] == dumps[1];
  return {ok && stable, std::string("hand examples ") + (ok ? "match" : "differ") + ", exports " +
                            (stable ? "byte-identical" : "differ") + " across reruns"};
}

Outcome qlearning_band() {
  LatticeConfig lat;
  lat.side = 50;
  lat.enhancement = 4.4;
  QConfig cfg;
  cfg.steps = 10000;
  std::vector<double> finals;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    lat.seed = seed;
    finals.push_back(run_qlearning(lat, cfg).back().coop_fraction);
  }
  const bool ok = std::all_of(finals.begin(), finals.end(), [](double x) { return x > 0.1 && x < 0.7; });
  return {ok, "finals " + list(finals)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conservation law and payoff oracle", conservation},
      {"gradient fidelity", gradient_fidelity},
      {"GAE oracle", gae_oracle},
      {"MAPPO-LCR bistability", bistability},
      {"threshold ordering", threshold_ordering},
      {"all-defector escape", alldefect_escape},
      {"Fermi plateau", fermi_plateau},
      {"stability contrast", stability_contrast},
      {"statistics suite", statistics_suite},
      {"Q-learning mixed regime", qlearning_band},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failed;
    std::printf("[%s] %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
