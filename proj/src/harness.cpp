#include "spgg/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

#include "spgg/baselines.hpp"
#include "spgg/kernels.hpp"

namespace spgg {

RunDivergence::RunDivergence(Algorithm algo, double r_value, std::size_t run, std::uint64_t run_seed,
                             std::size_t iter, const std::string& detail)
    : std::runtime_error(to_string(algo) + " r=" + format_r(r_value) + " run=" +
                         std::to_string(run) + " seed=" + std::to_string(run_seed) +
                         " diverged at iteration " + std::to_string(iter) + ": " + detail),
      algorithm(algo),
      r(r_value),
      run_index(run),
      seed(run_seed),
      iteration(iter) {}

RunResult run_single(const ExperimentPlan& plan, double r, std::size_t run_index) {
  plan.validate();
  RunResult out;
  out.algorithm = plan.algorithm;
  out.r = r;
  out.run_index = run_index;
  out.seed = plan.run_seed(run_index);

  LatticeConfig lattice = plan.lattice;
  lattice.enhancement = r;
  lattice.seed = out.seed;

  const auto times = plan.effective_snapshot_times();
  StepObserver observer = [&](std::size_t step, const StrategyGrid& grid) {
    if (std::binary_search(times.begin(), times.end(), step)) {
      out.snapshots.push_back({step, grid, kernels::payoff_field(grid, r)});
    }
  };

  switch (plan.algorithm) {
    case Algorithm::Fermi:
      out.trajectory = run_fermi(lattice, plan.fermi, observer);
      break;
    case Algorithm::QLearning:
      out.trajectory = run_qlearning(lattice, plan.qlearning, observer);
      break;
    default:
      try {
        TrainResult res = train(lattice, plan.train, plan.algorithm, observer);
        out.trajectory = std::move(res.trajectory);
        if (plan.save_checkpoints) out.checkpoint = std::move(res.checkpoint);
      } catch (const DivergenceError& e) {
        throw RunDivergence(plan.algorithm, r, run_index, out.seed, e.iteration(), e.what());
      }
      break;
  }
  out.final_coop_fraction = out.trajectory.back().coop_fraction;
  return out;
}

std::filesystem::path run_directory(const ExperimentPlan& plan, double r, std::size_t run_index) {
  return plan.output_dir / to_string(plan.algorithm) / ("r" + format_r(r)) /
         ("run" + std::to_string(run_index));
}

void write_run_outputs(const ExperimentPlan& plan, const RunResult& result) {
  const auto dir = run_directory(plan, result.r, result.run_index);
  std::filesystem::create_directories(dir);
  export_timeseries(result.trajectory, dir / "timeseries.csv");
  for (const auto& snap : result.snapshots) {
    const std::string tag = "t" + std::to_string(snap.step);
    export_snapshot(snap.grid, dir / ("snapshot_" + tag + ".pgm"));
    export_payoff(snap.payoff, dir / ("payoff_" + tag + ".csv"));
  }
  if (!result.checkpoint.empty()) {
    nn::save_checkpoint((dir / "checkpoint.bin").string(), result.checkpoint);
  }
}

SweepResult run_sweep(const ExperimentPlan& plan, bool write_outputs) {
  plan.validate();
  const std::size_t points = plan.r_values.size();
  const std::size_t runs = plan.runs_per_point;
  const std::size_t jobs = points * runs;

  std::vector<std::optional<double>> finals(jobs);
  std::vector<std::optional<RunFailure>> failures(jobs);

  const auto count = static_cast<std::int64_t>(jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(plan.parallel)
  for (std::int64_t job = 0; job < count; ++job) {
    const auto j = static_cast<std::size_t>(job);
    const double r = plan.r_values[j / runs];
    const std::size_t k = j % runs;
    try {
      RunResult res = run_single(plan, r, k);
      if (write_outputs) write_run_outputs(plan, res);
      finals[j] = res.final_coop_fraction;
    } catch (const RunDivergence& e) {
      failures[j] = RunFailure{r, k, e.seed, e.iteration, e.what()};
    } catch (const std::exception& e) {
      failures[j] = RunFailure{r, k, plan.run_seed(k), 0, e.what()};
    }
  }

  SweepResult out;
  const std::string algo = to_string(plan.algorithm);
  for (std::size_t p = 0; p < points; ++p) {
    const double r = plan.r_values[p];
    std::vector<double> samples;
    for (std::size_t k = 0; k < runs; ++k) {
      const std::size_t j = p * runs + k;
      if (finals[j]) {
        samples.push_back(*finals[j]);
        out.finals.push_back({algo, r, k, plan.run_seed(k), *finals[j]});
      }
      if (failures[j]) out.failures.push_back(*failures[j]);
    }
    if (!samples.empty()) out.summaries.push_back(aggregate_stats(samples, r));
  }

  if (write_outputs) {
    std::filesystem::create_directories(plan.output_dir);
    std::vector<SummaryRow> rows;
    for (const auto& s : out.summaries) rows.push_back({algo, s});
    write_text(plan.output_dir / "summary.csv", format_summary(rows));
    write_text(plan.output_dir / "per_run.csv", format_finals(out.finals));
    if (!out.failures.empty()) {
      std::string text = "r,run,seed,iteration,message\n";
      for (const auto& f : out.failures) {
        text += format_r(f.r) + "," + std::to_string(f.run_index) + "," + std::to_string(f.seed) +
                "," + std::to_string(f.iteration) + ",\"" + f.message + "\"\n";
      }
      write_text(plan.output_dir / "failures.csv", text);
    }
  }
  return out;
}

}  // namespace spgg
