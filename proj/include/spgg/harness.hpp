#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spgg/config.hpp"
#include "spgg/export.hpp"
#include "spgg/stats.hpp"

namespace spgg {

struct Snapshot {
  std::size_t step = 0;
  StrategyGrid grid;
  PayoffGrid payoff;
};

struct RunResult {
  Algorithm algorithm = Algorithm::MappoLcr;
  double r = 0.0;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  double final_coop_fraction = 0.0;
  std::vector<Snapshot> snapshots;
  /// Actor and critic state; empty for the tabular and imitation baselines.
  std::vector<nn::NetworkState> checkpoint;
};

/// A trainer divergence tagged with the run that produced it.
class RunDivergence : public std::runtime_error {
 public:
  RunDivergence(Algorithm algo, double r, std::size_t run_index, std::uint64_t seed,
                std::size_t iteration, const std::string& detail);

  Algorithm algorithm;
  double r;
  std::size_t run_index;
  std::uint64_t seed;
  std::size_t iteration;
};

/// One run at enhancement factor r with seed base_seed + run_index.
RunResult run_single(const ExperimentPlan& plan, double r, std::size_t run_index);

struct RunFailure {
  double r = 0.0;
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  std::string message;
};

struct SweepResult {
  std::vector<StatsSummary> summaries;  // one per r with at least one finished run
  std::vector<FinalRecord> finals;      // ordered by (r, run)
  std::vector<RunFailure> failures;     // ordered by (r, run)
};

/// Runs every (r, run) pair on up to plan.parallel workers. Results do not
/// depend on the worker count or completion order. When `write_outputs` is
/// set, each run directory and summary.csv / per_run.csv are written under
/// plan.output_dir.
SweepResult run_sweep(const ExperimentPlan& plan, bool write_outputs = false);

/// out-dir/<algo>/r<value>/run<k>
std::filesystem::path run_directory(const ExperimentPlan& plan, double r, std::size_t run_index);

/// timeseries.csv, snapshot_t<k>.pgm, payoff_t<k>.csv and checkpoint.bin
/// when requested.
void write_run_outputs(const ExperimentPlan& plan, const RunResult& result);

}  // namespace spgg
