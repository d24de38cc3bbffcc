#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "spgg/baselines.hpp"
#include "spgg/lattice.hpp"
#include "spgg/mappo.hpp"

namespace spgg {

struct ExperimentPlan {
  Algorithm algorithm = Algorithm::MappoLcr;
  std::vector<double> r_values{4.4};
  std::size_t runs_per_point = 1;
  std::uint64_t base_seed = 1;
  LatticeConfig lattice{};
  TrainConfig train{};
  FermiConfig fermi{};
  QConfig qlearning{};
  /// Empty means the default {0, 1, 10, 100, 1000} clipped to the horizon.
  std::vector<std::size_t> snapshot_times;
  std::filesystem::path output_dir = "out";
  int parallel = 1;
  bool save_checkpoints = false;

  /// Number of environment steps for the selected algorithm.
  std::size_t horizon() const;
  std::vector<std::size_t> effective_snapshot_times() const;
  /// Seed of run k: base_seed + k.
  std::uint64_t run_seed(std::size_t run_index) const { return base_seed + run_index; }

  void validate() const;
};

/// "4.4", "4.0:5.0:0.1" (inclusive stop) or "4.1,4.7".
std::vector<double> parse_r_values(const std::string& text);
std::vector<std::size_t> parse_index_list(const std::string& text);

/// Applies one "section.key" = value setting. Throws std::invalid_argument on
/// unknown keys or malformed values.
void apply_setting(ExperimentPlan& plan, const std::string& key, const std::string& value);

/// Line-oriented `key = value` text with `[section]` headers; `#` starts a comment.
void apply_config(ExperimentPlan& plan, std::istream& in);
void apply_config_file(ExperimentPlan& plan, const std::filesystem::path& path);

}  // namespace spgg
