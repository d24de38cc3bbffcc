#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "spgg/lattice.hpp"
#include "spgg/mappo.hpp"
#include "spgg/stats.hpp"

namespace spgg {

// All text outputs use fixed 6-decimal reals and LF line endings. Writers
// throw std::runtime_error when the target cannot be written.

/// iteration,coop_fraction,def_fraction,mean_reward,policy_loss,value_loss,entropy
std::string format_timeseries(const Trajectory& trajectory);
void export_timeseries(const Trajectory& trajectory, const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255); cooperators white (255), defectors black (0).
std::string format_snapshot(const StrategyGrid& grid);
void export_snapshot(const StrategyGrid& grid, const std::filesystem::path& path);
StrategyGrid read_snapshot(const std::filesystem::path& path);

/// L rows of L comma-separated payoffs.
std::string format_payoff(const PayoffGrid& field);
void export_payoff(const PayoffGrid& field, const std::filesystem::path& path);
PayoffGrid read_payoff(const std::filesystem::path& path);

struct SummaryRow {
  std::string algorithm;
  StatsSummary stats;
};

/// algorithm,r,mean,std,ci_low,ci_high,n
std::string format_summary(std::span<const SummaryRow> rows);

struct FinalRecord {
  std::string algorithm;
  double r = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double final_coop_fraction = 0.0;
};

/// algorithm,r,run,seed,final_coop_fraction
std::string format_finals(std::span<const FinalRecord> rows);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal form used in directory names, e.g. 4.4 -> "4.4".
std::string format_r(double r);

}  // namespace spgg
