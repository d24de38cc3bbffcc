#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace spgg {

/// Aggregate of final cooperation fractions at one enhancement factor.
struct StatsSummary {
  double r = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for n == 1
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

inline constexpr double kNormalQuantile95 = 1.96;

/// Mean, sample std and the normal-approximation 95% interval
/// mean +- 1.96 s / sqrt(n). Zero variance gives the degenerate interval
/// [mean, mean]. Throws std::invalid_argument on an empty sample.
StatsSummary aggregate_stats(std::span<const double> samples, double r = 0.0);

/// First r at which the mean crosses `level` going up, linearly
/// interpolated between grid points. `summaries` must be sorted by r.
/// Returns nullopt when the mean never reaches `level`; returns the first r
/// when the mean already starts at or above it.
std::optional<double> estimate_transition(std::span<const StatsSummary> summaries,
                                          double level = 0.5);

}  // namespace spgg
