#include "spgg/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace spgg {

StatsSummary aggregate_stats(std::span<const double> samples, double r) {
  if (samples.empty()) throw std::invalid_argument("aggregate_stats: empty sample list");
  StatsSummary s;
  s.r = r;
  s.n = samples.size();
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  const double half = kNormalQuantile95 * s.std / std::sqrt(static_cast<double>(s.n));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

std::optional<double> estimate_transition(std::span<const StatsSummary> summaries, double level) {
  if (summaries.empty()) return std::nullopt;
  if (summaries.front().mean >= level) return summaries.front().r;
  for (std::size_t k = 1; k < summaries.size(); ++k) {
    const auto& lo = summaries[k - 1];
    const auto& hi = summaries[k];
    if (hi.r < lo.r) throw std::invalid_argument("estimate_transition: summaries not sorted by r");
    if (hi.mean >= level) {
      const double f = (level - lo.mean) / (hi.mean - lo.mean);
      return lo.r + f * (hi.r - lo.r);
    }
  }
  return std::nullopt;
}

}  // namespace spgg
