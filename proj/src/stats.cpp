#include "autopower/stats.hpp"

#include <algorithm>
#include <cmath>

#include "autopower/error.hpp"

namespace autopower::stats {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::empty_input, "core", "percentile of empty list");
  if (q < 0.0 || q > 100.0) throw Error(ErrorKind::parameter, "core", "percentile outside [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::empty_input, "core", "mean of empty list");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
  const double m = mean(values);
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return s / static_cast<double>(values.size());
}

Quartiles quartiles(std::span<const double> values) {
  Quartiles q;
  q.median = median(values);
  q.q25 = percentile(values, 25.0);
  q.q75 = percentile(values, 75.0);
  q.iiq = q.q75 - q.q25;
  q.low = q.median - 1.5 * q.iiq;
  q.high = q.median + 1.5 * q.iiq;
  return q;
}

}  // namespace autopower::stats
