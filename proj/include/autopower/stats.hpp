#pragma once

#include <span>
#include <vector>

namespace autopower::stats {

// Percentile with linear interpolation between closest ranks (numpy's
// default "linear" method). q in [0, 100]. Input need not be sorted.
double percentile(std::span<const double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);
// Population variance (divisor n).
double variance(std::span<const double> values);

struct Quartiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iiq = 0.0;
  double low = 0.0;   // median - 1.5 * iiq
  double high = 0.0;  // median + 1.5 * iiq
};

Quartiles quartiles(std::span<const double> values);

}  // namespace autopower::stats
