#include <cmath>

#include "autopower/kernels.hpp"

namespace autopower::kernels::scalar {

namespace {

template <typename Term>
double lane_reduce(std::size_t n, Term term) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lane[0] += term(i);
    lane[1] += term(i + 1);
    lane[2] += term(i + 2);
    lane[3] += term(i + 3);
  }
  for (std::size_t j = 0; i < n; ++i, ++j) lane[j] += term(i);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  return lane_reduce(n, [=](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  });
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  return lane_reduce(n, [=](std::size_t i) { return std::fabs(a[i] - b[i]); });
}

double sum(const double* a, std::size_t n) {
  return lane_reduce(n, [=](std::size_t i) { return a[i]; });
}

double dot(const double* a, const double* b, std::size_t n) {
  return lane_reduce(n, [=](std::size_t i) { return a[i] * b[i]; });
}

}  // namespace autopower::kernels::scalar
