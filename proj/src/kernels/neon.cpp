#include <arm_neon.h>

#include <cmath>

#include "autopower/kernels.hpp"

// Two float64x2 registers hold lanes {0,1} and {2,3} of the shared 4-lane order.

namespace autopower::kernels::neon {

namespace {

inline double finish(float64x2_t lo, float64x2_t hi, const double* tail_terms, std::size_t tail) {
  double lane[4] = {vgetq_lane_f64(lo, 0), vgetq_lane_f64(lo, 1), vgetq_lane_f64(hi, 0),
                    vgetq_lane_f64(hi, 1)};
  for (std::size_t j = 0; j < tail; ++j) lane[j] += tail_terms[j];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) {
    const double d = a[i + j] - b[i + j];
    tail[j] = d * d;
  }
  return finish(lo, hi, tail, rest);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
    hi = vaddq_f64(hi, vabsq_f64(vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2))));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) tail[j] = std::fabs(a[i + j] - b[i + j]);
  return finish(lo, hi, tail, rest);
}

double sum(const double* a, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vld1q_f64(a + i));
    hi = vaddq_f64(hi, vld1q_f64(a + i + 2));
  }
  return finish(lo, hi, a + i, n - i);
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) tail[j] = a[i + j] * b[i + j];
  return finish(lo, hi, tail, rest);
}

}  // namespace autopower::kernels::neon
