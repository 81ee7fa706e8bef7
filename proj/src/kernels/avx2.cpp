#include <immintrin.h>

#include <cmath>

#include "autopower/kernels.hpp"

namespace autopower::kernels::avx2 {

namespace {

inline double finish(__m256d acc, const double* tail_terms, std::size_t tail) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; j < tail; ++j) lane[j] += tail_terms[j];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) {
    const double d = a[i + j] - b[i + j];
    tail[j] = d * d;
  }
  return finish(acc, tail, rest);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_and_pd(d, abs_mask));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) tail[j] = std::fabs(a[i + j] - b[i + j]);
  return finish(acc, tail, rest);
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  return finish(acc, a + i, n - i);
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double tail[3];
  const std::size_t rest = n - i;
  for (std::size_t j = 0; j < rest; ++j) tail[j] = a[i + j] * b[i + j];
  return finish(acc, tail, rest);
}

}  // namespace autopower::kernels::avx2
