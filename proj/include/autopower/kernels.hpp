#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Reduction kernels behind the distance, error and energy computations.
//
// Every variant accumulates in four interleaved lanes: element i goes to lane
// i % 4, and the lanes combine as (l0 + l1) + (l2 + l3). The scalar reference
// spells that order out; the vector variants reproduce it with one 4-wide
// register and no fused multiply-add, so all variants return bit-identical
// results. That property is what keeps artifacts byte-identical across hosts.

namespace autopower::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

// Best variant the running CPU supports. AUTOPOWER_SIMD=scalar|avx2|neon
// in the environment pins the choice (falls back to scalar if unsupported).
Isa detect_isa();
Isa active_isa();
// Test hook; returns false if `isa` is not available on this host.
bool force_isa(Isa isa);
bool isa_available(Isa isa);

double squared_distance(std::span<const double> a, std::span<const double> b);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);

// Raw variants, callable directly for equivalence testing. Spans must have
// equal length; the dispatching wrappers above check it.
namespace scalar {
double squared_distance(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define AUTOPOWER_HAVE_AVX2_KERNELS 1
namespace avx2 {
double squared_distance(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define AUTOPOWER_HAVE_NEON_KERNELS 1
namespace neon {
double squared_distance(const double* a, const double* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace autopower::kernels
