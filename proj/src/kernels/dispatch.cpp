#include <atomic>
#include <cstdlib>
#include <string>

#include "autopower/error.hpp"
#include "autopower/kernels.hpp"

namespace autopower::kernels {

namespace {

struct Table {
  double (*squared_distance)(const double*, const double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{scalar::squared_distance, scalar::sum_abs_diff, scalar::sum, scalar::dot};
#ifdef AUTOPOWER_HAVE_AVX2_KERNELS
constexpr Table kAvx2{avx2::squared_distance, avx2::sum_abs_diff, avx2::sum, avx2::dot};
#endif
#ifdef AUTOPOWER_HAVE_NEON_KERNELS
constexpr Table kNeon{neon::squared_distance, neon::sum_abs_diff, neon::sum, neon::dot};
#endif

const Table* table_for(Isa isa) {
  switch (isa) {
#ifdef AUTOPOWER_HAVE_AVX2_KERNELS
    case Isa::avx2: return &kAvx2;
#endif
#ifdef AUTOPOWER_HAVE_NEON_KERNELS
    case Isa::neon: return &kNeon;
#endif
    default: return &kScalar;
  }
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorKind::shape, "core", "kernel operands differ in length");
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "scalar";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#ifdef AUTOPOWER_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#ifdef AUTOPOWER_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_isa() {
  if (const char* env = std::getenv("AUTOPOWER_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == to_string(isa)) return isa_available(isa) ? isa : Isa::scalar;
    }
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool force_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return table_for(active_isa())->squared_distance(a.data(), b.data(), a.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return table_for(active_isa())->sum_abs_diff(a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return table_for(active_isa())->sum(a.data(), a.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return table_for(active_isa())->dot(a.data(), b.data(), a.size());
}

}  // namespace autopower::kernels
