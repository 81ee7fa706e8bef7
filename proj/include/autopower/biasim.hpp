#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "autopower/ingest.hpp"
#include "vendor_json.hpp"

namespace autopower::biasim {

// Lengths of the maximal runs of exactly-equal consecutive readings.
struct RunLengthPattern {
  std::vector<std::size_t> run_lengths;

  std::size_t total() const;
  double mean_run_length() const;
};

RunLengthPattern extract_run_lengths(std::span<const double> series);

// Walks the pattern cyclically over `series`; each run of length L repeats
// the run's first true value L times. Output length equals input length.
std::vector<double> apply_bias(std::span<const double> series, const RunLengthPattern& pattern);

// A stale-reading gauge pattern with run lengths drawn uniformly from
// [min_run, max_run], `runs` entries long.
RunLengthPattern random_fault_pattern(std::uint64_t seed, std::size_t min_run, std::size_t max_run, std::size_t runs);

struct PowerLaw {
  double intercept_mw = 180.0;
  // Coefficients over derived predictor names (mW per unit).
  std::vector<std::pair<std::string, double>> coefficients = {
      {"brightness", 2.2}, {"cpu_usage_pct", 9.5}, {"cpu_freq_khz", 0.00012}, {"disk_kb_write_per_s", 0.15}};
  double noise_sigma_mw = 25.0;
};

struct SynthConfig {
  std::size_t duration_s = 3600;
  std::uint64_t seed = 1;
  double mean_session_s = 90.0;
  double start_voltage_v = 4.35;
  double end_voltage_v = 3.60;
  PowerLaw power_law;
  std::optional<RunLengthPattern> gauge_fault;

  void validate() const;
};

inline constexpr std::size_t kMinSynthDuration = 62;

// 1 Hz usage log in the canonical column layout. An app-session state
// machine drives the device features; power follows the configured linear
// law plus Gaussian noise and the current channel is solved from it. A
// configured gauge fault is applied to the current channel.
ingest::RawTrace synth_trace(const SynthConfig& config);

// Noise-free law value for one row of derived predictors.
double law_power(const PowerLaw& law, const std::vector<std::string>& names, std::span<const double> row);

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);
nlohmann::json to_json(const RunLengthPattern& pattern);
RunLengthPattern pattern_from_json(const nlohmann::json& j);

}  // namespace autopower::biasim
