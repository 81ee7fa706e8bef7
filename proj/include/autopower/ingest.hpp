#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autopower/feature_matrix.hpp"

namespace autopower::ingest {

inline constexpr std::string_view kTimestamp = "timestamp_s";
inline constexpr std::string_view kCurrent = "current_ma";
inline constexpr std::string_view kVoltage = "voltage_v";
inline constexpr std::string_view kOrientation = "orientation";
inline constexpr std::string_view kMobileSignalDbm = "mobile_signal_dbm";
inline constexpr std::string_view kMobileSignalMw = "mobile_signal_mw";
inline constexpr std::string_view kPowerTarget = "power_mw";

struct ColumnSpec {
  std::string_view name;
  bool numeric;
};

// Header of the Devices Monitor log, in file order: timestamp, the thirty
// monitored device variables, then the current and voltage channels.
std::span<const ColumnSpec> canonical_columns();

// Columns that become predictors, in output order. `mobile_signal_dbm`
// enters as `mobile_signal_mw` and `orientation` as its 0/1 code.
std::span<const std::string_view> predictor_columns();

struct TraceColumn {
  std::string name;
  bool numeric = true;
  std::vector<double> values;     // numeric columns; NaN marks a missing cell
  std::vector<std::string> text;  // text columns; empty string marks missing

  std::vector<bool> missing_mask() const;
};

struct RawTrace {
  std::vector<TraceColumn> columns;
  std::size_t rows = 0;
  std::string source_id;

  std::vector<std::string> header() const;
  const TraceColumn* find(std::string_view name) const;
  TraceColumn* find(std::string_view name);
};

// The single entry of an uploaded zip archive.
std::vector<std::uint8_t> decompress_upload(std::span<const std::uint8_t> payload);

RawTrace parse_trace(std::string_view csv, std::string source_id = {});

// Shortest round-trip decimal form; integers print without a fraction.
std::string format_number(double v);
std::string write_trace_csv(const RawTrace& trace);

struct DeriveReport {
  std::size_t input_rows = 0;
  std::size_t dropped_rows = 0;  // rows lacking a usable current or voltage
  std::vector<std::string> ignored_columns;
};

FeatureMatrix derive_features(const RawTrace& trace, DeriveReport* report = nullptr);

// 10^(dBm/10): signal strength on the milliwatt scale.
double dbm_to_mw(double dbm);
// Portrait -> 0, Landscape -> 1, anything else -> NaN.
double encode_orientation(std::string_view value);

// Feature-matrix interchange: feature columns then `power_mw`; empty cells
// are missing.
std::string write_feature_csv(const FeatureMatrix& m);
FeatureMatrix read_feature_csv(std::string_view csv);

}  // namespace autopower::ingest
