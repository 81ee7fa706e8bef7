#include "autopower/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "autopower/core.hpp"
#include "autopower/error.hpp"
#include "autopower/zip.hpp"

namespace autopower {

std::optional<std::size_t> FeatureMatrix::index_of(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names.begin());
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
  FeatureMatrix out;
  for (auto c : columns) out.feature_names.push_back(feature_names.at(c));
  out.X = X.select_columns(columns);
  out.y = y;
  if (has_missing()) {
    out.missing.resize(n() * columns.size());
    bool any = false;
    for (std::size_t r = 0; r < n(); ++r) {
      for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto flag = missing[r * p() + columns[j]];
        out.missing[r * columns.size() + j] = flag;
        any = any || flag;
      }
    }
    if (!any) out.missing.clear();
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.X = X.select_rows(rows);
  out.y.reserve(rows.size());
  for (auto r : rows) out.y.push_back(y.at(r));
  if (has_missing()) {
    out.missing.resize(rows.size() * p());
    bool any = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy_n(missing.begin() + static_cast<std::ptrdiff_t>(rows[i] * p()), p(),
                  out.missing.begin() + static_cast<std::ptrdiff_t>(i * p()));
    }
    for (auto f : out.missing) any = any || f;
    if (!any) out.missing.clear();
  }
  return out;
}

FeatureMatrix FeatureMatrix::without_feature(const std::string& name) const {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < p(); ++c) {
    if (feature_names[c] != name) keep.push_back(c);
  }
  return select_columns(keep);
}

void FeatureMatrix::validate() const {
  if (feature_names.size() != X.cols()) throw Error(ErrorKind::shape, "ingest", "feature names do not match columns");
  if (y.size() != X.rows()) throw Error(ErrorKind::shape, "ingest", "target length does not match rows");
  if (!missing.empty() && missing.size() != X.rows() * X.cols()) {
    throw Error(ErrorKind::shape, "ingest", "missing mask does not match matrix shape");
  }
}

namespace ingest {

namespace {

constexpr std::array<ColumnSpec, 33> kCanonical{{
    {"timestamp_s", true},       {"cpu_freq_khz", true},       {"screen", false},
    {"wifi", false},             {"radio", false},             {"bluetooth", false},
    {"current_app", false},      {"battery_charge_pct", true}, {"cpu_usage_pct", true},
    {"cpu_temp_c", true},        {"mobile_signal_dbm", true},  {"wifi_signal_dbm", true},
    {"mobile_rx_bytes", true},   {"mobile_tx_bytes", true},    {"wifi_rx_bytes", true},
    {"wifi_tx_bytes", true},     {"disk_kb_read_per_s", true}, {"disk_kb_write_per_s", true},
    {"disk_kb_read", true},      {"disk_kb_write", true},      {"swap_in", true},
    {"swap_out", true},          {"context_switches", true},   {"red_mean", true},
    {"red_std", true},           {"green_mean", true},         {"green_std", true},
    {"blue_mean", true},         {"blue_std", true},           {"brightness", true},
    {"orientation", false},      {"current_ma", true},         {"voltage_v", true},
}};

constexpr std::array<std::string_view, 24> kPredictors{{
    "cpu_freq_khz",     "cpu_usage_pct",      "cpu_temp_c",          "mobile_signal_dbm",
    "wifi_signal_dbm",  "mobile_rx_bytes",    "mobile_tx_bytes",     "wifi_rx_bytes",
    "wifi_tx_bytes",    "disk_kb_read_per_s", "disk_kb_write_per_s", "disk_kb_read",
    "disk_kb_write",    "swap_in",            "swap_out",            "context_switches",
    "red_mean",         "red_std",            "green_mean",          "green_std",
    "blue_mean",        "blue_std",           "brightness",          "orientation",
}};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NaN" || s == "nan" || s == "NA" || s == "null" || s == "None";
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::format, "ingest", "unterminated quoted field");
  fields.emplace_back(trim(cur));
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

const ColumnSpec* canonical(std::string_view name) {
  for (const auto& c : kCanonical) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::span<const ColumnSpec> canonical_columns() { return kCanonical; }
std::span<const std::string_view> predictor_columns() { return kPredictors; }

std::vector<bool> TraceColumn::missing_mask() const {
  std::vector<bool> mask;
  if (numeric) {
    mask.reserve(values.size());
    for (double v : values) mask.push_back(std::isnan(v));
  } else {
    mask.reserve(text.size());
    for (const auto& t : text) mask.push_back(t.empty());
  }
  return mask;
}

std::vector<std::string> RawTrace::header() const {
  std::vector<std::string> h;
  for (const auto& c : columns) h.push_back(c.name);
  return h;
}

const TraceColumn* RawTrace::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

TraceColumn* RawTrace::find(std::string_view name) {
  for (auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::uint8_t> decompress_upload(std::span<const std::uint8_t> payload) {
  auto entries = zip::read_archive(payload);
  if (entries.empty()) throw Error(ErrorKind::format, "ingest", "archive has no entries");
  if (entries.size() > 1) {
    throw Error(ErrorKind::format, "ingest",
                "archive has " + std::to_string(entries.size()) + " entries, expected exactly one");
  }
  return std::move(entries.front().data);
}

RawTrace parse_trace(std::string_view csv, std::string source_id) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw Error(ErrorKind::empty_input, "ingest", "CSV has no header row");
  const auto header = split_record(lines.front());

  RawTrace trace;
  trace.source_id = std::move(source_id);
  std::set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) throw Error(ErrorKind::format, "ingest", "empty column name in header");
    if (!seen.insert(name).second) throw Error(ErrorKind::format, "ingest", "duplicate column '" + name + "'");
    TraceColumn col;
    col.name = name;
    trace.columns.push_back(std::move(col));
  }
  for (auto mandatory : {kCurrent, kVoltage}) {
    if (!trace.find(mandatory)) {
      throw Error(ErrorKind::schema, "ingest", "missing mandatory column '" + std::string(mandatory) + "'");
    }
  }

  std::vector<std::vector<std::string>> cells(header.size());
  std::size_t rows = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    auto fields = split_record(lines[li]);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::format, "ingest",
                  "line " + std::to_string(li + 1) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) cells[c].push_back(std::move(fields[c]));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::empty_input, "ingest", "CSV has no data rows");
  trace.rows = rows;

  for (std::size_t c = 0; c < header.size(); ++c) {
    auto& col = trace.columns[c];
    const ColumnSpec* spec = canonical(col.name);
    bool numeric;
    if (spec) {
      numeric = spec->numeric;
    } else {
      numeric = true;
      double tmp;
      for (const auto& cell : cells[c]) {
        if (!is_missing_token(cell) && !parse_double(cell, tmp)) {
          numeric = false;
          break;
        }
      }
    }
    col.numeric = numeric;
    if (numeric) {
      col.values.reserve(rows);
      for (const auto& cell : cells[c]) {
        double v;
        col.values.push_back(!is_missing_token(cell) && parse_double(cell, v) ? v : kNaN);
      }
    } else {
      col.text.reserve(rows);
      for (auto& cell : cells[c]) col.text.push_back(is_missing_token(cell) ? std::string() : std::move(cell));
    }
  }
  return trace;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string write_trace_csv(const RawTrace& trace) {
  std::string out;
  for (std::size_t c = 0; c < trace.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += trace.columns[c].name;
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < trace.rows; ++r) {
    for (std::size_t c = 0; c < trace.columns.size(); ++c) {
      if (c) out.push_back(',');
      const auto& col = trace.columns[c];
      out += col.numeric ? format_number(col.values[r]) : quote_if_needed(col.text[r]);
    }
    out.push_back('\n');
  }
  return out;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double encode_orientation(std::string_view value) {
  std::string lower(value);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "portrait") return 0.0;
  if (lower == "landscape") return 1.0;
  return kNaN;
}

FeatureMatrix derive_features(const RawTrace& trace, DeriveReport* report) {
  const TraceColumn* current = trace.find(kCurrent);
  const TraceColumn* voltage = trace.find(kVoltage);
  if (!current || !voltage || !current->numeric || !voltage->numeric) {
    throw Error(ErrorKind::schema, "ingest", "trace lacks numeric current and voltage channels");
  }

  struct Source {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Source> sources;
  for (auto name : kPredictors) {
    const TraceColumn* col = trace.find(name);
    if (!col) continue;
    Source s;
    if (name == kOrientation) {
      s.name = std::string(name);
      s.values.reserve(trace.rows);
      if (col->numeric) {
        for (double v : col->values) s.values.push_back(v == 0.0 || v == 1.0 ? v : kNaN);
      } else {
        for (const auto& t : col->text) s.values.push_back(encode_orientation(t));
      }
    } else {
      if (!col->numeric) continue;
      if (name == kMobileSignalDbm) {
        s.name = std::string(kMobileSignalMw);
        s.values.reserve(trace.rows);
        for (double v : col->values) s.values.push_back(std::isnan(v) ? kNaN : dbm_to_mw(v));
      } else {
        s.name = std::string(name);
        s.values = col->values;
      }
    }
    sources.push_back(std::move(s));
  }

  DeriveReport local;
  local.input_rows = trace.rows;
  for (const auto& col : trace.columns) {
    const bool used = col.name == kCurrent || col.name == kVoltage ||
                      std::find(kPredictors.begin(), kPredictors.end(), col.name) != kPredictors.end();
    if (!used) local.ignored_columns.push_back(col.name);
  }

  std::vector<std::size_t> keep;
  std::vector<double> power;
  for (std::size_t r = 0; r < trace.rows; ++r) {
    const double i = current->values[r];
    const double u = voltage->values[r];
    if (std::isnan(i) || std::isnan(u) || u < 0.0) continue;
    keep.push_back(r);
    power.push_back(instantaneous_power(i, u));
  }
  local.dropped_rows = trace.rows - keep.size();
  if (keep.empty()) throw Error(ErrorKind::empty_input, "ingest", "every row lacks current or voltage");

  FeatureMatrix m;
  for (const auto& s : sources) m.feature_names.push_back(s.name);
  m.X = Matrix(keep.size(), sources.size());
  m.y = std::move(power);
  bool any_missing = false;
  std::vector<std::uint8_t> mask(keep.size() * sources.size(), 0);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t c = 0; c < sources.size(); ++c) {
      const double v = sources[c].values[keep[i]];
      if (std::isnan(v)) {
        mask[i * sources.size() + c] = 1;
        any_missing = true;
      } else {
        m.X(i, c) = v;
      }
    }
  }
  if (any_missing) m.missing = std::move(mask);
  if (report) *report = std::move(local);
  return m;
}

std::string write_feature_csv(const FeatureMatrix& m) {
  std::string out;
  for (const auto& name : m.feature_names) {
    out += name;
    out.push_back(',');
  }
  out += kPowerTarget;
  out.push_back('\n');
  for (std::size_t r = 0; r < m.n(); ++r) {
    for (std::size_t c = 0; c < m.p(); ++c) {
      if (!m.is_missing(r, c)) out += format_number(m.X(r, c));
      out.push_back(',');
    }
    out += format_number(m.y[r]);
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix read_feature_csv(std::string_view csv) {
  const auto lines = split_lines(csv);
  if (lines.empty()) throw Error(ErrorKind::empty_input, "ingest", "feature CSV has no header");
  const auto header = split_record(lines.front());
  if (header.empty() || header.back() != kPowerTarget) {
    throw Error(ErrorKind::schema, "ingest", "feature CSV must end with a power_mw column");
  }
  const std::size_t p = header.size() - 1;
  FeatureMatrix m;
  m.feature_names.assign(header.begin(), header.end() - 1);
  std::vector<double> data;
  std::vector<std::uint8_t> mask;
  bool any_missing = false;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_record(lines[li]);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::format, "ingest", "feature CSV line " + std::to_string(li + 1) + " has wrong arity");
    }
    for (std::size_t c = 0; c < p; ++c) {
      double v = 0.0;
      if (is_missing_token(fields[c])) {
        data.push_back(0.0);
        mask.push_back(1);
        any_missing = true;
      } else if (parse_double(fields[c], v)) {
        data.push_back(v);
        mask.push_back(0);
      } else {
        throw Error(ErrorKind::format, "ingest", "non-numeric cell '" + fields[c] + "'");
      }
    }
    double target;
    if (!parse_double(fields[p], target)) {
      throw Error(ErrorKind::format, "ingest", "non-numeric power_mw on line " + std::to_string(li + 1));
    }
    m.y.push_back(target);
  }
  if (m.y.empty()) throw Error(ErrorKind::empty_input, "ingest", "feature CSV has no data rows");
  m.X = Matrix(m.y.size(), p, std::move(data));
  if (any_missing) m.missing = std::move(mask);
  return m;
}

}  // namespace ingest
}  // namespace autopower
