#include "autopower/biasim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "autopower/error.hpp"
#include "autopower/rng.hpp"

namespace autopower::biasim {

using nlohmann::json;

std::size_t RunLengthPattern::total() const {
  std::size_t s = 0;
  for (auto l : run_lengths) s += l;
  return s;
}

double RunLengthPattern::mean_run_length() const {
  return run_lengths.empty() ? 0.0 : static_cast<double>(total()) / static_cast<double>(run_lengths.size());
}

RunLengthPattern extract_run_lengths(std::span<const double> series) {
  RunLengthPattern p;
  std::size_t i = 0;
  while (i < series.size()) {
    std::size_t j = i + 1;
    while (j < series.size() && series[j] == series[i]) ++j;
    p.run_lengths.push_back(j - i);
    i = j;
  }
  return p;
}

std::vector<double> apply_bias(std::span<const double> series, const RunLengthPattern& pattern) {
  if (pattern.run_lengths.empty()) throw Error(ErrorKind::parameter, "biasim", "empty run-length pattern");
  if (std::find(pattern.run_lengths.begin(), pattern.run_lengths.end(), 0u) != pattern.run_lengths.end()) {
    throw Error(ErrorKind::parameter, "biasim", "run lengths must be positive");
  }
  std::vector<double> out;
  out.reserve(series.size());
  std::size_t run = 0;
  while (out.size() < series.size()) {
    const double held = series[out.size()];
    const std::size_t len = std::min(pattern.run_lengths[run % pattern.run_lengths.size()], series.size() - out.size());
    out.insert(out.end(), len, held);
    ++run;
  }
  return out;
}

RunLengthPattern random_fault_pattern(std::uint64_t seed, std::size_t min_run, std::size_t max_run, std::size_t runs) {
  if (min_run < 1 || max_run < min_run || runs < 1) {
    throw Error(ErrorKind::parameter, "biasim", "fault pattern needs 1 <= min_run <= max_run and runs >= 1");
  }
  Rng rng(seed);
  RunLengthPattern p;
  for (std::size_t i = 0; i < runs; ++i) {
    p.run_lengths.push_back(min_run + static_cast<std::size_t>(rng.index(max_run - min_run + 1)));
  }
  return p;
}

void SynthConfig::validate() const {
  if (duration_s < kMinSynthDuration) {
    throw Error(ErrorKind::parameter, "biasim", "duration must be at least " + std::to_string(kMinSynthDuration) + " s");
  }
  if (!(power_law.noise_sigma_mw >= 0.0)) throw Error(ErrorKind::parameter, "biasim", "noise sigma must be >= 0");
  if (!(mean_session_s >= 1.0)) throw Error(ErrorKind::parameter, "biasim", "mean session length must be >= 1 s");
  if (!(start_voltage_v > 0.0 && end_voltage_v > 0.0)) throw Error(ErrorKind::parameter, "biasim", "voltages must be positive");
  if (gauge_fault && gauge_fault->run_lengths.empty()) throw Error(ErrorKind::parameter, "biasim", "empty gauge fault pattern");
}

namespace {

struct AppProfile {
  const char* package;
  bool screen_on;
  double brightness_lo, brightness_hi;
  double cpu_freq_khz;
  double cpu_usage_mean, cpu_usage_sd;
  double rx_bytes_per_s, tx_bytes_per_s;
  double disk_read_kb_per_s, disk_write_kb_per_s;
  double landscape_probability;
  double weight;
};

constexpr std::array<AppProfile, 6> kApps{{
    {"idle", false, 0, 0, 300000, 3, 2, 200, 100, 1, 2, 0.0, 3.0},
    {"com.android.launcher", true, 80, 180, 1100000, 15, 6, 1000, 400, 20, 10, 0.0, 2.0},
    {"com.android.chrome", true, 90, 200, 1500000, 35, 12, 60000, 5000, 150, 60, 0.1, 2.0},
    {"com.google.android.youtube", true, 120, 255, 1200000, 25, 6, 250000, 8000, 40, 200, 0.75, 3.0},
    {"com.example.game", true, 150, 255, 2000000, 70, 15, 5000, 2000, 80, 20, 0.8, 1.0},
    {"com.spotify.music", false, 0, 0, 800000, 10, 3, 20000, 500, 10, 2, 0.0, 1.0},
}};

std::size_t pick_app(Rng& rng, std::size_t current) {
  double total = 0.0;
  for (std::size_t i = 0; i < kApps.size(); ++i) total += i == current ? 0.0 : kApps[i].weight;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < kApps.size(); ++i) {
    if (i == current) continue;
    u -= kApps[i].weight;
    if (u < 0.0) return i;
  }
  return current == 0 ? 1 : 0;
}

struct Session {
  std::size_t app = 0;
  std::size_t remaining = 0;
  double brightness = 0.0;
  bool landscape = false;
  double colour_mean[3] = {0, 0, 0};
  double colour_std[3] = {0, 0, 0};
};

}  // namespace

double law_power(const PowerLaw& law, const std::vector<std::string>& names, std::span<const double> row) {
  double p = law.intercept_mw;
  for (const auto& [name, coef] : law.coefficients) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::schema, "biasim", "power law names unknown feature '" + name + "'");
    p += coef * row[static_cast<std::size_t>(it - names.begin())];
  }
  return p;
}

ingest::RawTrace synth_trace(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.duration_s;
  Rng rng(config.seed);

  ingest::RawTrace trace;
  trace.rows = n;
  trace.source_id = "synth-" + std::to_string(config.seed);
  for (const auto& spec : ingest::canonical_columns()) {
    ingest::TraceColumn col;
    col.name = std::string(spec.name);
    col.numeric = spec.numeric;
    if (spec.numeric) col.values.resize(n);
    else col.text.resize(n);
    trace.columns.push_back(std::move(col));
  }
  auto num = [&](std::string_view name) -> std::vector<double>& { return trace.find(name)->values; };
  auto txt = [&](std::string_view name) -> std::vector<std::string>& { return trace.find(name)->text; };

  const bool wifi_on = rng.bernoulli(0.8);
  const bool bluetooth_on = rng.bernoulli(0.3);
  const char* radio = rng.bernoulli(0.7) ? "4G" : "3G";
  double temp = 32.0;
  double mobile_dbm = -95.0, wifi_dbm = -55.0;
  double mobile_rx = 0, mobile_tx = 0, wifi_rx = 0, wifi_tx = 0, kb_read = 0, kb_write = 0;
  Session s;

  // Derived predictor names/values, used to evaluate the power law per row.
  const std::vector<std::string> derived_names = {
      "cpu_freq_khz",     "cpu_usage_pct",      "cpu_temp_c",          "mobile_signal_mw",
      "wifi_signal_dbm",  "mobile_rx_bytes",    "mobile_tx_bytes",     "wifi_rx_bytes",
      "wifi_tx_bytes",    "disk_kb_read_per_s", "disk_kb_write_per_s", "disk_kb_read",
      "disk_kb_write",    "swap_in",            "swap_out",            "context_switches",
      "red_mean",         "red_std",            "green_mean",          "green_std",
      "blue_mean",        "blue_std",           "brightness",          "orientation"};
  std::vector<double> derived(derived_names.size());
  std::vector<double> power(n);

  for (std::size_t t = 0; t < n; ++t) {
    if (s.remaining == 0) {
      s.app = pick_app(rng, s.app);
      const auto& app = kApps[s.app];
      s.remaining = 1 + static_cast<std::size_t>(rng.exponential(config.mean_session_s));
      s.brightness = app.screen_on ? std::round(rng.uniform(app.brightness_lo, app.brightness_hi)) : 0.0;
      s.landscape = rng.bernoulli(app.landscape_probability);
      for (int c = 0; c < 3; ++c) {
        s.colour_mean[c] = app.screen_on ? rng.uniform(20.0, 230.0) : 0.0;
        s.colour_std[c] = app.screen_on ? rng.uniform(10.0, 80.0) : 0.0;
      }
    }
    --s.remaining;
    const auto& app = kApps[s.app];

    const double freq = std::round(app.cpu_freq_khz * rng.uniform(0.85, 1.15) / 1000.0) * 1000.0;
    const double usage = std::clamp(std::round(rng.normal(app.cpu_usage_mean, app.cpu_usage_sd) * 10.0) / 10.0, 0.0, 100.0);
    temp += 0.05 * (30.0 + 0.25 * usage - temp) + rng.normal(0.0, 0.1);
    const double temp_reading = std::round(temp * 10.0) / 10.0;
    mobile_dbm = std::clamp(mobile_dbm + std::round(rng.normal(0.0, 0.7)), -120.0, -60.0);
    wifi_dbm = std::clamp(wifi_dbm + std::round(rng.normal(0.0, 0.7)), -90.0, -30.0);
    const double rx = std::round(rng.exponential(app.rx_bytes_per_s));
    const double tx = std::round(rng.exponential(app.tx_bytes_per_s));
    if (wifi_on) {
      wifi_rx += rx;
      wifi_tx += tx;
    } else {
      mobile_rx += rx;
      mobile_tx += tx;
    }
    const double read_rate = std::round(rng.exponential(app.disk_read_kb_per_s));
    const double write_rate = std::round(rng.exponential(app.disk_write_kb_per_s));
    kb_read += read_rate;
    kb_write += write_rate;
    const double swap_in = rng.bernoulli(0.02) ? static_cast<double>(1 + rng.index(8)) : 0.0;
    const double swap_out = rng.bernoulli(0.01) ? static_cast<double>(1 + rng.index(8)) : 0.0;
    const double ctx = std::max(0.0, std::round(200.0 + 40.0 * usage + rng.normal(0.0, 50.0)));
    double colour[6];
    for (int c = 0; c < 3; ++c) {
      colour[2 * c] = app.screen_on ? std::clamp(std::round(s.colour_mean[c] + rng.normal(0.0, 6.0)), 0.0, 255.0) : 0.0;
      colour[2 * c + 1] = app.screen_on ? std::clamp(std::round(s.colour_std[c] + rng.normal(0.0, 2.0)), 0.0, 128.0) : 0.0;
    }

    num("timestamp_s")[t] = static_cast<double>(t);
    num("cpu_freq_khz")[t] = freq;
    txt("screen")[t] = app.screen_on ? "on" : "off";
    txt("wifi")[t] = wifi_on ? "on" : "off";
    txt("radio")[t] = radio;
    txt("bluetooth")[t] = bluetooth_on ? "on" : "off";
    txt("current_app")[t] = app.package;
    num("battery_charge_pct")[t] = std::round(100.0 - 60.0 * static_cast<double>(t) / static_cast<double>(n));
    num("cpu_usage_pct")[t] = usage;
    num("cpu_temp_c")[t] = temp_reading;
    num("mobile_signal_dbm")[t] = mobile_dbm;
    num("wifi_signal_dbm")[t] = wifi_dbm;
    num("mobile_rx_bytes")[t] = mobile_rx;
    num("mobile_tx_bytes")[t] = mobile_tx;
    num("wifi_rx_bytes")[t] = wifi_rx;
    num("wifi_tx_bytes")[t] = wifi_tx;
    num("disk_kb_read_per_s")[t] = read_rate;
    num("disk_kb_write_per_s")[t] = write_rate;
    num("disk_kb_read")[t] = kb_read;
    num("disk_kb_write")[t] = kb_write;
    num("swap_in")[t] = swap_in;
    num("swap_out")[t] = swap_out;
    num("context_switches")[t] = ctx;
    num("red_mean")[t] = colour[0];
    num("red_std")[t] = colour[1];
    num("green_mean")[t] = colour[2];
    num("green_std")[t] = colour[3];
    num("blue_mean")[t] = colour[4];
    num("blue_std")[t] = colour[5];
    num("brightness")[t] = s.brightness;
    txt("orientation")[t] = s.landscape ? "Landscape" : "Portrait";

    derived = {freq,      usage,     temp_reading, ingest::dbm_to_mw(mobile_dbm), wifi_dbm,    mobile_rx,
               mobile_tx, wifi_rx,   wifi_tx,      read_rate,                     write_rate,  kb_read,
               kb_write,  swap_in,   swap_out,     ctx,                           colour[0],   colour[1],
               colour[2], colour[3], colour[4],    colour[5],                     s.brightness, s.landscape ? 1.0 : 0.0};
    double p = law_power(config.power_law, derived_names, derived);
    if (config.power_law.noise_sigma_mw > 0.0) p += rng.normal(0.0, config.power_law.noise_sigma_mw);
    power[t] = std::max(p, 1.0);
  }

  auto& voltage = num("voltage_v");
  auto& current = num("current_ma");
  for (std::size_t t = 0; t < n; ++t) {
    const double frac = static_cast<double>(t) / static_cast<double>(n);
    const double v = config.start_voltage_v - (config.start_voltage_v - config.end_voltage_v) * frac + rng.normal(0.0, 0.003);
    voltage[t] = std::round(v * 10000.0) / 10000.0;
    current[t] = power[t] / voltage[t];
  }
  if (config.gauge_fault) current = apply_bias(current, *config.gauge_fault);
  return trace;
}

json to_json(const RunLengthPattern& pattern) { return {{"run_lengths", pattern.run_lengths}}; }

RunLengthPattern pattern_from_json(const json& j) {
  RunLengthPattern p;
  p.run_lengths = j.at("run_lengths").get<std::vector<std::size_t>>();
  return p;
}

json to_json(const SynthConfig& c) {
  json coefs = json::object();
  for (const auto& [name, v] : c.power_law.coefficients) coefs[name] = v;
  json j = {{"duration_s", c.duration_s},
            {"seed", c.seed},
            {"mean_session_s", c.mean_session_s},
            {"start_voltage_v", c.start_voltage_v},
            {"end_voltage_v", c.end_voltage_v},
            {"power_law", {{"intercept_mw", c.power_law.intercept_mw}, {"coefficients", coefs},
                           {"noise_sigma_mw", c.power_law.noise_sigma_mw}}}};
  if (c.gauge_fault) j["gauge_fault"] = to_json(*c.gauge_fault);
  return j;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  c.duration_s = j.value("duration_s", c.duration_s);
  c.seed = j.value("seed", c.seed);
  c.mean_session_s = j.value("mean_session_s", c.mean_session_s);
  c.start_voltage_v = j.value("start_voltage_v", c.start_voltage_v);
  c.end_voltage_v = j.value("end_voltage_v", c.end_voltage_v);
  if (j.contains("power_law")) {
    const auto& law = j.at("power_law");
    c.power_law.intercept_mw = law.value("intercept_mw", c.power_law.intercept_mw);
    c.power_law.noise_sigma_mw = law.value("noise_sigma_mw", c.power_law.noise_sigma_mw);
    if (law.contains("coefficients")) {
      c.power_law.coefficients.clear();
      // json objects iterate in key order, which keeps the law deterministic.
      for (const auto& [name, v] : law.at("coefficients").items()) c.power_law.coefficients.emplace_back(name, v.get<double>());
    }
  }
  if (j.contains("gauge_fault")) c.gauge_fault = pattern_from_json(j.at("gauge_fault"));
  c.validate();
  return c;
}

}  // namespace autopower::biasim
