#include "autopower/core.hpp"

#include <cmath>

#include "autopower/error.hpp"
#include "autopower/kernels.hpp"

namespace autopower {

double instantaneous_power(double current_ma, double voltage_v) {
  if (!std::isfinite(current_ma) || !std::isfinite(voltage_v)) {
    throw Error(ErrorKind::invalid_sample, "core", "non-finite current or voltage");
  }
  if (voltage_v < 0.0) throw Error(ErrorKind::invalid_sample, "core", "negative voltage");
  return current_ma * voltage_v;
}

PowerSeries PowerSeries::from_channels(std::span<const double> current_ma,
                                       std::span<const double> voltage_v, double dt) {
  if (current_ma.size() != voltage_v.size()) {
    throw Error(ErrorKind::shape, "core", "current and voltage channels differ in length");
  }
  PowerSeries series;
  series.dt = dt;
  series.samples.reserve(current_ma.size());
  for (std::size_t i = 0; i < current_ma.size(); ++i) {
    series.samples.push_back({static_cast<std::int64_t>(i), current_ma[i], voltage_v[i],
                              instantaneous_power(current_ma[i], voltage_v[i])});
  }
  return series;
}

std::vector<double> PowerSeries::powers() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.power_mw);
  return out;
}

double energy_of_powers(std::span<const double> power_mw, double dt) {
  if (power_mw.empty()) throw Error(ErrorKind::empty_input, "core", "energy of empty series");
  if (!(dt > 0.0)) throw Error(ErrorKind::parameter, "core", "step must be positive");
  return kernels::sum(power_mw) * dt;
}

double energy_of_series(const PowerSeries& series) {
  if (series.samples.empty()) throw Error(ErrorKind::empty_input, "core", "energy of empty series");
  for (std::size_t i = 1; i < series.samples.size(); ++i) {
    if (series.samples[i].timestamp <= series.samples[i - 1].timestamp) {
      throw Error(ErrorKind::invalid_sample, "core", "timestamps not strictly increasing");
    }
  }
  const auto powers = series.powers();
  return energy_of_powers(powers, series.dt);
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorKind::shape, "core", "prediction and target lengths differ");
  }
  if (predicted.empty()) throw Error(ErrorKind::empty_input, "core", "MAE of empty vectors");
  return kernels::sum_abs_diff(predicted, actual) / static_cast<double>(predicted.size());
}

}  // namespace autopower
