#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Canonical units everywhere past ingestion: current in mA, voltage in V,
// power in mW, energy in mJ, time in seconds.

namespace autopower {

struct PowerSample {
  std::int64_t timestamp = 0;  // seconds since trace start
  double current_ma = 0.0;
  double voltage_v = 0.0;
  double power_mw = 0.0;
};

struct PowerSeries {
  std::vector<PowerSample> samples;
  double dt = 1.0;

  // Builds samples from parallel current/voltage channels on a 1 Hz grid.
  static PowerSeries from_channels(std::span<const double> current_ma,
                                   std::span<const double> voltage_v, double dt = 1.0);
  std::vector<double> powers() const;
};

// mA x V = mW. Current may be negative while charging.
double instantaneous_power(double current_ma, double voltage_v);

// Left Riemann sum of power over the fixed step, in mJ.
double energy_of_series(const PowerSeries& series);
double energy_of_powers(std::span<const double> power_mw, double dt = 1.0);

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual);

}  // namespace autopower
