#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sys/wait.h>

#include "autopower/biasim.hpp"
#include "autopower/zip.hpp"

namespace testing_support {

namespace oracle {

std::vector<double> lof(const autopower::Matrix& points, std::size_t k) {
  const std::size_t n = points.rows(), p = points.cols();
  autopower::Matrix z(n, p);
  for (std::size_t c = 0; c < p; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += points(r, c);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (points(r, c) - mean) * (points(r, c) - mean);
    double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd == 0.0) sd = 1.0;
    for (std::size_t r = 0; r < n; ++r) z(r, c) = (points(r, c) - mean) / sd;
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t c = 0; c < p; ++c) s += (z(a, c) - z(b, c)) * (z(a, c) - z(b, c));
    return std::sqrt(s);
  };
  std::vector<std::vector<std::size_t>> nn(n);
  std::vector<double> kdist(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(dist(i, j), j);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t j = 0; j < k; ++j) nn[i].push_back(all[j].second);
    kdist[i] = all[k - 1].first;
  }
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto j : nn[i]) s += std::max(kdist[j], dist(i, j));
    lrd[i] = s == 0.0 ? INFINITY : 1.0 / (s / static_cast<double>(k));
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kdist[i] == 0.0) {
      out[i] = 1.0;
      continue;
    }
    double s = 0.0;
    for (auto j : nn[i]) s += lrd[j];
    out[i] = s / static_cast<double>(k) / lrd[i];
  }
  return out;
}

std::vector<std::size_t> quantile_codes(const std::vector<double>& values, std::size_t bins) {
  const std::size_t n = values.size();
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> codes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (distinct.size() <= bins) {
      codes[i] = static_cast<std::size_t>(std::count_if(distinct.begin(), distinct.end(), [&](double d) { return d < values[i]; }));
    } else {
      const auto below = static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [&](double d) { return d < values[i]; }));
      codes[i] = std::min(bins - 1, below * bins / n);
    }
  }
  return codes;
}

double mutual_information(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::size_t, double> ca, cb;
  std::map<std::pair<std::size_t, std::size_t>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [&](const auto& counts) {
    double h = 0.0;
    for (const auto& [key, c] : counts) h -= c / n * std::log(c / n);
    return h;
  };
  return entropy(ca) + entropy(cb) - entropy(cab);
}

BestSplit best_split(const autopower::Matrix& X, const std::vector<double>& y, const std::vector<std::size_t>& rows,
                     std::size_t min_leaf) {
  auto sse = [&](const std::vector<std::size_t>& idx) {
    double m = 0.0;
    for (auto r : idx) m += y[r];
    m /= static_cast<double>(idx.size());
    double s = 0.0;
    for (auto r : idx) s += (y[r] - m) * (y[r] - m);
    return s;
  };
  BestSplit best;
  best.sse = sse(rows);
  const double parent = best.sse;
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(X(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = 0.5 * (values[i] + values[i + 1]);
      std::vector<std::size_t> left, right;
      for (auto r : rows) (X(r, f) <= t ? left : right).push_back(r);
      if (left.size() < min_leaf || right.size() < min_leaf) continue;
      const double s = sse(left) + sse(right);
      // Strict improvement over the best so far keeps the lowest feature and threshold on ties.
      if (s < best.sse && s < parent * (1 - 1e-12)) best = {true, f, t, s};
    }
  }
  return best;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

double range_cdf(double q, std::size_t k) {
  auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  auto Phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const int steps = 8000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double z = lo + i * h;
    const double f = phi(z) * std::pow(Phi(z) - Phi(z - q), static_cast<double>(k - 1));
    s += f * (i == 0 || i == steps ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return static_cast<double>(k) * s * h / 3.0;
}

}  // namespace

double nemenyi_critical(std::size_t k, double alpha) {
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (range_cdf(mid, k) < 1.0 - alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(2.0);
}

}  // namespace oracle

std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 gen(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("autopower-" + tag + "-" + std::to_string(gen() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

CommandResult run(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string cli() { return AUTOPOWER_CLI_PATH; }

autopower::ingest::RawTrace linear_trace(std::size_t rows, std::uint64_t seed, double noise_sigma_mw) {
  autopower::biasim::SynthConfig config;
  config.duration_s = rows;
  config.seed = seed;
  config.power_law.noise_sigma_mw = noise_sigma_mw;
  return autopower::biasim::synth_trace(config);
}

std::string zipped_csv(const autopower::ingest::RawTrace& trace) {
  const auto csv = autopower::ingest::write_trace_csv(trace);
  const auto z = autopower::zip::write_single(autopower::zip::kTraceEntryName,
                                              std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
  return {z.begin(), z.end()};
}

}  // namespace testing_support
