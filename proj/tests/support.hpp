#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "autopower/feature_matrix.hpp"
#include "autopower/ingest.hpp"
#include "autopower/matrix.hpp"

namespace testing_support {

// Independent reference implementations. They share no code with the library
// and favour the plainest O(n^2) formulation.
namespace oracle {

std::vector<double> lof(const autopower::Matrix& points, std::size_t k);

// Bin codes by counting: a value's first sorted position is the number of
// values strictly below it.
std::vector<std::size_t> quantile_codes(const std::vector<double>& values, std::size_t bins);

// H(A) + H(B) - H(A, B) from map-based counts.
double mutual_information(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

struct BestSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = 0.0;
};

// Tries every midpoint between consecutive distinct values of every feature,
// partitions explicitly and compares summed squared errors.
BestSplit best_split(const autopower::Matrix& X, const std::vector<double>& y, const std::vector<std::size_t>& rows,
                     std::size_t min_leaf);

double percentile(std::vector<double> values, double q);

// Upper-alpha point of the studentized range with infinite df, divided by sqrt 2.
double nemenyi_critical(std::size_t k, double alpha);

}  // namespace oracle

std::filesystem::path temp_dir(const std::string& tag);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};
CommandResult run(const std::string& command);
std::string cli();

// Synthetic linear-law trace with the given noise and length.
autopower::ingest::RawTrace linear_trace(std::size_t rows, std::uint64_t seed, double noise_sigma_mw);
std::string zipped_csv(const autopower::ingest::RawTrace& trace);

}  // namespace testing_support
