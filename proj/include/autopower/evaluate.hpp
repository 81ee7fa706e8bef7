#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "autopower/feature_matrix.hpp"
#include "autopower/matrix.hpp"
#include "autopower/models.hpp"
#include "autopower/stats.hpp"
#include "vendor_json.hpp"

namespace autopower::evaluate {

// Train on rows [0, train_end), test on [train_end, test_end).
struct Split {
  std::size_t train_end = 0;
  std::size_t test_end = 0;

  std::size_t test_begin() const noexcept { return train_end; }
};

struct SplitPlan {
  std::size_t n = 0;
  std::size_t n_splits = 0;
  std::vector<Split> splits;
};

// Forward-chaining splits: t = floor(n / (n_splits + 1)) test rows each, the
// remainder r = n - n_splits * t seeds the first training window.
SplitPlan time_series_splits(std::size_t n, std::size_t n_splits);

// Per-split test MAE in plan order. Persistence forecasts each test row from
// the previous row's target instead of from features.
std::vector<double> cross_validate(const models::ModelSpec& spec, const Matrix& X, std::span<const double> y,
                                   const SplitPlan& plan, const std::vector<std::string>& feature_names = {});

struct ScoreFilter {
  stats::Quartiles quartiles;
  std::vector<std::size_t> retained;  // indices strictly inside (low, high); all when iiq == 0
};

ScoreFilter filter_scores(std::span<const double> scores);

struct BenchmarkResult {
  std::string algorithm;
  std::string scenario;
  models::ModelSpec spec;
  std::vector<double> run_scores;
  std::vector<std::size_t> train_sizes;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iiq = 0.0;
  std::vector<std::size_t> retained_runs;
  std::size_t final_train_size = 0;
  models::FittedModel final_model;
};

inline constexpr std::size_t kBenchmarkRuns = 30;

// Thirty-split time-series CV, IQR filtering of the split scores, and a final
// fit on the first `final_train_size` rows, the largest training window among
// the retained splits.
BenchmarkResult thirty_run_benchmark(const models::ModelSpec& spec, const FeatureMatrix& data,
                                     std::size_t n_splits = kBenchmarkRuns);

// Average ranks, 1 for the smallest value; ties share the mean position.
std::vector<double> rank_with_ties(std::span<const double> values);

double nemenyi_q(double mean_rank_a, double mean_rank_b, std::size_t k, std::size_t n);

// Critical value of the two-tailed Nemenyi test (studentized range / sqrt 2,
// infinite degrees of freedom) for k in 2..10 and alpha in {0.05, 0.10}.
double q_alpha(std::size_t k, double alpha);
double critical_difference(std::size_t k, std::size_t n, double alpha);

struct PairComparison {
  std::string a;
  std::string b;
  double rank_difference = 0.0;  // mean_rank(a) - mean_rank(b)
  double q = 0.0;
  bool significant = false;
};

struct RankTable {
  std::vector<std::string> algorithms;
  Matrix scores;  // runs x algorithms
  Matrix ranks;
  std::vector<double> mean_ranks;
  double alpha = 0.05;
  double cd = 0.0;
  std::string winner;
  std::vector<PairComparison> pairs;
};

RankTable rank_scores(const std::vector<std::string>& algorithms, const Matrix& scores, double alpha = 0.05);
RankTable choose_best(const std::vector<BenchmarkResult>& results, double alpha = 0.05);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap of the mean.
Interval bootstrap_ci(std::span<const double> samples, std::size_t resamples, double alpha, std::uint64_t seed);

nlohmann::json to_json(const SplitPlan& plan);
nlohmann::json to_json(const BenchmarkResult& result);
BenchmarkResult benchmark_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RankTable& table);
// "algorithm,mean_rank,cd" rows for external CD-diagram plotting.
std::string cd_diagram_csv(const RankTable& table);

}  // namespace autopower::evaluate
