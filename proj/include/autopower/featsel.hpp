#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "autopower/matrix.hpp"
#include "autopower/models.hpp"
#include "vendor_json.hpp"

namespace autopower::featsel {

enum class ScoreKind { f_test, mutual_info };

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

struct ScoreStrategy {
  ScoreKind kind = ScoreKind::f_test;
  std::size_t bins = 16;  // mutual_info only

  void validate() const;
};

// Notes raised while scoring: clamped perfect correlations, shrunken bin counts.
struct ScoreNotes {
  std::vector<std::size_t> clamped_columns;
  std::vector<std::pair<std::size_t, std::size_t>> reduced_bins;  // (column, bins used); column p means y
};

// Univariate linear-regression F statistic per column:
// F = r^2 / (1 - r^2) * (n - 2), with r^2 clamped at 1 - 1e-12.
std::vector<double> f_test_scores(const Matrix& X, std::span<const double> y, ScoreNotes* notes = nullptr);

// Equal-frequency bin codes in [0, bins). Equal values share a bin; a column
// with at most `bins` distinct values gets one bin per distinct value.
std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins, std::size_t* used = nullptr);

// Plug-in mutual information (nats) between two discrete codings.
double mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b);

std::vector<double> mutual_info_scores(const Matrix& X, std::span<const double> y, std::size_t bins,
                                       ScoreNotes* notes = nullptr);

// The configured bin count, lowered to floor(sqrt(n)) (at least 2) when n
// rows cannot support bins^2 cells.
std::size_t bins_for_rows(std::size_t bins, std::size_t n);

std::vector<double> score_features(const ScoreStrategy& strategy, const Matrix& X, std::span<const double> y,
                                   ScoreNotes* notes = nullptr);

// Indices of the k best scores, ordered by descending score, ties to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

struct KScores {
  std::size_t k = 0;
  std::vector<double> scores;  // one MAE per CV split
};

inline constexpr std::size_t kSelectSplits = 10;
inline constexpr std::size_t kRankRepetitions = 30;

// For k = 1..p: standardize -> keep top-k by `strategy` -> model, scored with
// time-series CV. Scaling and scoring are fitted on each training window only.
std::vector<KScores> select_k(const Matrix& X, std::span<const double> y, const models::ModelSpec& model,
                              const ScoreStrategy& strategy, std::size_t splits = kSelectSplits);

struct KMedian {
  std::size_t k = 0;
  double median = 0.0;
};

struct KRankResult {
  std::string strategy;
  std::string model;
  std::vector<KMedian> per_k_medians;
  std::vector<KMedian> filtered;
  double med = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iiq = 0.0;
  std::size_t best_k = 0;
  bool fallback = false;  // filtered set was empty; best_k is the minimal-median k
  std::size_t repetitions = 0;
};

struct KRankOptions {
  std::size_t repetitions = kRankRepetitions;
  std::size_t splits = kSelectSplits;
  std::uint64_t base_seed = 0;
};

// Runs select_k `repetitions` times (model seed base_seed + r), reduces each
// k to the median over repetitions of the per-run median split score, then
// keeps medians strictly inside median +- 1.5 IQR and returns the k at
// position floor(len / 2) of the survivors.
KRankResult build_k_rank(const Matrix& X, std::span<const double> y, const models::ModelSpec& model,
                         const ScoreStrategy& strategy, const KRankOptions& options = {});

// The IQR reduction step on its own, over per-k medians in k order.
KRankResult rank_k_medians(std::vector<KMedian> per_k_medians);

nlohmann::json to_json(const KRankResult& result);

}  // namespace autopower::featsel
