#include "autopower/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autopower/core.hpp"
#include "autopower/error.hpp"
#include "autopower/evaluate.hpp"
#include "autopower/kernels.hpp"
#include "autopower/stats.hpp"

namespace autopower::featsel {

using nlohmann::json;

std::string to_string(ScoreKind kind) { return kind == ScoreKind::f_test ? "f_test" : "mutual_info"; }

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "f_test" || name == "f-test" || name == "ftest") return ScoreKind::f_test;
  if (name == "mutual_info" || name == "mutual-info" || name == "mi") return ScoreKind::mutual_info;
  throw Error(ErrorKind::parameter, "featsel", "unknown score strategy '" + name + "'");
}

void ScoreStrategy::validate() const {
  if (kind == ScoreKind::mutual_info && bins < 2) throw Error(ErrorKind::parameter, "featsel", "mutual_info needs bins >= 2");
}

namespace {

std::vector<double> f_scores(const Matrix& X, std::span<const double> y, ScoreNotes* notes, bool strict) {
  const std::size_t n = X.rows(), p = X.cols();
  if (y.size() != n) throw Error(ErrorKind::shape, "featsel", "target length does not match rows");
  if (n < 3) throw Error(ErrorKind::parameter, "featsel", "F-test needs at least three rows");
  const double nd = static_cast<double>(n);

  std::vector<double> yc(y.begin(), y.end());
  const double y_mean = kernels::sum(yc) / nd;
  for (auto& v : yc) v -= y_mean;
  const double syy = kernels::dot(yc, yc);

  std::vector<double> scores(p, 0.0);
  std::vector<double> xc(n);
  for (std::size_t c = 0; c < p; ++c) {
    for (std::size_t r = 0; r < n; ++r) xc[r] = X(r, c);
    const double x_mean = kernels::sum(xc) / nd;
    for (auto& v : xc) v -= x_mean;
    const double sxx = kernels::dot(xc, xc);
    if (sxx == 0.0) {
      if (strict) throw Error(ErrorKind::numeric, "featsel", "column " + std::to_string(c) + " has zero variance");
      continue;
    }
    if (syy == 0.0) continue;  // constant target: no linear association
    const double sxy = kernels::dot(xc, yc);
    double r2 = (sxy * sxy) / (sxx * syy);
    constexpr double kMaxR2 = 1.0 - 1e-12;
    if (r2 > kMaxR2) {
      r2 = kMaxR2;
      if (notes) notes->clamped_columns.push_back(c);
    }
    scores[c] = r2 / (1.0 - r2) * (nd - 2.0);
  }
  return scores;
}

}  // namespace

std::vector<double> f_test_scores(const Matrix& X, std::span<const double> y, ScoreNotes* notes) {
  return f_scores(X, y, notes, true);
}

std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins, std::size_t* used) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || values[order[i]] != values[order[i - 1]]) ++distinct;
  }
  std::vector<std::size_t> codes(n);
  if (distinct <= bins) {
    std::size_t code = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && values[order[i]] != values[order[i - 1]]) ++code;
      codes[order[i]] = code;
    }
    if (used) *used = distinct;
    return codes;
  }
  // Bin by the position of the first occurrence of each value in sorted order.
  std::size_t first = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && values[order[i]] != values[order[i - 1]]) first = i;
    codes[order[i]] = std::min(bins - 1, first * bins / n);
  }
  if (used) *used = bins;
  return codes;
}

double mutual_information(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::shape, "featsel", "codings differ in length");
  const std::size_t n = a.size();
  if (n == 0) throw Error(ErrorKind::empty_input, "featsel", "mutual information of empty codings");
  const std::size_t na = *std::max_element(a.begin(), a.end()) + 1;
  const std::size_t nb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> joint(na * nb, 0.0), ma(na, 0.0), mb(nb, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    joint[a[i] * nb + b[i]] += 1.0;
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
  }
  const double nd = static_cast<double>(n);
  double mi = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double c = joint[i * nb + j];
      if (c > 0.0) mi += c / nd * std::log(c * nd / (ma[i] * mb[j]));
    }
  }
  return std::max(0.0, mi);
}

std::vector<double> mutual_info_scores(const Matrix& X, std::span<const double> y, std::size_t bins,
                                       ScoreNotes* notes) {
  const std::size_t n = X.rows(), p = X.cols();
  if (y.size() != n) throw Error(ErrorKind::shape, "featsel", "target length does not match rows");
  if (bins < 2) throw Error(ErrorKind::parameter, "featsel", "mutual_info needs bins >= 2");
  if (n < bins * bins) {
    throw Error(ErrorKind::parameter, "featsel",
                "mutual_info with " + std::to_string(bins) + " bins needs at least " + std::to_string(bins * bins) +
                    " rows");
  }
  std::size_t used = 0;
  const auto y_codes = quantile_bins(y, bins, &used);
  if (notes && used < bins) notes->reduced_bins.emplace_back(p, used);
  std::vector<double> scores(p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = X.column(c);
    const auto codes = quantile_bins(col, bins, &used);
    if (notes && used < bins) notes->reduced_bins.emplace_back(c, used);
    scores[c] = mutual_information(codes, y_codes);
  }
  return scores;
}

std::size_t bins_for_rows(std::size_t bins, std::size_t n) {
  std::size_t root = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while ((root + 1) * (root + 1) <= n) ++root;
  while (root * root > n) --root;
  return std::max<std::size_t>(2, std::min(bins, root));
}

std::vector<double> score_features(const ScoreStrategy& strategy, const Matrix& X, std::span<const double> y,
                                   ScoreNotes* notes) {
  strategy.validate();
  return strategy.kind == ScoreKind::f_test ? f_test_scores(X, y, notes) : mutual_info_scores(X, y, strategy.bins, notes);
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > scores.size()) throw Error(ErrorKind::parameter, "featsel", "k outside 1..p");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  return order;
}

std::vector<KScores> select_k(const Matrix& X, std::span<const double> y, const models::ModelSpec& model,
                              const ScoreStrategy& strategy, std::size_t splits) {
  strategy.validate();
  const std::size_t p = X.cols();
  if (p == 0) throw Error(ErrorKind::empty_input, "featsel", "no features to select from");
  const auto plan = evaluate::time_series_splits(X.rows(), splits);

  // Feature ranking per split depends only on the training window.
  std::vector<std::vector<std::size_t>> rankings;
  for (const auto& split : plan.splits) {
    const Matrix train = X.slice_rows(0, split.train_end);
    const Matrix z = models::Scaler::fit(train).apply(train);
    // A feature can be constant inside an early window; it then ranks last.
    // Early windows may also be too short for the configured bin count.
    const auto scores = strategy.kind == ScoreKind::f_test
                            ? f_scores(z, y.first(split.train_end), nullptr, false)
                            : mutual_info_scores(z, y.first(split.train_end), bins_for_rows(strategy.bins, split.train_end));
    rankings.push_back(top_k(scores, p));
  }

  std::vector<KScores> results;
  for (std::size_t k = 1; k <= p; ++k) {
    KScores ks{k, {}};
    for (std::size_t s = 0; s < plan.splits.size(); ++s) {
      const auto& split = plan.splits[s];
      std::vector<std::size_t> cols(rankings[s].begin(), rankings[s].begin() + static_cast<std::ptrdiff_t>(k));
      try {
        const Matrix train = X.slice_rows(0, split.train_end).select_columns(cols);
        const Matrix test = X.slice_rows(split.test_begin(), split.test_end).select_columns(cols);
        const auto fitted = models::fit(model, train, y.first(split.train_end));
        ks.scores.push_back(mean_absolute_error(models::predict(fitted, test),
                                                y.subspan(split.test_begin(), split.test_end - split.test_begin())));
      } catch (const Error& e) {
        rethrow_with_context(e, "k=" + std::to_string(k) + ", split " + std::to_string(s));
      }
    }
    results.push_back(std::move(ks));
  }
  return results;
}

KRankResult rank_k_medians(std::vector<KMedian> per_k_medians) {
  if (per_k_medians.empty()) throw Error(ErrorKind::empty_input, "featsel", "no per-k medians to rank");
  KRankResult result;
  std::vector<double> medians;
  for (const auto& m : per_k_medians) medians.push_back(m.median);
  const auto q = stats::quartiles(medians);
  result.med = q.median;
  result.q25 = q.q25;
  result.q75 = q.q75;
  result.iiq = q.iiq;
  for (const auto& m : per_k_medians) {
    if (m.median > q.low && m.median < q.high) result.filtered.push_back(m);
  }
  if (result.filtered.empty()) {
    result.fallback = true;
    const auto best = std::min_element(per_k_medians.begin(), per_k_medians.end(),
                                       [](const KMedian& a, const KMedian& b) { return a.median < b.median; });
    result.best_k = best->k;
  } else {
    result.best_k = result.filtered[result.filtered.size() / 2].k;
  }
  result.per_k_medians = std::move(per_k_medians);
  return result;
}

KRankResult build_k_rank(const Matrix& X, std::span<const double> y, const models::ModelSpec& model,
                         const ScoreStrategy& strategy, const KRankOptions& options) {
  if (options.repetitions < 1) throw Error(ErrorKind::parameter, "featsel", "need at least one repetition");
  const std::size_t p = X.cols();
  // run_medians[k-1][r]: median split score of repetition r at k.
  std::vector<std::vector<double>> run_medians(p);
  std::vector<KScores> shared;
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    // Unseeded models give identical repetitions; compute those once.
    if (r == 0 || model.seeded()) {
      const auto spec = model.seeded() ? model.with_seed(options.base_seed + r) : model;
      shared = select_k(X, y, spec, strategy, options.splits);
    }
    for (std::size_t k = 0; k < p; ++k) run_medians[k].push_back(stats::median(shared[k].scores));
  }
  std::vector<KMedian> per_k;
  for (std::size_t k = 0; k < p; ++k) per_k.push_back({k + 1, stats::median(run_medians[k])});

  auto result = rank_k_medians(std::move(per_k));
  result.strategy = to_string(strategy.kind);
  result.model = model.name();
  result.repetitions = options.repetitions;
  return result;
}

json to_json(const KRankResult& r) {
  auto list = [](const std::vector<KMedian>& v) {
    json out = json::array();
    for (const auto& m : v) out.push_back({{"k", m.k}, {"median_mae_mw", m.median}});
    return out;
  };
  return {{"strategy", r.strategy},
          {"model", r.model},
          {"repetitions", r.repetitions},
          {"per_k_medians", list(r.per_k_medians)},
          {"filtered", list(r.filtered)},
          {"med", r.med},
          {"q25", r.q25},
          {"q75", r.q75},
          {"iiq", r.iiq},
          {"best_k", r.best_k},
          {"fallback", r.fallback}};
}

}  // namespace autopower::featsel
