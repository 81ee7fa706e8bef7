#include "autopower/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autopower/error.hpp"
#include "autopower/kernels.hpp"

namespace autopower::cleaning {

namespace {

// Column-wise z-scores; a constant column is only centred.
Matrix standardize(const Matrix& points) {
  const std::size_t n = points.rows(), p = points.cols();
  Matrix out(n, p);
  for (std::size_t c = 0; c < p; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += points(r, c);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (points(r, c) - mean) * (points(r, c) - mean);
    double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd == 0.0) sd = 1.0;
    for (std::size_t r = 0; r < n; ++r) out(r, c) = (points(r, c) - mean) / sd;
  }
  return out;
}

}  // namespace

Cleaned drop_degenerate_features(const FeatureMatrix& m, double sparse_fraction, double variance_floor) {
  m.validate();
  if (m.n() == 0 || m.p() == 0) throw Error(ErrorKind::empty_input, "cleaning", "feature matrix is empty");
  if (!(sparse_fraction >= 0.0 && sparse_fraction <= 1.0)) {
    throw Error(ErrorKind::parameter, "cleaning", "sparse_fraction must lie in [0, 1]");
  }
  if (!(variance_floor >= 0.0)) throw Error(ErrorKind::parameter, "cleaning", "variance_floor must be >= 0");

  Cleaned out;
  out.report.input_rows = m.n();
  std::vector<std::size_t> keep;
  std::vector<double> present;
  for (std::size_t c = 0; c < m.p(); ++c) {
    present.clear();
    for (std::size_t r = 0; r < m.n(); ++r) {
      if (!m.is_missing(r, c)) present.push_back(m.X(r, c));
    }
    std::vector<double> sorted = present;
    std::sort(sorted.begin(), sorted.end());
    const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    const double fraction = static_cast<double>(present.size()) / static_cast<double>(m.n());

    double scaled_variance = 0.0;
    if (distinct > 1) {
      const double lo = sorted.front(), span = sorted[distinct - 1] - sorted.front();
      double sum = 0.0;
      for (double v : present) sum += (v - lo) / span;
      const double mean = sum / static_cast<double>(present.size());
      double ss = 0.0;
      for (double v : present) ss += ((v - lo) / span - mean) * ((v - lo) / span - mean);
      scaled_variance = ss / static_cast<double>(present.size());
    }

    const auto& name = m.feature_names[c];
    if (distinct <= 1) {
      out.report.dropped_single_value.push_back(name);
    } else if (fraction < sparse_fraction) {
      out.report.dropped_sparse.push_back(name);
    } else if (scaled_variance < variance_floor) {
      out.report.dropped_low_variance.push_back(name);
    } else {
      keep.push_back(c);
    }
  }
  if (keep.empty()) throw Error(ErrorKind::degenerate_input, "cleaning", "every feature was removed");
  out.matrix = m.select_columns(keep);
  return out;
}

FeatureMatrix drop_incomplete_rows(const FeatureMatrix& m, std::size_t* dropped) {
  if (!m.has_missing()) {
    if (dropped) *dropped = 0;
    return m;
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < m.n(); ++r) {
    bool complete = true;
    for (std::size_t c = 0; c < m.p() && complete; ++c) complete = !m.is_missing(r, c);
    if (complete) keep.push_back(r);
  }
  if (dropped) *dropped = m.n() - keep.size();
  if (keep.empty()) throw Error(ErrorKind::empty_input, "cleaning", "every row has a missing predictor");
  return m.select_rows(keep);
}

std::vector<double> lof_scores(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k < 1 || n <= k) {
    throw Error(ErrorKind::parameter, "cleaning",
                "LOF needs n > k >= 1 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "cleaning", "non-finite value in LOF input");
  }
  const Matrix z = standardize(points);

  // neighbours[i * k + j]: j-th nearest of i, ordered by (distance, index).
  std::vector<std::size_t> neighbours(n * k);
  std::vector<double> neighbour_dist(n * k);
  std::vector<double> k_distance(n);
  std::vector<std::pair<double, std::size_t>> candidates(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row_i = z.row(i);
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      candidates[w++] = {std::sqrt(kernels::squared_distance(row_i, z.row(j))), j};
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());
    for (std::size_t j = 0; j < k; ++j) {
      neighbours[i * k + j] = candidates[j].second;
      neighbour_dist[i * k + j] = candidates[j].first;
    }
    k_distance[i] = candidates[k - 1].first;
  }

  const double kd = static_cast<double>(k);
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      reach += std::max(k_distance[neighbours[i * k + j]], neighbour_dist[i * k + j]);
    }
    lrd[i] = reach == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (reach / kd);
  }

  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (k_distance[i] == 0.0) {
      scores[i] = 1.0;
      continue;
    }
    double density = 0.0;
    for (std::size_t j = 0; j < k; ++j) density += lrd[neighbours[i * k + j]];
    scores[i] = (density / kd) / lrd[i];
  }
  return scores;
}

Cleaned remove_outliers(const FeatureMatrix& m, std::size_t k, double threshold, bool allow_excessive) {
  m.validate();
  if (m.has_missing()) throw Error(ErrorKind::parameter, "cleaning", "outlier removal needs complete rows");
  if (!(threshold > 1.0)) throw Error(ErrorKind::parameter, "cleaning", "LOF threshold must exceed 1");
  const auto scores = lof_scores(m.X.with_column(m.y), k);

  Cleaned out;
  out.report.input_rows = m.n();
  out.report.outlier_mask.resize(m.n());
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < m.n(); ++r) {
    const bool outlier = scores[r] > threshold;
    out.report.outlier_mask[r] = outlier;
    if (outlier) ++out.report.outlier_count;
    else keep.push_back(r);
  }
  if (!allow_excessive && 2 * out.report.outlier_count > m.n()) {
    throw Error(ErrorKind::excessive_outliers, "cleaning",
                std::to_string(out.report.outlier_count) + " of " + std::to_string(m.n()) +
                    " rows flagged; refusing to drop more than half");
  }
  if (keep.empty()) throw Error(ErrorKind::empty_input, "cleaning", "every row flagged as outlier");
  out.matrix = m.select_rows(keep);
  return out;
}

Cleaned clean(const FeatureMatrix& m, const CleaningOptions& options) {
  auto degenerate = drop_degenerate_features(m, options.sparse_fraction, options.variance_floor);
  std::size_t incomplete = 0;
  auto complete = drop_incomplete_rows(degenerate.matrix, &incomplete);
  auto filtered = remove_outliers(complete, options.lof_k, options.lof_threshold, options.allow_excessive_outliers);

  Cleaned out;
  out.report = std::move(degenerate.report);
  // Removing outliers can leave a column with one value, e.g. when its rare
  // values all sat in outlying rows. Those go the same way as before.
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < filtered.matrix.p(); ++c) {
    bool varies = false;
    for (std::size_t r = 1; r < filtered.matrix.n() && !varies; ++r) varies = filtered.matrix.X(r, c) != filtered.matrix.X(0, c);
    if (varies) {
      keep.push_back(c);
    } else {
      out.report.dropped_single_value.push_back(filtered.matrix.feature_names[c]);
    }
  }
  if (keep.empty()) throw Error(ErrorKind::degenerate_input, "cleaning", "every feature was removed");
  out.matrix = keep.size() == filtered.matrix.p() ? std::move(filtered.matrix) : filtered.matrix.select_columns(keep);
  out.report.rows_dropped_missing = incomplete;
  out.report.outlier_mask = std::move(filtered.report.outlier_mask);
  out.report.outlier_count = filtered.report.outlier_count;
  return out;
}

nlohmann::json to_json(const CleaningReport& report) {
  std::vector<int> mask(report.outlier_mask.begin(), report.outlier_mask.end());
  return {
      {"input_rows", report.input_rows},
      {"dropped_single_value", report.dropped_single_value},
      {"dropped_sparse", report.dropped_sparse},
      {"dropped_low_variance", report.dropped_low_variance},
      {"rows_dropped_missing", report.rows_dropped_missing},
      {"outlier_count", report.outlier_count},
      {"outlier_mask", mask},
  };
}

}  // namespace autopower::cleaning
