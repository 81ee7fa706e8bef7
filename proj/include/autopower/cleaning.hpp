#pragma once

#include <string>
#include <vector>

#include "autopower/feature_matrix.hpp"
#include "autopower/matrix.hpp"
#include "vendor_json.hpp"

namespace autopower::cleaning {

struct CleaningOptions {
  double sparse_fraction = 0.01;
  double variance_floor = 1e-4;  // on the min-max scaled column
  std::size_t lof_k = 20;
  double lof_threshold = 1.5;
  bool allow_excessive_outliers = false;
};

struct CleaningReport {
  std::size_t input_rows = 0;
  std::vector<std::string> dropped_single_value;
  std::vector<std::string> dropped_sparse;
  std::vector<std::string> dropped_low_variance;
  std::size_t rows_dropped_missing = 0;
  std::vector<bool> outlier_mask;  // over the rows that reached outlier removal
  std::size_t outlier_count = 0;
};

struct Cleaned {
  FeatureMatrix matrix;
  CleaningReport report;
};

// Removes features with a single distinct value, features whose non-missing
// fraction is below `sparse_fraction`, and features whose variance after
// min-max scaling is below `variance_floor`. Each rule judges the original
// column, so the surviving set does not depend on rule order; a dropped
// feature is reported under the first rule it fails.
Cleaned drop_degenerate_features(const FeatureMatrix& m, double sparse_fraction, double variance_floor);

// Drops rows that still have a missing predictor. Row order is preserved.
FeatureMatrix drop_incomplete_rows(const FeatureMatrix& m, std::size_t* dropped = nullptr);

// Local Outlier Factor over Euclidean distance on internally standardized
// columns, exactly k neighbours per point (distance ties go to the lower row
// index). A point whose k-distance is zero sits among duplicates and scores 1.
std::vector<double> lof_scores(const Matrix& points, std::size_t k);

// Scores predictors and target jointly and drops rows scoring above
// `threshold`. Refuses to drop more than half the rows unless allowed.
Cleaned remove_outliers(const FeatureMatrix& m, std::size_t k, double threshold,
                        bool allow_excessive = false);

// The full load-time sequence: degenerate features, incomplete rows, outliers.
Cleaned clean(const FeatureMatrix& m, const CleaningOptions& options = {});

nlohmann::json to_json(const CleaningReport& report);

}  // namespace autopower::cleaning
