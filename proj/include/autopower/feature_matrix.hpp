#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autopower/matrix.hpp"

namespace autopower {

// Numeric predictors plus the aligned power target (mW).
//
// Cells that were missing in the source trace hold 0.0 in X and are flagged in
// `missing` (row-major, same shape as X; empty when nothing is missing), so X
// itself never carries a non-finite value.
struct FeatureMatrix {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<double> y;
  std::vector<std::uint8_t> missing;

  std::size_t n() const noexcept { return X.rows(); }
  std::size_t p() const noexcept { return X.cols(); }

  bool has_missing() const noexcept { return !missing.empty(); }
  bool is_missing(std::size_t r, std::size_t c) const {
    return !missing.empty() && missing[r * X.cols() + c] != 0;
  }
  std::optional<std::size_t> index_of(const std::string& name) const;

  FeatureMatrix select_columns(std::span<const std::size_t> columns) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix without_feature(const std::string& name) const;

  // Throws a shape error if X, y, names and mask disagree.
  void validate() const;
};

}  // namespace autopower
