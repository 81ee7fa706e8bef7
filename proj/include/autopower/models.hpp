#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "autopower/matrix.hpp"
#include "autopower/rng.hpp"
#include "vendor_json.hpp"

namespace autopower::models {

enum class ModelKind { persistence, mean, ridge, knn, random_forest };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 0;          // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t feature_subsample = 0;  // 0 = ceil(p / 3)
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::mean;
  double lambda = 1.0;       // ridge
  std::size_t knn_k = 5;     // knn
  ForestParams forest;       // random_forest

  static ModelSpec persistence();
  static ModelSpec mean();
  static ModelSpec ridge(double lambda = 1.0);
  static ModelSpec knn(std::size_t k = 5);
  static ModelSpec random_forest(ForestParams params = {});

  std::string name() const { return to_string(kind); }
  // Only forests consume a seed; every other kind is deterministic in the data
  // and with_seed leaves it unchanged.
  bool seeded() const { return kind == ModelKind::random_forest; }
  ModelSpec with_seed(std::uint64_t seed) const;
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Per-feature affine map to zero mean and unit variance, fitted on training
// rows only. Zero-variance features keep scale 1.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler fit(const Matrix& X);
  static Scaler identity(std::size_t p);
  Matrix apply(const Matrix& X) const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
};

// One CART regression tree grown on the given (possibly repeated) rows.
// Splits maximise the reduction in squared error; ties resolve to the lowest
// feature index, then the lowest threshold.
Tree grow_tree(const Matrix& X, std::span<const double> y, std::vector<std::size_t> rows,
               const ForestParams& params, Rng& rng);

struct MeanParams {
  double value = 0.0;
};
struct PersistenceParams {
  double last = 0.0;
};
struct RidgeParams {
  double intercept = 0.0;
  std::vector<double> coefficients;  // on standardized features
};
struct KnnParams {
  Matrix X;  // standardized training rows
  std::vector<double> y;
};
struct ForestModel {
  std::vector<Tree> trees;
};

using Parameters = std::variant<MeanParams, PersistenceParams, RidgeParams, KnnParams, ForestModel>;

struct FittedModel {
  ModelSpec spec;
  Scaler scaler;
  std::vector<std::string> selected_features;
  Parameters params;
  std::size_t train_rows = 0;
  nlohmann::json metrics = nlohmann::json::object();
};

FittedModel fit(const ModelSpec& spec, const Matrix& X, std::span<const double> y,
                std::vector<std::string> feature_names = {});

std::vector<double> predict(const FittedModel& model, const Matrix& X);

// prediction[i] = power[i] as the forecast for power[i + 1].
std::vector<double> persistence_predict(std::span<const double> power);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

}  // namespace autopower::models
