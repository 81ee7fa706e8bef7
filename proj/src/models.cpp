#include "autopower/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autopower/error.hpp"
#include "autopower/kernels.hpp"

namespace autopower::models {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::persistence: return "persistence";
    case ModelKind::mean: return "mean";
    case ModelKind::ridge: return "ridge";
    case ModelKind::knn: return "knn";
    case ModelKind::random_forest: return "random_forest";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto kind : {ModelKind::persistence, ModelKind::mean, ModelKind::ridge, ModelKind::knn,
                    ModelKind::random_forest}) {
    if (to_string(kind) == name) return kind;
  }
  if (name == "forest" || name == "random-forest") return ModelKind::random_forest;
  throw Error(ErrorKind::parameter, "models", "unknown model kind '" + name + "'");
}

ModelSpec ModelSpec::persistence() { return ModelSpec{ModelKind::persistence}; }
ModelSpec ModelSpec::mean() { return ModelSpec{ModelKind::mean}; }

ModelSpec ModelSpec::ridge(double lambda) {
  ModelSpec s{ModelKind::ridge};
  s.lambda = lambda;
  return s;
}

ModelSpec ModelSpec::knn(std::size_t k) {
  ModelSpec s{ModelKind::knn};
  s.knn_k = k;
  return s;
}

ModelSpec ModelSpec::random_forest(ForestParams params) {
  ModelSpec s{ModelKind::random_forest};
  s.forest = params;
  return s;
}

ModelSpec ModelSpec::with_seed(std::uint64_t seed) const {
  ModelSpec s = *this;
  if (seeded()) s.forest.seed = seed;
  return s;
}

void ModelSpec::validate() const {
  if (kind == ModelKind::ridge && !(lambda >= 0.0)) throw Error(ErrorKind::parameter, "models", "ridge lambda must be >= 0");
  if (kind == ModelKind::knn && knn_k < 1) throw Error(ErrorKind::parameter, "models", "knn k must be >= 1");
  if (kind == ModelKind::random_forest) {
    if (forest.trees < 1) throw Error(ErrorKind::parameter, "models", "forest needs at least one tree");
    if (forest.min_leaf < 1) throw Error(ErrorKind::parameter, "models", "forest min_leaf must be >= 1");
  }
}

// ---------------------------------------------------------------- scaler

Scaler Scaler::fit(const Matrix& X) {
  Scaler s;
  const std::size_t n = X.rows(), p = X.cols();
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  for (std::size_t c = 0; c < p; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += X(r, c);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (X(r, c) - mean) * (X(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean[c] = mean;
    s.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Scaler Scaler::identity(std::size_t p) { return Scaler{std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)}; }

Matrix Scaler::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw Error(ErrorKind::shape, "models", "scaler arity mismatch");
  Matrix out(X.rows(), X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = (X(r, c) - mean[c]) / scale[c];
  }
  return out;
}

// ---------------------------------------------------------------- trees

double Tree::predict(std::span<const double> x) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes[at].value;
}

namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // sL^2/nL + sR^2/nR
};

// Each feature keeps the node's samples presorted by (value, target) in a
// contiguous segment; splitting stably partitions every segment, so no node
// re-sorts. order[p] holds the samples in draw order for leaf means.
struct Grower {
  const Matrix& X;
  std::span<const double> y;
  const ForestParams& params;
  Rng& rng;
  std::size_t mtry;
  Tree tree;
  std::vector<std::size_t> feature_pool;
  std::vector<std::vector<double>> vals;  // vals[f][s] = X(rows[s], f)
  std::vector<double> ys;                 // ys[s] = y[rows[s]]
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::uint8_t> goes_left;
  std::vector<std::uint32_t> buf;

  // presorted: per feature, all rows of X ordered by (value, target, row);
  // usable when `rows` is ascending.
  void init(std::span<const std::size_t> rows, const std::vector<std::vector<std::uint32_t>>* presorted = nullptr) {
    const std::size_t p = X.cols(), m = rows.size();
    vals.assign(p, std::vector<double>(m));
    ys.resize(m);
    for (std::size_t s = 0; s < m; ++s) {
      ys[s] = y[rows[s]];
      const auto row = X.row(rows[s]);
      for (std::size_t f = 0; f < p; ++f) vals[f][s] = row[f];
    }
    order.assign(p + 1, std::vector<std::uint32_t>(m));
    goes_left.resize(m);
    buf.resize(m);
    if (presorted) {
      // rows ascend, so each row's draws occupy one run of sample positions.
      std::vector<std::uint32_t> start(X.rows() + 1, 0);
      for (auto r : rows) ++start[r + 1];
      for (std::size_t r = 0; r < X.rows(); ++r) start[r + 1] += start[r];
      for (std::size_t f = 0; f < p; ++f) {
        std::size_t at = 0;
        for (auto r : (*presorted)[f]) {
          for (auto s = start[r]; s < start[r + 1]; ++s) order[f][at++] = s;
        }
      }
      std::iota(order[p].begin(), order[p].end(), 0u);
      return;
    }
    for (std::size_t f = 0; f <= p; ++f) {
      auto& o = order[f];
      std::iota(o.begin(), o.end(), 0u);
      if (f == p) break;
      const auto& v = vals[f];
      std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        if (ys[a] != ys[b]) return ys[a] < ys[b];
        return a < b;
      });
    }
  }

  double mean_of(std::size_t begin, std::size_t end) const {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += ys[order[X.cols()][i]];
    return s / static_cast<double>(end - begin);
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = X.cols();
    if (mtry >= p) {
      std::vector<std::size_t> all(p);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    feature_pool.resize(p);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (std::size_t i = 0; i < mtry; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(p - i));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::vector<std::size_t> chosen(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(mtry));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  Split best_split(std::size_t begin, std::size_t end) {
    Split best;
    const std::size_t n = end - begin;
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += ys[order[X.cols()][i]];
    best.score = total * total / static_cast<double>(n);  // no-split baseline
    for (std::size_t f : candidate_features()) {
      const auto& o = order[f];
      const auto& v = vals[f];
      double left_sum = 0.0;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        const double here = v[o[i]], next = v[o[i + 1]];
        left_sum += ys[o[i]];
        const std::size_t n_left = i + 1 - begin, n_right = n - n_left;
        if (here == next) continue;
        if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(n_left) +
                             right_sum * right_sum / static_cast<double>(n_right);
        if (score > best.score) {
          double threshold = 0.5 * (here + next);
          if (!(threshold < next)) threshold = here;
          best = {true, f, threshold, score};
        }
      }
    }
    return best;
  }

  std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
    const auto& v = vals[split.feature];
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = order[X.cols()][i];
      goes_left[s] = v[s] <= split.threshold;
      n_left += goes_left[s];
    }
    for (auto& o : order) {
      std::size_t l = begin, r = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t v = o[i];
        const std::size_t left = goes_left[v];
        o[l] = v;
        buf[r] = v;
        l += left;
        r += 1 - left;
      }
      std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(r), o.begin() + static_cast<std::ptrdiff_t>(l));
    }
    return begin + n_left;
  }

  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[static_cast<std::size_t>(id)].value = mean_of(begin, end);

    const std::size_t n = end - begin;
    const bool depth_left = params.max_depth == 0 || depth < params.max_depth;
    if (!depth_left || n < 2 * params.min_leaf) return id;
    const auto& draw = order[X.cols()];
    const double first = ys[draw[begin]];
    bool constant = true;
    for (std::size_t i = begin; i < end && constant; ++i) constant = ys[draw[i]] == first;
    if (constant) return id;

    const Split split = best_split(begin, end);
    if (!split.found) return id;

    const std::size_t mid = partition(begin, end, split);
    const int l = grow(begin, mid, depth + 1);
    const int r = grow(mid, end, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

std::size_t resolve_mtry(const ForestParams& params, std::size_t p) {
  const std::size_t m = params.feature_subsample == 0 ? (p + 2) / 3 : params.feature_subsample;
  return std::clamp<std::size_t>(m, 1, p);
}

void check_finite(const Matrix& X, std::span<const double> y) {
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "models", "non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "models", "non-finite target value");
  }
}

RidgeParams fit_ridge(const Matrix& Z, std::span<const double> y, double lambda) {
  const std::size_t n = Z.rows(), p = Z.cols();
  double y_sum = 0.0;
  for (double v : y) y_sum += v;
  const double y_mean = y_sum / static_cast<double>(n);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = Z.row(r);
    const double yc = y[r] - y_mean;
    for (std::size_t a = 0; a < p; ++a) {
      rhs(static_cast<Eigen::Index>(a)) += row[a] * yc;
      for (std::size_t b = 0; b <= a; ++b) gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += row[a] * row[b];
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += lambda;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  // LDLT::rcond misses exactly zero pivots, so judge conditioning from D directly.
  const Eigen::VectorXd d = ldlt.vectorD();
  const double d_max = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(d.minCoeff() > 1e-12 * d_max)) {
    throw Error(ErrorKind::numeric, "models",
                lambda == 0.0 ? "ridge normal equations are singular; use lambda > 0"
                              : "ridge normal equations are ill-conditioned");
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  RidgeParams params;
  params.intercept = y_mean;
  params.coefficients.assign(beta.data(), beta.data() + beta.size());
  return params;
}

}  // namespace

namespace {

std::vector<std::vector<std::uint32_t>> presort(const Matrix& X, std::span<const double> y) {
  std::vector<std::vector<std::uint32_t>> out(X.cols(), std::vector<std::uint32_t>(X.rows()));
  for (std::size_t f = 0; f < X.cols(); ++f) {
    auto& o = out[f];
    std::iota(o.begin(), o.end(), 0u);
    std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = X(a, f), vb = X(b, f);
      if (va != vb) return va < vb;
      if (y[a] != y[b]) return y[a] < y[b];
      return a < b;
    });
  }
  return out;
}

}  // namespace

Tree grow_tree(const Matrix& X, std::span<const double> y, std::vector<std::size_t> rows,
               const ForestParams& params, Rng& rng) {
  if (rows.empty()) throw Error(ErrorKind::empty_input, "models", "tree grown on no rows");
  Grower g{X, y, params, rng, resolve_mtry(params, X.cols()), {}, {}, {}, {}, {}, {}, {}};
  g.init(rows);
  g.grow(0, rows.size(), 0);
  return std::move(g.tree);
}

// ---------------------------------------------------------------- fit/predict

FittedModel fit(const ModelSpec& spec, const Matrix& X, std::span<const double> y,
                std::vector<std::string> feature_names) {
  spec.validate();
  const std::size_t n = X.rows(), p = X.cols();
  if (y.size() != n) throw Error(ErrorKind::shape, "models", "target length does not match rows");
  if (n < 2) throw Error(ErrorKind::empty_input, "models", "fit needs at least two rows");
  if (spec.kind == ModelKind::knn && n < spec.knn_k + 1) {
    throw Error(ErrorKind::parameter, "models", "knn needs more than k training rows");
  }
  check_finite(X, y);
  if (feature_names.empty()) {
    for (std::size_t c = 0; c < p; ++c) feature_names.push_back("x" + std::to_string(c));
  }
  if (feature_names.size() != p) throw Error(ErrorKind::shape, "models", "feature names do not match columns");

  FittedModel model;
  model.spec = spec;
  model.selected_features = std::move(feature_names);
  model.train_rows = n;

  switch (spec.kind) {
    case ModelKind::mean: {
      double s = 0.0;
      for (double v : y) s += v;
      model.scaler = Scaler::identity(p);
      model.params = MeanParams{s / static_cast<double>(n)};
      break;
    }
    case ModelKind::persistence:
      model.scaler = Scaler::identity(p);
      model.params = PersistenceParams{y.back()};
      break;
    case ModelKind::ridge: {
      model.scaler = Scaler::fit(X);
      model.params = fit_ridge(model.scaler.apply(X), y, spec.lambda);
      break;
    }
    case ModelKind::knn: {
      model.scaler = Scaler::fit(X);
      model.params = KnnParams{model.scaler.apply(X), std::vector<double>(y.begin(), y.end())};
      break;
    }
    case ModelKind::random_forest: {
      if (p == 0) throw Error(ErrorKind::shape, "models", "forest needs at least one feature");
      model.scaler = Scaler::identity(p);
      ForestModel forest;
      forest.trees.reserve(spec.forest.trees);
      const auto sorted = presort(X, y);
      for (std::size_t t = 0; t < spec.forest.trees; ++t) {
        Rng rng(spec.forest.seed + t);
        std::vector<std::size_t> rows(n);
        if (spec.forest.bootstrap) {
          for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
          std::sort(rows.begin(), rows.end());
        } else {
          std::iota(rows.begin(), rows.end(), 0);
        }
        Grower g{X, y, spec.forest, rng, resolve_mtry(spec.forest, p), {}, {}, {}, {}, {}, {}, {}};
        g.init(rows, &sorted);
        g.grow(0, rows.size(), 0);
        forest.trees.push_back(std::move(g.tree));
      }
      model.params = std::move(forest);
      break;
    }
  }
  return model;
}

std::vector<double> predict(const FittedModel& model, const Matrix& X) {
  const std::size_t p = model.selected_features.size();
  if (X.cols() != p) {
    throw Error(ErrorKind::shape, "models",
                "expected " + std::to_string(p) + " features, got " + std::to_string(X.cols()));
  }
  std::vector<double> out(X.rows());
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, MeanParams>) {
          std::fill(out.begin(), out.end(), params.value);
        } else if constexpr (std::is_same_v<T, PersistenceParams>) {
          std::fill(out.begin(), out.end(), params.last);
        } else if constexpr (std::is_same_v<T, RidgeParams>) {
          const Matrix Z = model.scaler.apply(X);
          for (std::size_t r = 0; r < Z.rows(); ++r) out[r] = params.intercept + kernels::dot(Z.row(r), params.coefficients);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          const Matrix Z = model.scaler.apply(X);
          const std::size_t n = params.X.rows();
          const std::size_t k = std::min(model.spec.knn_k, n);
          std::vector<std::pair<double, std::size_t>> d(n);
          for (std::size_t r = 0; r < Z.rows(); ++r) {
            for (std::size_t i = 0; i < n; ++i) d[i] = {kernels::squared_distance(Z.row(r), params.X.row(i)), i};
            std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += params.y[d[j].second];
            out[r] = s / static_cast<double>(k);
          }
        } else {
          for (std::size_t r = 0; r < X.rows(); ++r) {
            double s = 0.0;
            for (const auto& tree : params.trees) s += tree.predict(X.row(r));
            out[r] = s / static_cast<double>(params.trees.size());
          }
        }
      },
      model.params);
  return out;
}

std::vector<double> persistence_predict(std::span<const double> power) {
  if (power.size() < 2) throw Error(ErrorKind::empty_input, "models", "persistence needs at least two samples");
  return {power.begin(), power.end() - 1};
}

// ---------------------------------------------------------------- JSON

namespace {

json tree_to_json(const Tree& tree, std::size_t at) {
  const auto& node = tree.nodes[at];
  if (node.feature < 0) return {{"leaf_value", node.value}};
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"left", tree_to_json(tree, static_cast<std::size_t>(node.left))},
          {"right", tree_to_json(tree, static_cast<std::size_t>(node.right))}};
}

int tree_from_json(const json& j, Tree& tree) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{});
  if (j.contains("leaf_value")) {
    tree.nodes[static_cast<std::size_t>(id)].value = j.at("leaf_value").get<double>();
    return id;
  }
  const int l = tree_from_json(j.at("left"), tree);
  const int r = tree_from_json(j.at("right"), tree);
  auto& node = tree.nodes[static_cast<std::size_t>(id)];
  node.feature = j.at("feature").get<int>();
  node.threshold = j.at("threshold").get<double>();
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

json to_json(const ModelSpec& spec) {
  json h = json::object();
  switch (spec.kind) {
    case ModelKind::ridge: h["lambda"] = spec.lambda; break;
    case ModelKind::knn: h["k"] = spec.knn_k; break;
    case ModelKind::random_forest:
      h = {{"trees", spec.forest.trees},
           {"max_depth", spec.forest.max_depth},
           {"min_leaf", spec.forest.min_leaf},
           {"feature_subsample", spec.forest.feature_subsample},
           {"bootstrap", spec.forest.bootstrap},
           {"seed", spec.forest.seed}};
      break;
    default: break;
  }
  return {{"kind", to_string(spec.kind)}, {"hyperparameters", h}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.kind = model_kind_from_string(j.at("kind").get<std::string>());
  const json h = j.value("hyperparameters", json::object());
  spec.lambda = h.value("lambda", spec.lambda);
  spec.knn_k = h.value("k", spec.knn_k);
  spec.forest.trees = h.value("trees", spec.forest.trees);
  spec.forest.max_depth = h.value("max_depth", spec.forest.max_depth);
  spec.forest.min_leaf = h.value("min_leaf", spec.forest.min_leaf);
  spec.forest.feature_subsample = h.value("feature_subsample", spec.forest.feature_subsample);
  spec.forest.bootstrap = h.value("bootstrap", spec.forest.bootstrap);
  spec.forest.seed = h.value("seed", spec.forest.seed);
  spec.validate();
  return spec;
}

json to_json(const FittedModel& model) {
  json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MeanParams>) {
          params = {{"value", p.value}};
        } else if constexpr (std::is_same_v<T, PersistenceParams>) {
          params = {{"last", p.last}};
        } else if constexpr (std::is_same_v<T, RidgeParams>) {
          params = {{"intercept", p.intercept}, {"coefficients", p.coefficients}};
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          params = {{"rows", p.X.rows()}, {"cols", p.X.cols()}, {"X", p.X.data()}, {"y", p.y}};
        } else {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_to_json(t, 0));
          params = {{"trees", trees}};
        }
      },
      model.params);
  json scaler = json::array();
  for (std::size_t c = 0; c < model.scaler.mean.size(); ++c) {
    scaler.push_back({{"mean", model.scaler.mean[c]}, {"std", model.scaler.scale[c]}});
  }
  return {{"spec", to_json(model.spec)},
          {"scaler_params", scaler},
          {"selected_features", model.selected_features},
          {"parameters", params},
          {"train_rows", model.train_rows},
          {"metrics", model.metrics}};
}

FittedModel model_from_json(const json& j) {
  FittedModel model;
  model.spec = spec_from_json(j.at("spec"));
  for (const auto& s : j.at("scaler_params")) {
    model.scaler.mean.push_back(s.at("mean").get<double>());
    model.scaler.scale.push_back(s.at("std").get<double>());
  }
  model.selected_features = j.at("selected_features").get<std::vector<std::string>>();
  model.train_rows = j.at("train_rows").get<std::size_t>();
  model.metrics = j.value("metrics", json::object());
  if (model.scaler.mean.size() != model.selected_features.size()) {
    throw Error(ErrorKind::format, "models", "scaler arity does not match selected features");
  }
  const json& p = j.at("parameters");
  switch (model.spec.kind) {
    case ModelKind::mean: model.params = MeanParams{p.at("value").get<double>()}; break;
    case ModelKind::persistence: model.params = PersistenceParams{p.at("last").get<double>()}; break;
    case ModelKind::ridge:
      model.params = RidgeParams{p.at("intercept").get<double>(), p.at("coefficients").get<std::vector<double>>()};
      break;
    case ModelKind::knn:
      model.params = KnnParams{Matrix(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>(),
                                      p.at("X").get<std::vector<double>>()),
                               p.at("y").get<std::vector<double>>()};
      break;
    case ModelKind::random_forest: {
      ForestModel forest;
      for (const auto& t : p.at("trees")) {
        Tree tree;
        tree_from_json(t, tree);
        forest.trees.push_back(std::move(tree));
      }
      model.params = std::move(forest);
      break;
    }
  }
  return model;
}

}  // namespace autopower::models
