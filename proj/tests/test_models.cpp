#include <cmath>
#include <functional>
#include <numbers>

#include "autopower/core.hpp"
#include "autopower/error.hpp"
#include "autopower/models.hpp"
#include "autopower/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace autopower;
namespace oracle = testing_support::oracle;

namespace {

struct Data {
  Matrix X;
  std::vector<double> y;
};

Data noisy_data(Rng& rng, std::size_t n, std::size_t p) {
  Data d{Matrix(n, p), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < p; ++c) d.X(r, c) = rng.normal();
    d.y[r] = 5 * d.X(r, 0) - 2 * d.X(r, p - 1) + (d.X(r, 0) > 0.5 ? 4 : 0) + rng.normal(0, 0.5);
  }
  return d;
}

// Each internal node's split must equal the exhaustive search over that node's rows.
void check_tree_against_oracle(const models::Tree& tree, const Data& d, std::size_t node, std::vector<std::size_t> rows,
                               std::size_t min_leaf) {
  const auto& nd = tree.nodes[node];
  const auto best = oracle::best_split(d.X, d.y, rows, min_leaf);
  if (nd.feature < 0) {
    return;  // leaves may come from the depth limit, so no claim either way
  }
  REQUIRE(best.found);
  CHECK(static_cast<std::size_t>(nd.feature) == best.feature);
  CHECK(nd.threshold == best.threshold);
  std::vector<std::size_t> left, right;
  for (auto r : rows) (d.X(r, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? left : right).push_back(r);
  check_tree_against_oracle(tree, d, static_cast<std::size_t>(nd.left), left, min_leaf);
  check_tree_against_oracle(tree, d, static_cast<std::size_t>(nd.right), right, min_leaf);
}

double walk(const models::Tree& tree, std::span<const double> x) {
  int at = 0;
  for (;;) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(at)];
    if (nd.left < 0) return nd.value;
    at = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("mean model predicts the training mean") {
  const Matrix X(3, 1, 0.0);
  const auto m = models::fit(models::ModelSpec::mean(), X, std::vector<double>{2, 4, 6});
  CHECK(models::predict(m, Matrix(5, 1, 9.0)) == std::vector<double>(5, 4.0));
}

TEST_CASE("unpenalised ridge interpolates a line") {
  Matrix X(6, 1);
  std::vector<double> y(6);
  for (std::size_t i = 0; i < 6; ++i) {
    X(i, 0) = static_cast<double>(i) * 1.5;
    y[i] = 2 * X(i, 0) + 1;
  }
  const auto m = models::fit(models::ModelSpec::ridge(0.0), X, y);
  const auto probe = Matrix::from_rows({{0.0}, {1.0}, {100.0}});
  const auto p = models::predict(m, probe);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p[1] - p[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(p[2] == doctest::Approx(201.0).epsilon(1e-9));
}

TEST_CASE("singular unpenalised ridge is reported") {
  Matrix X(10, 2);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    X(i, 0) = X(i, 1) = static_cast<double>(i);
    y[i] = static_cast<double>(i);
  }
  try {
    models::fit(models::ModelSpec::ridge(0.0), X, y);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
    CHECK(std::string(e.what()).find("lambda > 0") != std::string::npos);
  }
  CHECK_NOTHROW(models::fit(models::ModelSpec::ridge(1.0), X, y));
}

TEST_CASE("one-NN reproduces training targets") {
  Rng rng(1);
  auto d = noisy_data(rng, 50, 3);
  const auto m = models::fit(models::ModelSpec::knn(1), d.X, d.y);
  CHECK(models::predict(m, d.X) == d.y);
}

TEST_CASE("a depth-one tree splits a step function at the step") {
  Matrix X(20, 1);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    X(i, 0) = static_cast<double>(i);
    y[i] = i < 13 ? 1.0 : 5.0;
  }
  models::ForestParams fp;
  fp.trees = 1;
  fp.max_depth = 1;
  fp.bootstrap = false;
  const auto m = models::fit(models::ModelSpec::random_forest(fp), X, y);
  const auto& tree = std::get<models::ForestModel>(m.params).trees.at(0);
  const std::vector<std::size_t> all = [] {
    std::vector<std::size_t> v(20);
    for (std::size_t i = 0; i < 20; ++i) v[i] = i;
    return v;
  }();
  const auto best = oracle::best_split(X, y, all, 1);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == 12.5);
  CHECK(best.threshold == 12.5);
  CHECK(models::predict(m, Matrix::from_rows({{3.0}, {17.0}})) == std::vector<double>{1.0, 5.0});
}

TEST_CASE("tree splits match exhaustive search at every node") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.index(120), p = 1 + rng.index(5);
    auto d = noisy_data(rng, n, p);
    if (trial % 3 == 0) {
      for (auto& v : d.X.data()) v = std::round(v * 2);  // repeated values
    }
    models::ForestParams fp;
    fp.max_depth = 3;
    fp.min_leaf = 1 + rng.index(4);
    fp.feature_subsample = p;
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    Rng tree_rng(7);
    const auto tree = models::grow_tree(d.X, d.y, rows, fp, tree_rng);
    check_tree_against_oracle(tree, d, 0, rows, fp.min_leaf);
  }
}

TEST_CASE("tied split candidates resolve to the lowest feature") {
  Rng rng(3);
  auto d = noisy_data(rng, 60, 1);
  Matrix twin(60, 2);
  for (std::size_t r = 0; r < 60; ++r) twin(r, 0) = twin(r, 1) = d.X(r, 0);
  models::ForestParams fp;
  fp.max_depth = 2;
  fp.feature_subsample = 2;
  std::vector<std::size_t> rows(60);
  for (std::size_t i = 0; i < 60; ++i) rows[i] = i;
  Rng tree_rng(1);
  const auto tree = models::grow_tree(twin, d.y, rows, fp, tree_rng);
  for (const auto& nd : tree.nodes) {
    if (nd.feature >= 0) CHECK(nd.feature == 0);
  }
}

TEST_CASE("forest prediction is the average of its trees") {
  Rng rng(4);
  auto d = noisy_data(rng, 300, 4);
  models::ForestParams fp;
  fp.trees = 7;
  fp.seed = 99;
  const auto m = models::fit(models::ModelSpec::random_forest(fp), d.X, d.y);
  const auto& forest = std::get<models::ForestModel>(m.params);
  REQUIRE(forest.trees.size() == 7);
  const auto pred = models::predict(m, d.X);
  for (std::size_t r = 0; r < 50; ++r) {
    double s = 0;
    for (const auto& t : forest.trees) s += walk(t, d.X.row(r));
    CHECK(pred[r] == doctest::Approx(s / 7).epsilon(1e-14));
  }
}

TEST_CASE("forests are reproducible by seed") {
  Rng rng(5);
  auto d = noisy_data(rng, 200, 3);
  models::ForestParams fp;
  fp.trees = 5;
  fp.seed = 3;
  const auto a = models::fit(models::ModelSpec::random_forest(fp), d.X, d.y);
  const auto b = models::fit(models::ModelSpec::random_forest(fp), d.X, d.y);
  CHECK(models::to_json(a).dump() == models::to_json(b).dump());
  fp.seed = 4;
  const auto c = models::fit(models::ModelSpec::random_forest(fp), d.X, d.y);
  CHECK(models::to_json(a).dump() != models::to_json(c).dump());
}

TEST_CASE("persistence baseline") {
  CHECK(models::persistence_predict(std::vector<double>{5, 5, 5}) == std::vector<double>{5, 5});
  const std::vector<double> s{1, 2, 3};
  const auto p = models::persistence_predict(s);
  CHECK(p == std::vector<double>{1, 2});
  CHECK(mean_absolute_error(p, std::vector<double>{2, 3}) == 1.0);
  CHECK_THROWS_AS(models::persistence_predict(std::vector<double>{1}), Error);
}

TEST_CASE("persistence error on a random walk is the mean step size") {
  Rng rng(6);
  const std::size_t n = 200000;
  std::vector<double> walk_series(n);
  for (std::size_t i = 1; i < n; ++i) walk_series[i] = walk_series[i - 1] + rng.normal();
  const auto p = models::persistence_predict(walk_series);
  const double mae = mean_absolute_error(p, std::span(walk_series).subspan(1));
  // E|N(0,1)| = sqrt(2 / pi).
  CHECK(mae == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(0.01));
}

TEST_CASE("artifacts round trip to identical predictions") {
  Rng rng(7);
  auto d = noisy_data(rng, 150, 3);
  models::ForestParams fp;
  fp.trees = 4;
  fp.seed = 1;
  for (const auto& spec : {models::ModelSpec::mean(), models::ModelSpec::persistence(), models::ModelSpec::ridge(0.5),
                           models::ModelSpec::knn(3), models::ModelSpec::random_forest(fp)}) {
    const auto m = models::fit(spec, d.X, d.y, {"a", "b", "c"});
    const auto text = models::to_json(m).dump();
    const auto back = models::model_from_json(nlohmann::json::parse(text));
    CHECK(back.spec == m.spec);
    CHECK(back.selected_features == m.selected_features);
    CHECK(models::predict(back, d.X) == models::predict(m, d.X));
    CHECK(models::to_json(back).dump() == text);
  }
}

TEST_CASE("prediction arity is checked") {
  Rng rng(8);
  auto d = noisy_data(rng, 30, 3);
  const auto m = models::fit(models::ModelSpec::ridge(), d.X, d.y);
  try {
    models::predict(m, Matrix(2, 2));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::shape);
  }
}

TEST_CASE("predictions are finite on finite input") {
  Rng rng(9);
  auto d = noisy_data(rng, 80, 2);
  for (const auto& spec : {models::ModelSpec::mean(), models::ModelSpec::ridge(), models::ModelSpec::knn(),
                           models::ModelSpec::random_forest()}) {
    for (double v : models::predict(models::fit(spec, d.X, d.y), d.X)) CHECK(std::isfinite(v));
  }
}

}
