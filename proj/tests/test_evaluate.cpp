#include <algorithm>
#include <cmath>

#include "autopower/error.hpp"
#include "autopower/evaluate.hpp"
#include "autopower/rng.hpp"
#include "autopower/stats.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace autopower;
namespace oracle = testing_support::oracle;

namespace {

FeatureMatrix ramp_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.feature_names = {"a", "b"};
  m.X = Matrix(n, 2);
  m.y.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    m.X(r, 0) = rng.normal();
    m.X(r, 1) = rng.normal();
    m.y[r] = 100 + 10 * m.X(r, 0) + rng.normal(0, 1);
  }
  return m;
}

}  // namespace

TEST_SUITE("evaluate") {

TEST_CASE("split arithmetic by hand") {
  const auto plan = evaluate::time_series_splits(10, 3);
  REQUIRE(plan.splits.size() == 3);
  CHECK(plan.splits[0].train_end == 4);
  CHECK(plan.splits[0].test_end == 6);
  CHECK(plan.splits[1].train_end == 6);
  CHECK(plan.splits[1].test_end == 8);
  CHECK(plan.splits[2].train_end == 8);
  CHECK(plan.splits[2].test_end == 10);
  const auto one = evaluate::time_series_splits(4, 1);
  CHECK(one.splits[0].train_end == 2);
  CHECK(one.splits[0].test_end == 4);
  CHECK_THROWS_AS(evaluate::time_series_splits(5, 3), Error);
}

TEST_CASE("splits never leak and tile the tail") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.index(40);
    const std::size_t n = 2 * (k + 1) + rng.index(5000);
    const auto plan = evaluate::time_series_splits(n, k);
    const std::size_t t = n / (k + 1), r = n - k * t;
    std::size_t expect = r;
    for (const auto& s : plan.splits) {
      CHECK(s.train_end >= 1);
      CHECK(s.test_begin() == expect);
      CHECK(s.test_end - s.test_begin() == t);
      expect = s.test_end;
    }
    CHECK(expect == n);
  }
}

TEST_CASE("cross validation shapes and trivial scores") {
  auto m = ramp_data(200, 2);
  const auto plan = evaluate::time_series_splits(200, 10);
  std::vector<double> flat(200, 7.0);
  const auto zero = evaluate::cross_validate(models::ModelSpec::mean(), m.X, flat, plan);
  CHECK(zero == std::vector<double>(10, 0.0));
  const auto ridge = evaluate::cross_validate(models::ModelSpec::ridge(), m.X, m.y, plan);
  CHECK(ridge.size() == 10);
  for (double s : ridge) CHECK(s < 3.0);
}

TEST_CASE("persistence in cross validation forecasts from the previous row") {
  // y[i] = i: every one-step forecast is off by exactly 1.
  Matrix X(40, 1, 0.0);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<double>(i);
  const auto s = evaluate::cross_validate(models::ModelSpec::persistence(), X, y, evaluate::time_series_splits(40, 4));
  CHECK(s == std::vector<double>(4, 1.0));
}

TEST_CASE("knn on the time index averages the last two training targets") {
  // X is the time index, so the two nearest training rows are always the last two.
  Rng rng(3);
  Matrix X(60, 1);
  std::vector<double> y(60);
  double level = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    X(i, 0) = static_cast<double>(i);
    level += rng.normal();
    y[i] = level;
  }
  const auto s = evaluate::cross_validate(models::ModelSpec::knn(2), X, y, evaluate::time_series_splits(60, 5));
  REQUIRE(s.size() == 5);
  for (double v : s) CHECK(std::isfinite(v));
  const auto plan = evaluate::time_series_splits(60, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& sp = plan.splits[k];
    const double f = 0.5 * (y[sp.train_end - 1] + y[sp.train_end - 2]);
    double mae = 0;
    for (std::size_t i = sp.test_begin(); i < sp.test_end; ++i) mae += std::fabs(y[i] - f);
    CHECK(s[k] == doctest::Approx(mae / static_cast<double>(sp.test_end - sp.test_begin())).epsilon(1e-12));
  }
}

TEST_CASE("score filter") {
  std::vector<double> same(30, 4.0);
  const auto all = evaluate::filter_scores(same);
  CHECK(all.quartiles.iiq == 0.0);
  CHECK(all.retained.size() == 30);

  // Evenly spaced scores all sit inside median +- 1.5 IQR.
  std::vector<double> s(30);
  for (std::size_t i = 0; i < 30; ++i) s[i] = 10 + 0.01 * static_cast<double>(i);
  const auto base = evaluate::filter_scores(s);
  CHECK(base.retained.size() == 30);
  s[17] = 100 * stats::median(s);
  const auto f = evaluate::filter_scores(s);
  CHECK(f.retained.size() == 29);
  CHECK(std::find(f.retained.begin(), f.retained.end(), 17u) == f.retained.end());
}

TEST_CASE("thirty-run benchmark contract") {
  const auto m = ramp_data(400, 5);
  const auto r = evaluate::thirty_run_benchmark(models::ModelSpec::ridge(), m);
  CHECK(r.run_scores.size() == 30);
  CHECK(r.train_sizes.size() == 30);
  CHECK(r.final_model.train_rows == r.final_train_size);
  std::size_t largest = 0;
  for (auto i : r.retained_runs) {
    CHECK(i < 30);
    largest = std::max(largest, r.train_sizes[i]);
  }
  CHECK(r.final_train_size == largest);
  CHECK(r.median == stats::median(r.run_scores));

  FeatureMatrix flat = m;
  std::fill(flat.y.begin(), flat.y.end(), 3.0);
  const auto z = evaluate::thirty_run_benchmark(models::ModelSpec::mean(), flat);
  CHECK(z.retained_runs.size() == 30);
  CHECK(z.final_train_size == z.train_sizes.back());
}

TEST_CASE("benchmark JSON round trip") {
  const auto m = ramp_data(200, 6);
  const auto r = evaluate::thirty_run_benchmark(models::ModelSpec::knn(3), m, 10);
  const auto text = evaluate::to_json(r).dump();
  CHECK(evaluate::to_json(evaluate::benchmark_from_json(nlohmann::json::parse(text))).dump() == text);
}

TEST_CASE("average ranks with ties") {
  CHECK(evaluate::rank_with_ties(std::vector<double>{10, 20, 20, 30}) == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(evaluate::rank_with_ties(std::vector<double>{5, 5, 5, 5}) == std::vector<double>{2.5, 2.5, 2.5, 2.5});
  CHECK(evaluate::rank_with_ties(std::vector<double>{3, 1, 2}) == std::vector<double>{3, 1, 2});
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + rng.index(9));
    for (auto& x : v) x = static_cast<double>(rng.index(4));
    const auto r = evaluate::rank_with_ties(v);
    double sum = 0;
    for (double x : r) sum += x;
    const double k = static_cast<double>(v.size());
    CHECK(sum == k * (k + 1) / 2);
  }
}

TEST_CASE("Nemenyi q statistic") {
  CHECK(evaluate::nemenyi_q(2.5, 2.5, 4, 30) == 0.0);
  CHECK(evaluate::nemenyi_q(4, 1, 4, 30) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(evaluate::nemenyi_q(1.3, 3.1, 5, 12) == -evaluate::nemenyi_q(3.1, 1.3, 5, 12));
}

TEST_CASE("critical difference") {
  CHECK(std::fabs(evaluate::critical_difference(4, 30, 0.05) - 0.8563) <= 0.0005);
  CHECK(evaluate::critical_difference(2, 30, 0.05) == doctest::Approx(0.3578).epsilon(1e-3));
  CHECK(evaluate::critical_difference(4, 120, 0.05) == doctest::Approx(evaluate::critical_difference(4, 30, 0.05) / 2).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate::q_alpha(11, 0.05), Error);
  CHECK_THROWS_AS(evaluate::q_alpha(4, 0.01), Error);
}

TEST_CASE("q table agrees with the studentized range oracle") {
  for (double alpha : {0.05, 0.10}) {
    for (std::size_t k = 2; k <= 10; ++k) {
      CHECK(evaluate::q_alpha(k, alpha) == doctest::Approx(oracle::nemenyi_critical(k, alpha)).epsilon(3e-4));
    }
  }
}

TEST_CASE("rank tables") {
  Matrix scores(30, 4);
  Rng rng(8);
  for (std::size_t r = 0; r < 30; ++r) {
    // Mean ranks 1, 2, 3, 4 by construction.
    for (std::size_t c = 0; c < 4; ++c) scores(r, c) = 10.0 * static_cast<double>(c + 1) + rng.uniform();
  }
  const auto t = evaluate::rank_scores({"a", "b", "c", "d"}, scores);
  CHECK(t.mean_ranks == std::vector<double>{1, 2, 3, 4});
  CHECK(t.winner == "a");
  CHECK(std::fabs(t.cd - 0.8563) <= 0.0005);
  for (const auto& p : t.pairs) CHECK(p.significant);

  Matrix twins(30, 2);
  for (std::size_t r = 0; r < 30; ++r) twins(r, 0) = twins(r, 1) = rng.uniform();
  const auto u = evaluate::rank_scores({"x", "y"}, twins);
  CHECK(u.mean_ranks[0] == u.mean_ranks[1]);
  REQUIRE(u.pairs.size() == 1);
  CHECK_FALSE(u.pairs[0].significant);
  CHECK(u.winner == "x");
}

TEST_CASE("choose_best ranks benchmark results") {
  const auto m = ramp_data(300, 9);
  std::vector<evaluate::BenchmarkResult> rs{evaluate::thirty_run_benchmark(models::ModelSpec::mean(), m),
                                            evaluate::thirty_run_benchmark(models::ModelSpec::ridge(), m)};
  const auto t = evaluate::choose_best(rs);
  CHECK(t.winner == "ridge");
  CHECK(t.mean_ranks[1] == 1.0);
  const auto csv = evaluate::cd_diagram_csv(t);
  CHECK(csv.find("ridge") != std::string::npos);
}

TEST_CASE("bootstrap intervals") {
  const auto c = evaluate::bootstrap_ci(std::vector<double>(20, 3.5), 1000, 0.05, 1);
  CHECK(c.lower == 3.5);
  CHECK(c.upper == 3.5);
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> s(25);
    for (auto& v : s) v = rng.exponential(2);
    const auto ci = evaluate::bootstrap_ci(s, 2000, 0.05, 100 + t);
    CHECK(ci.lower <= stats::mean(s));
    CHECK(ci.upper >= stats::mean(s));
  }
  const auto a = evaluate::bootstrap_ci(std::vector<double>{1, 2, 3, 9}, 500, 0.1, 7);
  const auto b = evaluate::bootstrap_ci(std::vector<double>{1, 2, 3, 9}, 500, 0.1, 7);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
}

}
