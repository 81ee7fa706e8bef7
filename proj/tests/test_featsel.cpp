#include <algorithm>
#include <cmath>

#include "autopower/error.hpp"
#include "autopower/featsel.hpp"
#include "autopower/rng.hpp"
#include "autopower/stats.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace autopower;
namespace oracle = testing_support::oracle;

namespace {

double pearson_r2(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy * sxy / (sxx * syy));
}

}  // namespace

TEST_SUITE("featsel") {

TEST_CASE("F statistic follows r^2 / (1 - r^2) * (n - 2)") {
  Rng rng(1);
  const std::size_t n = 200;
  Matrix X(n, 3);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 3; ++c) X(r, c) = rng.normal();
    y[r] = 2 * X(r, 0) - 0.3 * X(r, 1) + rng.normal();
  }
  const auto f = featsel::f_test_scores(X, y);
  for (std::size_t c = 0; c < 3; ++c) {
    const double r2 = pearson_r2(X.column(c), y);
    CHECK(f[c] == doctest::Approx(r2 / (1 - r2) * (n - 2)).epsilon(1e-9));
  }
  CHECK(f[0] > f[1]);
  CHECK(f[1] > f[2]);
}

TEST_CASE("perfect correlation is clamped and flagged") {
  Matrix X(50, 2);
  std::vector<double> y(50);
  Rng rng(2);
  for (std::size_t r = 0; r < 50; ++r) {
    X(r, 0) = rng.normal();
    X(r, 1) = rng.normal();
    y[r] = 3 * X(r, 0);
  }
  featsel::ScoreNotes notes;
  const auto f = featsel::f_test_scores(X, y, &notes);
  CHECK(std::isfinite(f[0]));
  CHECK(f[0] == doctest::Approx((1 - 1e-12) / 1e-12 * 48).epsilon(1e-3));
  CHECK(f[0] == *std::max_element(f.begin(), f.end()));
  CHECK(notes.clamped_columns == std::vector<std::size_t>{0});
}

TEST_CASE("constant target scores zero; constant column is an error") {
  Matrix X(20, 2);
  for (std::size_t r = 0; r < 20; ++r) {
    X(r, 0) = static_cast<double>(r);
    X(r, 1) = static_cast<double>(r * r);
  }
  CHECK(featsel::f_test_scores(X, std::vector<double>(20, 5.0)) == std::vector<double>{0.0, 0.0});
  Matrix flat(20, 1, 2.0);
  std::vector<double> y(20);
  for (std::size_t r = 0; r < 20; ++r) y[r] = static_cast<double>(r);
  try {
    featsel::f_test_scores(flat, y);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
}

TEST_CASE("independent features exceed the 1% F critical value about 1% of the time") {
  // F(0.99; 1, 98) = 6.9008, from the F distribution quantile.
  const double crit = 6.9008;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(1000 + seed);
    Matrix X(100, 1);
    std::vector<double> y(100);
    for (std::size_t r = 0; r < 100; ++r) {
      X(r, 0) = rng.normal();
      y[r] = rng.normal();
    }
    hits += featsel::f_test_scores(X, y)[0] > crit;
  }
  // Binomial(1000, 0.01): mean 10, sd 3.1.
  CHECK(hits >= 2);
  CHECK(hits <= 22);
}

TEST_CASE("quantile bins agree with the counting oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(300);
    const std::size_t bins = 2 + rng.index(15);
    std::vector<double> v(n);
    const int spread = trial % 4 == 0 ? 5 : 1000;
    for (auto& x : v) x = static_cast<double>(rng.index(spread));
    CHECK(featsel::quantile_bins(v, bins) == oracle::quantile_codes(v, bins));
  }
}

TEST_CASE("mutual information matches the contingency-table oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t bins = 2 + rng.index(10);
    const std::size_t n = bins * bins + rng.index(500);
    Matrix X(n, 2);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      X(r, 0) = rng.normal();
      X(r, 1) = std::round(rng.normal(0, 2));
      y[r] = X(r, 0) + rng.normal(0, 0.5) + (trial % 2 ? X(r, 1) : 0.0);
    }
    const auto got = featsel::mutual_info_scores(X, y, bins);
    const auto yc = oracle::quantile_codes(y, bins);
    for (std::size_t c = 0; c < 2; ++c) {
      const double want = std::max(0.0, oracle::mutual_information(oracle::quantile_codes(X.column(c), bins), yc));
      CHECK(std::fabs(got[c] - want) <= 1e-12);
    }
  }
}

TEST_CASE("self information with equal-frequency bins is log(bins)") {
  Rng rng(5);
  const std::size_t n = 4000;
  Matrix X(n, 1);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = X(r, 0) = rng.normal();
  CHECK(featsel::mutual_info_scores(X, y, 4)[0] == doctest::Approx(std::log(4.0)).epsilon(0.05 / std::log(4.0)));
}

TEST_CASE("independent uniforms carry little information") {
  Rng rng(6);
  const std::size_t n = 10000;
  Matrix X(n, 1);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    X(r, 0) = rng.uniform();
    y[r] = rng.uniform();
  }
  const double mi = featsel::mutual_info_scores(X, y, 8)[0];
  CHECK(mi >= 0.0);
  CHECK(mi < 0.02);
  // Plug-in bias is about (bins - 1)^2 / (2n) = 0.00245 nats.
  CHECK(mi == doctest::Approx(0.00245).epsilon(0.6));
}

TEST_CASE("mutual information is symmetric") {
  Rng rng(7);
  const std::size_t n = 600;
  Matrix X(n, 1), Y(n, 1);
  std::vector<double> x(n), y(n);
  for (std::size_t r = 0; r < n; ++r) {
    x[r] = X(r, 0) = rng.normal();
    y[r] = Y(r, 0) = x[r] * x[r] + rng.normal(0, 0.3);
  }
  CHECK(featsel::mutual_info_scores(X, y, 8)[0] == featsel::mutual_info_scores(Y, x, 8)[0]);
}

TEST_CASE("mutual information needs bins^2 rows") {
  CHECK_THROWS_AS(featsel::mutual_info_scores(Matrix(15, 1), std::vector<double>(15), 4), Error);
}

TEST_CASE("top_k orders by score with ties to the lower index") {
  const std::vector<double> s{1.0, 3.0, 3.0, 2.0};
  CHECK(featsel::top_k(s, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(featsel::top_k(s, 0), Error);
  CHECK_THROWS_AS(featsel::top_k(s, 5), Error);
}

TEST_CASE("select_k shape and the two-feature oracle") {
  Rng rng(8);
  const std::size_t n = 600;
  Matrix X(n, 4);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 4; ++c) X(r, c) = rng.normal();
    y[r] = X(r, 0) + X(r, 1) + rng.normal(0, 0.05);
  }
  const auto res = featsel::select_k(X, y, models::ModelSpec::ridge(), {});
  REQUIRE(res.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(res[k].k == k + 1);
    CHECK(res[k].scores.size() == 10);
  }
  CHECK(stats::median(res[1].scores) <= stats::median(res[0].scores));

  Matrix one = X.select_columns(std::vector<std::size_t>{0});
  const auto single = featsel::select_k(one, y, models::ModelSpec::mean(), {});
  CHECK(single.size() == 1);
}

TEST_CASE("IQR reduction over per-k medians") {
  const auto r = featsel::rank_k_medians({{1, 10}, {2, 11}, {3, 12}, {4, 500}});
  const std::vector<double> meds{10, 11, 12, 500};
  CHECK(r.med == oracle::percentile(meds, 50));
  CHECK(r.q25 == oracle::percentile(meds, 25));
  CHECK(r.q75 == oracle::percentile(meds, 75));
  CHECK(r.med == 11.5);
  CHECK(r.q25 == 10.75);
  CHECK(r.q75 == 134.0);
  REQUIRE(r.filtered.size() == 3);
  CHECK(r.best_k == 2);
  CHECK_FALSE(r.fallback);
}

TEST_CASE("equal medians fall back to the smallest minimal k") {
  const auto r = featsel::rank_k_medians({{1, 5}, {2, 5}, {3, 5}});
  CHECK(r.fallback);
  CHECK(r.best_k == 1);
  CHECK(r.filtered.empty());
  const auto single = featsel::rank_k_medians({{1, 3}});
  CHECK(single.best_k == 1);
}

TEST_CASE("best_k always appears in the filtered set") {
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<featsel::KMedian> meds;
    const std::size_t p = 1 + rng.index(20);
    for (std::size_t k = 1; k <= p; ++k) meds.push_back({k, std::round(rng.exponential(10))});
    const auto r = featsel::rank_k_medians(meds);
    CHECK(r.best_k >= 1);
    CHECK(r.best_k <= p);
    if (!r.fallback) {
      CHECK(std::any_of(r.filtered.begin(), r.filtered.end(), [&](const auto& m) { return m.k == r.best_k; }));
      CHECK(r.filtered[r.filtered.size() / 2].k == r.best_k);
    }
  }
}

TEST_CASE("build_k_rank is deterministic") {
  Rng rng(10);
  const std::size_t n = 1000;
  Matrix X(n, 5);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 5; ++c) X(r, c) = rng.normal();
    y[r] = 3 * X(r, 2) + X(r, 4) + rng.normal(0, 0.5);
  }
  const auto a = featsel::build_k_rank(X, y, models::ModelSpec::ridge(), {featsel::ScoreKind::mutual_info, 8});
  const auto b = featsel::build_k_rank(X, y, models::ModelSpec::ridge(), {featsel::ScoreKind::mutual_info, 8});
  CHECK(featsel::to_json(a).dump() == featsel::to_json(b).dump());
  CHECK(a.repetitions == featsel::kRankRepetitions);
  CHECK(a.per_k_medians.size() == 5);

  models::ForestParams fp;
  fp.trees = 3;
  fp.max_depth = 4;
  featsel::KRankOptions opts;
  opts.repetitions = 3;
  opts.base_seed = 17;
  const auto f1 = featsel::build_k_rank(X, y, models::ModelSpec::random_forest(fp), {}, opts);
  const auto f2 = featsel::build_k_rank(X, y, models::ModelSpec::random_forest(fp), {}, opts);
  CHECK(f1.repetitions == 3);
  CHECK(featsel::to_json(f1).dump() == featsel::to_json(f2).dump());
}

TEST_CASE("bin count follows the rows available") {
  CHECK(featsel::bins_for_rows(16, 256) == 16);
  CHECK(featsel::bins_for_rows(16, 255) == 15);
  CHECK(featsel::bins_for_rows(16, 10000) == 16);
  CHECK(featsel::bins_for_rows(16, 3) == 2);
  for (std::size_t n = 4; n < 2000; ++n) {
    const auto b = featsel::bins_for_rows(64, n);
    CHECK(b * b <= n);
    CHECK((b == 64 || (b + 1) * (b + 1) > n));
  }
}

TEST_CASE("mutual-information selection runs on short series") {
  Rng rng(21);
  const std::size_t n = 600;  // first training window is 60 rows, below 16^2
  Matrix X(n, 4);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 4; ++c) X(r, c) = rng.normal();
    y[r] = 2 * X(r, 1) + rng.normal(0, 0.3);
  }
  const auto res = featsel::select_k(X, y, models::ModelSpec::ridge(), {featsel::ScoreKind::mutual_info, 16});
  REQUIRE(res.size() == 4);
  // The informative feature is found first, so k = 1 already does as well as k = 4.
  CHECK(stats::median(res[0].scores) <= 1.05 * stats::median(res[3].scores));
}

}
