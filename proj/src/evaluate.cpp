#include "autopower/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "autopower/core.hpp"
#include "autopower/error.hpp"
#include "autopower/ingest.hpp"
#include "autopower/rng.hpp"

namespace autopower::evaluate {

using nlohmann::json;

SplitPlan time_series_splits(std::size_t n, std::size_t n_splits) {
  if (n_splits < 1) throw Error(ErrorKind::parameter, "evaluate", "need at least one split");
  const std::size_t minimum = 2 * (n_splits + 1);
  if (n < minimum) {
    throw Error(ErrorKind::parameter, "evaluate",
                std::to_string(n_splits) + " splits need at least " + std::to_string(minimum) + " rows, got " +
                    std::to_string(n));
  }
  const std::size_t t = n / (n_splits + 1);
  const std::size_t r = n - n_splits * t;
  SplitPlan plan{n, n_splits, {}};
  for (std::size_t i = 1; i <= n_splits; ++i) plan.splits.push_back({r + (i - 1) * t, r + i * t});
  return plan;
}

std::vector<double> cross_validate(const models::ModelSpec& spec, const Matrix& X, std::span<const double> y,
                                   const SplitPlan& plan, const std::vector<std::string>& feature_names) {
  if (plan.n != X.rows() || y.size() != X.rows()) {
    throw Error(ErrorKind::shape, "evaluate", "split plan does not match the data");
  }
  std::vector<double> scores;
  scores.reserve(plan.splits.size());
  for (std::size_t s = 0; s < plan.splits.size(); ++s) {
    const auto& split = plan.splits[s];
    const auto actual = y.subspan(split.test_begin(), split.test_end - split.test_begin());
    try {
      if (spec.kind == models::ModelKind::persistence) {
        const auto window = y.subspan(split.test_begin() - 1, actual.size() + 1);
        scores.push_back(mean_absolute_error(models::persistence_predict(window), actual));
        continue;
      }
      const auto model = models::fit(spec, X.slice_rows(0, split.train_end), y.first(split.train_end), feature_names);
      const auto predicted = models::predict(model, X.slice_rows(split.test_begin(), split.test_end));
      scores.push_back(mean_absolute_error(predicted, actual));
    } catch (const Error& e) {
      rethrow_with_context(e, "split " + std::to_string(s));
    }
  }
  return scores;
}

ScoreFilter filter_scores(std::span<const double> scores) {
  ScoreFilter f;
  f.quartiles = stats::quartiles(scores);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (f.quartiles.iiq == 0.0 || (scores[i] > f.quartiles.low && scores[i] < f.quartiles.high)) {
      f.retained.push_back(i);
    }
  }
  return f;
}

BenchmarkResult thirty_run_benchmark(const models::ModelSpec& spec, const FeatureMatrix& data, std::size_t n_splits) {
  data.validate();
  if (data.has_missing()) throw Error(ErrorKind::parameter, "evaluate", "benchmark needs complete rows");
  const auto plan = time_series_splits(data.n(), n_splits);

  BenchmarkResult result;
  result.algorithm = spec.name();
  result.spec = spec;
  result.run_scores = cross_validate(spec, data.X, data.y, plan, data.feature_names);
  for (const auto& s : plan.splits) result.train_sizes.push_back(s.train_end);

  const auto filter = filter_scores(result.run_scores);
  result.median = filter.quartiles.median;
  result.q25 = filter.quartiles.q25;
  result.q75 = filter.quartiles.q75;
  result.iiq = filter.quartiles.iiq;
  result.retained_runs = filter.retained;
  for (auto i : filter.retained) result.final_train_size = std::max(result.final_train_size, result.train_sizes[i]);

  try {
    result.final_model = models::fit(spec, data.X.slice_rows(0, result.final_train_size),
                                     std::span<const double>(data.y).first(result.final_train_size),
                                     data.feature_names);
  } catch (const Error& e) {
    rethrow_with_context(e, "final fit");
  }
  result.final_model.metrics = {{"cv_median_mae_mw", result.median},
                                {"cv_q25_mae_mw", result.q25},
                                {"cv_q75_mae_mw", result.q75},
                                {"retained_runs", result.retained_runs.size()}};
  return result;
}

std::vector<double> rank_with_ties(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1 .. j+1).
    const double shared = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = shared;
    i = j + 1;
  }
  return ranks;
}

double nemenyi_q(double mean_rank_a, double mean_rank_b, std::size_t k, std::size_t n) {
  const double kd = static_cast<double>(k);
  return (mean_rank_a - mean_rank_b) / std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

double q_alpha(std::size_t k, double alpha) {
  static constexpr std::array<double, 9> q05{1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164};
  static constexpr std::array<double, 9> q10{1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920};
  if (k < 2 || k > 10) {
    throw Error(ErrorKind::table_range, "evaluate", "Nemenyi table covers 2..10 algorithms, got " + std::to_string(k));
  }
  if (std::fabs(alpha - 0.05) < 1e-12) return q05[k - 2];
  if (std::fabs(alpha - 0.10) < 1e-12) return q10[k - 2];
  throw Error(ErrorKind::table_range, "evaluate", "Nemenyi table covers alpha 0.05 and 0.10 only");
}

double critical_difference(std::size_t k, std::size_t n, double alpha) {
  if (n < 1) throw Error(ErrorKind::parameter, "evaluate", "need at least one run");
  const double kd = static_cast<double>(k);
  return q_alpha(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

RankTable rank_scores(const std::vector<std::string>& algorithms, const Matrix& scores, double alpha) {
  const std::size_t runs = scores.rows(), k = scores.cols();
  if (k == 0 || k != algorithms.size()) throw Error(ErrorKind::shape, "evaluate", "score columns do not match algorithms");
  if (runs == 0) throw Error(ErrorKind::empty_input, "evaluate", "no runs to rank");

  RankTable table;
  table.algorithms = algorithms;
  table.scores = scores;
  table.alpha = alpha;
  table.ranks = Matrix(runs, k);
  table.mean_ranks.assign(k, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    const auto ranks = rank_with_ties(scores.row(r));
    for (std::size_t a = 0; a < k; ++a) {
      table.ranks(r, a) = ranks[a];
      table.mean_ranks[a] += ranks[a];
    }
  }
  for (auto& m : table.mean_ranks) m /= static_cast<double>(runs);

  const auto best = std::min_element(table.mean_ranks.begin(), table.mean_ranks.end());
  table.winner = algorithms[static_cast<std::size_t>(best - table.mean_ranks.begin())];
  table.cd = k >= 2 ? critical_difference(k, runs, alpha) : 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      PairComparison pc;
      pc.a = algorithms[a];
      pc.b = algorithms[b];
      pc.rank_difference = table.mean_ranks[a] - table.mean_ranks[b];
      pc.q = nemenyi_q(table.mean_ranks[a], table.mean_ranks[b], k, runs);
      pc.significant = std::fabs(pc.rank_difference) > table.cd;
      table.pairs.push_back(pc);
    }
  }
  return table;
}

RankTable choose_best(const std::vector<BenchmarkResult>& results, double alpha) {
  if (results.empty()) throw Error(ErrorKind::empty_input, "evaluate", "no benchmark results to rank");
  const std::size_t runs = results.front().run_scores.size();
  std::vector<std::string> names;
  Matrix scores(runs, results.size());
  for (std::size_t a = 0; a < results.size(); ++a) {
    if (results[a].run_scores.size() != runs) {
      throw Error(ErrorKind::shape, "evaluate",
                  "'" + results[a].algorithm + "' has " + std::to_string(results[a].run_scores.size()) +
                      " runs, expected " + std::to_string(runs));
    }
    names.push_back(results[a].algorithm);
    for (std::size_t r = 0; r < runs; ++r) scores(r, a) = results[a].run_scores[r];
  }
  return rank_scores(names, scores, alpha);
}

Interval bootstrap_ci(std::span<const double> samples, std::size_t resamples, double alpha, std::uint64_t seed) {
  if (samples.size() < 2) throw Error(ErrorKind::parameter, "evaluate", "bootstrap needs at least two samples");
  if (resamples < 100) throw Error(ErrorKind::parameter, "evaluate", "bootstrap needs at least 100 resamples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::parameter, "evaluate", "alpha must lie in (0, 1)");
  Rng rng(seed);
  const std::size_t n = samples.size();
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += samples[static_cast<std::size_t>(rng.index(n))];
    m = s / static_cast<double>(n);
  }
  return {stats::percentile(means, 100.0 * alpha / 2.0), stats::percentile(means, 100.0 * (1.0 - alpha / 2.0))};
}

json to_json(const SplitPlan& plan) {
  json splits = json::array();
  for (const auto& s : plan.splits) {
    splits.push_back({{"train", {0, s.train_end}}, {"test", {s.test_begin(), s.test_end}}});
  }
  return {{"n", plan.n}, {"n_splits", plan.n_splits}, {"splits", splits}};
}

json to_json(const BenchmarkResult& r) {
  return {{"algorithm", r.algorithm},
          {"scenario", r.scenario},
          {"spec", models::to_json(r.spec)},
          {"run_scores", r.run_scores},
          {"train_sizes", r.train_sizes},
          {"median", r.median},
          {"q25", r.q25},
          {"q75", r.q75},
          {"iiq", r.iiq},
          {"retained_runs", r.retained_runs},
          {"final_train_size", r.final_train_size},
          {"final_model", models::to_json(r.final_model)}};
}

BenchmarkResult benchmark_from_json(const json& j) {
  BenchmarkResult r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.scenario = j.value("scenario", std::string());
  r.spec = models::spec_from_json(j.at("spec"));
  r.run_scores = j.at("run_scores").get<std::vector<double>>();
  r.train_sizes = j.at("train_sizes").get<std::vector<std::size_t>>();
  r.median = j.at("median").get<double>();
  r.q25 = j.at("q25").get<double>();
  r.q75 = j.at("q75").get<double>();
  r.iiq = j.at("iiq").get<double>();
  r.retained_runs = j.at("retained_runs").get<std::vector<std::size_t>>();
  r.final_train_size = j.at("final_train_size").get<std::size_t>();
  r.final_model = models::model_from_json(j.at("final_model"));
  return r;
}

json to_json(const RankTable& t) {
  json runs = json::array();
  for (std::size_t r = 0; r < t.scores.rows(); ++r) {
    const auto s = t.scores.row(r);
    const auto k = t.ranks.row(r);
    runs.push_back({{"scores", std::vector<double>(s.begin(), s.end())},
                    {"ranks", std::vector<double>(k.begin(), k.end())}});
  }
  json pairs = json::array();
  for (const auto& p : t.pairs) {
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"rank_difference", p.rank_difference}, {"q", p.q},
                     {"significant", p.significant}});
  }
  return {{"algorithms", t.algorithms}, {"runs", runs},       {"mean_ranks", t.mean_ranks}, {"alpha", t.alpha},
          {"cd", t.cd},                 {"winner", t.winner}, {"pairs", pairs}};
}

std::string cd_diagram_csv(const RankTable& t) {
  std::string out = "algorithm,mean_rank,cd\n";
  for (std::size_t a = 0; a < t.algorithms.size(); ++a) {
    out += t.algorithms[a] + "," + ingest::format_number(t.mean_ranks[a]) + "," + ingest::format_number(t.cd) + "\n";
  }
  return out;
}

}  // namespace autopower::evaluate
