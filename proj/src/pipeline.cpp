#include "autopower/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "autopower/error.hpp"

namespace autopower::pipeline {

using nlohmann::json;

namespace {

constexpr const char* kModule = "pipeline";

models::ForestParams benchmark_forest() {
  models::ForestParams p;
  p.trees = 50;
  return p;
}

models::ForestParams selection_forest() {
  models::ForestParams p;
  p.trees = 5;
  p.max_depth = 6;
  return p;
}

template <class F>
auto staged(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_with_context(e, "stage " + stage);
  }
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::full: return "full";
    case Scenario::no_orientation: return "no-orientation";
    case Scenario::feature_selected: return "feature-selected";
  }
  return "full";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "full") return Scenario::full;
  if (name == "no-orientation") return Scenario::no_orientation;
  if (name == "feature-selected") return Scenario::feature_selected;
  throw Error(ErrorKind::parameter, kModule,
              "unknown scenario '" + name + "' (expected full, no-orientation or feature-selected)");
}

PipelineConfig::PipelineConfig()
    : models{models::ModelSpec::mean(), models::ModelSpec::ridge(), models::ModelSpec::knn(),
             models::ModelSpec::random_forest(benchmark_forest())},
      selection_models{models::ModelSpec::ridge(), models::ModelSpec::random_forest(selection_forest())} {}

void PipelineConfig::validate() const {
  if (scenarios.empty()) throw Error(ErrorKind::parameter, kModule, "no scenarios configured");
  if (models.empty()) throw Error(ErrorKind::parameter, kModule, "no models configured");
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (models[j].name() == models[i].name()) {
        throw Error(ErrorKind::parameter, kModule, "model '" + models[i].name() + "' listed twice");
      }
    }
  }
  const bool selects = std::find(scenarios.begin(), scenarios.end(), Scenario::feature_selected) != scenarios.end();
  if (selects && (strategies.empty() || selection_models.empty())) {
    throw Error(ErrorKind::parameter, kModule, "feature-selected scenario needs strategies and selection models");
  }
  for (const auto& m : selection_models) m.validate();
  if (k_rank_repetitions < 1) throw Error(ErrorKind::parameter, kModule, "k_rank_repetitions must be >= 1");
  if (k_rank_splits < 2) throw Error(ErrorKind::parameter, kModule, "k_rank_splits must be >= 2");
  if (benchmark_runs < 2) throw Error(ErrorKind::parameter, kModule, "benchmark_runs must be >= 2");
  if (!(alpha == 0.05 || alpha == 0.10)) throw Error(ErrorKind::parameter, kModule, "alpha must be 0.05 or 0.10");
  if (mi_bins < 2) throw Error(ErrorKind::parameter, kModule, "mi_bins must be >= 2");
}

json to_json(const PipelineConfig& c) {
  json scenarios = json::array();
  for (auto s : c.scenarios) scenarios.push_back(to_string(s));
  json model_list = json::array();
  for (const auto& m : c.models) model_list.push_back(models::to_json(m));
  json strategies = json::array();
  for (auto s : c.strategies) strategies.push_back(featsel::to_string(s));
  json selection = json::array();
  for (const auto& m : c.selection_models) selection.push_back(models::to_json(m));
  return {{"cleaning",
           {{"sparse_fraction", c.cleaning.sparse_fraction},
            {"variance_floor", c.cleaning.variance_floor},
            {"lof_k", c.cleaning.lof_k},
            {"lof_threshold", c.cleaning.lof_threshold},
            {"allow_excessive_outliers", c.cleaning.allow_excessive_outliers}}},
          {"scenarios", scenarios},
          {"models", model_list},
          {"strategies", strategies},
          {"selection_models", selection},
          {"mi_bins", c.mi_bins},
          {"k_rank_repetitions", c.k_rank_repetitions},
          {"k_rank_splits", c.k_rank_splits},
          {"benchmark_runs", c.benchmark_runs},
          {"seed", c.seed},
          {"alpha", c.alpha}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  try {
    if (j.contains("cleaning")) {
      const auto& cl = j.at("cleaning");
      c.cleaning.sparse_fraction = cl.value("sparse_fraction", c.cleaning.sparse_fraction);
      c.cleaning.variance_floor = cl.value("variance_floor", c.cleaning.variance_floor);
      c.cleaning.lof_k = cl.value("lof_k", c.cleaning.lof_k);
      c.cleaning.lof_threshold = cl.value("lof_threshold", c.cleaning.lof_threshold);
      c.cleaning.allow_excessive_outliers = cl.value("allow_excessive_outliers", c.cleaning.allow_excessive_outliers);
    }
    if (j.contains("scenarios")) {
      c.scenarios.clear();
      for (const auto& s : j.at("scenarios")) c.scenarios.push_back(scenario_from_string(s.get<std::string>()));
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(models::spec_from_json(m));
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(featsel::score_kind_from_string(s.get<std::string>()));
    }
    if (j.contains("selection_models")) {
      c.selection_models.clear();
      for (const auto& m : j.at("selection_models")) c.selection_models.push_back(models::spec_from_json(m));
    }
    c.mi_bins = j.value("mi_bins", c.mi_bins);
    c.k_rank_repetitions = j.value("k_rank_repetitions", c.k_rank_repetitions);
    c.k_rank_splits = j.value("k_rank_splits", c.k_rank_splits);
    c.benchmark_runs = j.value("benchmark_runs", c.benchmark_runs);
    c.seed = j.value("seed", c.seed);
    c.alpha = j.value("alpha", c.alpha);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, kModule, std::string("bad pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineResult run_pipeline(const ingest::RawTrace& trace, const PipelineConfig& config, const ProgressFn& progress) {
  config.validate();
  auto report = [&](const std::string& stage) {
    if (progress) progress(stage);
  };
  PipelineResult result;

  const FeatureMatrix derived = staged("ingest", [&] { return ingest::derive_features(trace, &result.derive); });

  report("cleaning");
  cleaning::Cleaned cleaned = staged("cleaning", [&] { return cleaning::clean(derived, config.cleaning); });
  result.cleaning = cleaned.report;
  const FeatureMatrix& data = cleaned.matrix;

  report("selecting");
  std::vector<std::string> selected;
  const bool selects =
      std::find(config.scenarios.begin(), config.scenarios.end(), Scenario::feature_selected) != config.scenarios.end();
  if (selects) {
    staged("selecting", [&] {
      featsel::KRankOptions options;
      options.repetitions = config.k_rank_repetitions;
      options.splits = config.k_rank_splits;
      options.base_seed = config.seed;
      double best = 0.0;
      std::size_t best_i = 0;
      std::vector<featsel::ScoreStrategy> used;
      for (auto kind : config.strategies) {
        featsel::ScoreStrategy strategy{kind, config.mi_bins};
        for (const auto& model : config.selection_models) {
          auto r = featsel::build_k_rank(data.X, data.y, model, strategy, options);
          const double at_best = r.per_k_medians[r.best_k - 1].median;
          if (result.k_ranks.empty() || at_best < best) {
            best = at_best;
            best_i = result.k_ranks.size();
          }
          result.k_ranks.push_back(std::move(r));
          used.push_back(strategy);
        }
      }
      const auto& chosen = result.k_ranks[best_i];
      auto strategy = used[best_i];
      strategy.bins = featsel::bins_for_rows(strategy.bins, data.n());
      auto idx = featsel::top_k(featsel::score_features(strategy, data.X, data.y), chosen.best_k);
      std::sort(idx.begin(), idx.end());
      for (auto i : idx) selected.push_back(data.feature_names[i]);
      return 0;
    });
  }

  report("benchmarking");
  for (auto scenario : config.scenarios) {
    ScenarioResult sr;
    sr.scenario = scenario;
    const std::string name = to_string(scenario);
    FeatureMatrix view = data;
    if (scenario == Scenario::no_orientation && data.index_of("orientation")) view = data.without_feature("orientation");
    if (scenario == Scenario::feature_selected) {
      std::vector<std::size_t> cols;
      for (const auto& f : selected) cols.push_back(*data.index_of(f));
      view = data.select_columns(cols);
    }
    sr.features = view.feature_names;
    staged("benchmarking " + name, [&] {
      for (const auto& spec : config.models) {
        auto r = evaluate::thirty_run_benchmark(spec.with_seed(config.seed), view, config.benchmark_runs);
        r.scenario = name;
        sr.benchmarks.push_back(std::move(r));
      }
      return 0;
    });
    sr.ranks = staged("ranking " + name, [&] { return evaluate::choose_best(sr.benchmarks, config.alpha); });
    result.scenarios.push_back(std::move(sr));
  }

  bool first = true;
  for (std::size_t s = 0; s < result.scenarios.size(); ++s) {
    const auto& sr = result.scenarios[s];
    for (std::size_t i = 0; i < sr.benchmarks.size(); ++i) {
      if (sr.benchmarks[i].algorithm != sr.ranks.winner) continue;
      if (first || sr.benchmarks[i].median < result.winner().median) {
        result.winner_scenario = s;
        result.winner_index = i;
        first = false;
      }
    }
  }
  return result;
}

json artifact_json(const PipelineResult& result, const PipelineConfig& config, const std::string& source_id) {
  const auto& win = result.winner();
  const auto& win_scenario = result.scenarios[result.winner_scenario];

  json scenarios = json::array();
  for (const auto& sr : result.scenarios) {
    json benches = json::array();
    for (const auto& b : sr.benchmarks) {
      json jb = evaluate::to_json(b);
      jb.erase("final_model");
      benches.push_back(std::move(jb));
    }
    scenarios.push_back({{"scenario", to_string(sr.scenario)},
                         {"features", sr.features},
                         {"benchmarks", benches},
                         {"rank_table", evaluate::to_json(sr.ranks)}});
  }
  json k_ranks = json::array();
  for (const auto& k : result.k_ranks) k_ranks.push_back(featsel::to_json(k));

  return {{"source",
           {{"source_id", source_id},
            {"input_rows", result.derive.input_rows},
            {"dropped_rows", result.derive.dropped_rows},
            {"ignored_columns", result.derive.ignored_columns}}},
          {"config", to_json(config)},
          {"cleaning", cleaning::to_json(result.cleaning)},
          {"k_rank", k_ranks},
          {"scenarios", scenarios},
          {"winner",
           {{"scenario", to_string(win_scenario.scenario)}, {"algorithm", win.algorithm}, {"median_mae", win.median}}},
          {"rank_table", evaluate::to_json(win_scenario.ranks)},
          {"model", models::to_json(win.final_model)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::not_found, kModule, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::not_found, kModule, "cannot write " + tmp);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorKind::format, kModule, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_artifacts(const std::filesystem::path& dir, const PipelineResult& result, const PipelineConfig& config,
                     const std::string& source_id) {
  std::filesystem::create_directories(dir);
  const json artifact = artifact_json(result, config, source_id);
  write_file(dir / "cleaning.json", dump(artifact.at("cleaning")));
  write_file(dir / "k_rank.json", dump(artifact.at("k_rank")));
  json ranks = json::object();
  for (const auto& sr : result.scenarios) {
    ranks[to_string(sr.scenario)] = evaluate::to_json(sr.ranks);
    write_file(dir / ("cd_diagram_" + to_string(sr.scenario) + ".csv"), evaluate::cd_diagram_csv(sr.ranks));
  }
  write_file(dir / "ranks.json", dump(ranks));
  write_file(dir / "artifact.json", dump(artifact));
}

}  // namespace autopower::pipeline
