#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "autopower/cleaning.hpp"
#include "autopower/evaluate.hpp"
#include "autopower/featsel.hpp"
#include "autopower/ingest.hpp"
#include "autopower/models.hpp"
#include "vendor_json.hpp"

namespace autopower::pipeline {

enum class Scenario { full, no_orientation, feature_selected };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct PipelineConfig {
  cleaning::CleaningOptions cleaning;
  std::vector<Scenario> scenarios = {Scenario::full, Scenario::no_orientation, Scenario::feature_selected};
  std::vector<models::ModelSpec> models;
  // build_k_rank grid for the feature-selected scenario.
  std::vector<featsel::ScoreKind> strategies = {featsel::ScoreKind::f_test, featsel::ScoreKind::mutual_info};
  std::vector<models::ModelSpec> selection_models;
  std::size_t mi_bins = 16;
  std::size_t k_rank_repetitions = 10;
  std::size_t k_rank_splits = featsel::kSelectSplits;
  std::size_t benchmark_runs = evaluate::kBenchmarkRuns;
  std::uint64_t seed = 0;
  double alpha = 0.05;

  PipelineConfig();
  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);

// Stage names reported while running: cleaning, selecting, benchmarking, ranking.
using ProgressFn = std::function<void(const std::string& stage)>;

struct ScenarioResult {
  Scenario scenario = Scenario::full;
  std::vector<std::string> features;
  std::vector<evaluate::BenchmarkResult> benchmarks;
  evaluate::RankTable ranks;
};

struct PipelineResult {
  ingest::DeriveReport derive;
  cleaning::CleaningReport cleaning;
  std::vector<featsel::KRankResult> k_ranks;
  std::vector<ScenarioResult> scenarios;
  std::size_t winner_scenario = 0;
  std::size_t winner_index = 0;  // into scenarios[winner_scenario].benchmarks

  const evaluate::BenchmarkResult& winner() const { return scenarios[winner_scenario].benchmarks[winner_index]; }
};

// ingest -> clean -> build_k_rank (feature-selected scenario only) ->
// thirty_run_benchmark per model and scenario -> rank. The overall winner is
// the scenario winner with the lowest median MAE.
PipelineResult run_pipeline(const ingest::RawTrace& trace, const PipelineConfig& config, const ProgressFn& progress = {});

// The model artifact: winning FittedModel plus rank tables, cleaning report and k ranking.
nlohmann::json artifact_json(const PipelineResult& result, const PipelineConfig& config, const std::string& source_id);

// Canonical text form used for every JSON file written to disk.
std::string dump(const nlohmann::json& j);

// artifact.json, cleaning.json, k_rank.json, ranks.json, cd_diagram_<scenario>.csv.
void write_artifacts(const std::filesystem::path& dir, const PipelineResult& result, const PipelineConfig& config,
                     const std::string& source_id);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace autopower::pipeline
