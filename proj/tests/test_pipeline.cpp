#include "autopower/biasim.hpp"
#include "autopower/error.hpp"
#include "autopower/pipeline.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace autopower;
namespace ts = testing_support;

namespace {

pipeline::PipelineConfig small_config() {
  pipeline::PipelineConfig c;
  c.scenarios = {pipeline::Scenario::full, pipeline::Scenario::no_orientation};
  c.models = {models::ModelSpec::mean(), models::ModelSpec::ridge()};
  c.seed = 5;
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("ridge beats the mean on a linear trace") {
  const auto trace = ts::linear_trace(2000, 1, 20.0);
  std::vector<std::string> stages;
  const auto r = pipeline::run_pipeline(trace, small_config(), [&](const std::string& s) { stages.push_back(s); });
  CHECK(r.scenarios.size() == 2);
  CHECK(r.winner().algorithm == "ridge");
  CHECK(r.scenarios[0].ranks.winner == "ridge");
  CHECK(r.winner().final_model.train_rows == r.winner().final_train_size);
  CHECK(stages.front() == "cleaning");
  for (const auto& f : r.scenarios[1].features) CHECK(f != "orientation");

  const auto art = pipeline::artifact_json(r, small_config(), "unit");
  CHECK(art["winner"]["algorithm"] == "ridge");
  CHECK(art["rank_table"]["winner"] == art["winner"]["algorithm"]);
  CHECK(art["source"]["source_id"] == "unit");
}

TEST_CASE("runs are deterministic given the seed") {
  const auto trace = ts::linear_trace(800, 2, 20.0);
  auto c = small_config();
  c.models.push_back(models::ModelSpec::random_forest({.trees = 5, .max_depth = 4}));
  const auto a = pipeline::dump(pipeline::artifact_json(pipeline::run_pipeline(trace, c), c, "x"));
  const auto b = pipeline::dump(pipeline::artifact_json(pipeline::run_pipeline(trace, c), c, "x"));
  CHECK(a == b);
}

TEST_CASE("feature-selected scenario uses the chosen k") {
  const auto trace = ts::linear_trace(800, 3, 20.0);
  auto c = small_config();
  c.scenarios = {pipeline::Scenario::feature_selected};
  c.strategies = {featsel::ScoreKind::f_test};
  c.selection_models = {models::ModelSpec::ridge()};
  c.k_rank_repetitions = 2;
  const auto r = pipeline::run_pipeline(trace, c);
  REQUIRE(r.k_ranks.size() == 1);
  CHECK(r.scenarios[0].features.size() == r.k_ranks[0].best_k);
}

TEST_CASE("configuration JSON and validation") {
  auto c = small_config();
  const auto text = pipeline::to_json(c).dump();
  CHECK(pipeline::to_json(pipeline::config_from_json(nlohmann::json::parse(text))).dump() == text);
  c.alpha = 0.01;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.models.push_back(models::ModelSpec::mean());
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(pipeline::scenario_from_string("no-orientation") == pipeline::Scenario::no_orientation);
  CHECK_THROWS_AS(pipeline::scenario_from_string("bogus"), Error);
}

TEST_CASE("stage context is attached to failures") {
  auto trace = ts::linear_trace(100, 4, 1.0);
  trace.rows = 0;
  for (auto& col : trace.columns) {
    col.values.clear();
    col.text.clear();
  }
  try {
    pipeline::run_pipeline(trace, small_config());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("stage") != std::string::npos);
  }
}

TEST_CASE("artifact files land atomically") {
  const auto dir = ts::temp_dir("pipeline-files");
  const auto trace = ts::linear_trace(600, 6, 20.0);
  const auto c = small_config();
  pipeline::write_artifacts(dir, pipeline::run_pipeline(trace, c), c, "files");
  for (const char* f : {"artifact.json", "cleaning.json", "k_rank.json", "ranks.json", "cd_diagram_full.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
}

}
