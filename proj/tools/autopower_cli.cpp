#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "autopower/biasim.hpp"
#include "autopower/cleaning.hpp"
#include "autopower/error.hpp"
#include "autopower/evaluate.hpp"
#include "autopower/featsel.hpp"
#include "autopower/ingest.hpp"
#include "autopower/models.hpp"
#include "autopower/pipeline.hpp"
#include "autopower/server.hpp"
#include "autopower/zip.hpp"

namespace ap = autopower;
using nlohmann::json;

namespace {

bool is_zip(const std::string& bytes) { return bytes.size() >= 4 && bytes.compare(0, 4, "PK\x03\x04") == 0; }

std::string stem_of(const std::string& path) { return std::filesystem::path(path).stem().string(); }

ap::ingest::RawTrace load_trace(const std::string& path, const std::string& source_id) {
  const auto bytes = ap::pipeline::read_file(path);
  const std::string id = source_id.empty() ? stem_of(path) : source_id;
  if (is_zip(bytes)) {
    const auto csv = ap::ingest::decompress_upload(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    return ap::ingest::parse_trace(std::string_view(reinterpret_cast<const char*>(csv.data()), csv.size()), id);
  }
  return ap::ingest::parse_trace(bytes, id);
}

// A raw usage log (zip or CSV with current/voltage) or a feature CSV.
ap::FeatureMatrix load_features(const std::string& path) {
  const auto bytes = ap::pipeline::read_file(path);
  const auto header = bytes.substr(0, bytes.find('\n'));
  if (is_zip(bytes) || header.find("current_ma") != std::string::npos) {
    return ap::ingest::derive_features(load_trace(path, {}));
  }
  return ap::ingest::read_feature_csv(bytes);
}

void write_trace(const std::string& path, const ap::ingest::RawTrace& trace) {
  const auto csv = ap::ingest::write_trace_csv(trace);
  if (path.size() > 4 && path.ends_with(".zip")) {
    const auto zipped = ap::zip::write_single(ap::zip::kTraceEntryName,
                                              std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
    ap::pipeline::write_file(path, std::string_view(reinterpret_cast<const char*>(zipped.data()), zipped.size()));
  } else {
    ap::pipeline::write_file(path, csv);
  }
}

struct ModelFlags {
  double lambda = 1.0;
  std::size_t knn_k = 5;
  std::size_t trees = 100;
  std::size_t max_depth = 0;
  std::size_t min_leaf = 1;

  void add(CLI::App* app) {
    app->add_option("--lambda", lambda, "ridge penalty");
    app->add_option("--knn-k", knn_k, "neighbours for knn");
    app->add_option("--trees", trees, "forest size");
    app->add_option("--max-depth", max_depth, "forest depth limit (0 = unlimited)");
    app->add_option("--min-leaf", min_leaf, "forest minimum leaf size");
  }

  ap::models::ModelSpec spec(const std::string& name) const {
    ap::models::ModelSpec s;
    s.kind = ap::models::model_kind_from_string(name);
    s.lambda = lambda;
    s.knn_k = knn_k;
    s.forest.trees = trees;
    s.forest.max_depth = max_depth;
    s.forest.min_leaf = min_leaf;
    s.validate();
    return s;
  }
};

void emit(const json& j, bool as_json, const std::string& text) {
  if (as_json) {
    std::cout << ap::pipeline::dump(j);
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) { return ap::ingest::format_number(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autopower: per-user smartphone power models from usage logs"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic usage log");
  std::string synth_out, synth_config, fault_file;
  ap::biasim::SynthConfig sc;
  std::optional<double> noise;
  std::size_t fault_min = 0, fault_max = 0, fault_runs = 64;
  synth->add_option("--out", synth_out, "output .csv or .zip")->required();
  synth->add_option("--config", synth_config, "synth config JSON");
  synth->add_option("--duration", sc.duration_s, "seconds (rows)");
  synth->add_option("--seed", sc.seed, "generator seed");
  synth->add_option("--noise", noise, "noise sigma in mW");
  synth->add_option("--fault-pattern", fault_file, "run-length pattern JSON applied to current");
  synth->add_option("--fault-min", fault_min, "random fault pattern: shortest run");
  synth->add_option("--fault-max", fault_max, "random fault pattern: longest run");
  synth->add_option("--fault-runs", fault_runs, "random fault pattern: number of runs");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "derive the feature matrix from a usage log");
  std::string ingest_in, ingest_out;
  ingest_cmd->add_option("--input", ingest_in, "zip or CSV usage log")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest_out, "feature CSV")->required();

  // clean
  auto* clean_cmd = app.add_subcommand("clean", "drop degenerate features, incomplete rows and LOF outliers");
  std::string clean_in, clean_out, clean_report;
  ap::cleaning::CleaningOptions copts;
  clean_cmd->add_option("--input", clean_in, "usage log or feature CSV")->required()->check(CLI::ExistingFile);
  clean_cmd->add_option("--out", clean_out, "cleaned feature CSV")->required();
  clean_cmd->add_option("--report", clean_report, "cleaning report JSON");
  clean_cmd->add_option("--sparse-fraction", copts.sparse_fraction);
  clean_cmd->add_option("--variance-floor", copts.variance_floor);
  clean_cmd->add_option("--lof-k", copts.lof_k);
  clean_cmd->add_option("--lof-threshold", copts.lof_threshold);
  clean_cmd->add_flag("--allow-excessive-outliers", copts.allow_excessive_outliers);

  // select-k
  auto* selk = app.add_subcommand("select-k", "choose the number of features by repeated time-series CV");
  std::string selk_in, selk_strategy = "f_test", selk_model = "ridge";
  ap::featsel::KRankOptions kopts;
  std::size_t selk_bins = 16;
  ModelFlags selk_flags;
  selk->add_option("--input", selk_in, "cleaned feature CSV")->required()->check(CLI::ExistingFile);
  selk->add_option("--strategy", selk_strategy)->check(CLI::IsMember({"f_test", "mutual_info"}));
  selk->add_option("--model", selk_model);
  selk->add_option("--repetitions", kopts.repetitions);
  selk->add_option("--splits", kopts.splits);
  selk->add_option("--seed", kopts.base_seed);
  selk->add_option("--bins", selk_bins, "mutual-information bins");
  selk_flags.add(selk);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "thirty-run time-series benchmark of one or more models");
  std::string bench_in, bench_out, bench_scenario = "full";
  std::vector<std::string> bench_models;
  std::uint64_t bench_seed = 0;
  std::size_t bench_runs = ap::evaluate::kBenchmarkRuns;
  ModelFlags bench_flags;
  bench->add_option("--input", bench_in, "cleaned feature CSV")->required()->check(CLI::ExistingFile);
  bench->add_option("--model", bench_models, "model kind (repeatable)")->required();
  bench->add_option("--seed", bench_seed)->required();
  bench->add_option("--runs", bench_runs);
  bench->add_option("--scenario", bench_scenario, "label stored with the results");
  bench->add_option("--out", bench_out, "directory for <model>.json results")->required();
  bench_flags.add(bench);

  // rank
  auto* rank = app.add_subcommand("rank", "average ranks, Nemenyi CD and winner over benchmark results");
  std::vector<std::string> rank_in;
  double rank_alpha = 0.05;
  std::string rank_csv;
  rank->add_option("--input", rank_in, "benchmark result JSON files")->required()->check(CLI::ExistingFile);
  rank->add_option("--alpha", rank_alpha);
  rank->add_option("--cd-csv", rank_csv, "write CD-diagram CSV");

  // bias
  auto* bias = app.add_subcommand("bias", "gauge-fault run-length patterns");
  bias->require_subcommand(1);
  auto* extract = bias->add_subcommand("extract", "run lengths of a trace's current channel");
  std::string extract_in, extract_out, extract_column = "current_ma";
  extract->add_option("--input", extract_in)->required()->check(CLI::ExistingFile);
  extract->add_option("--column", extract_column);
  extract->add_option("--out", extract_out, "pattern JSON");
  auto* apply = bias->add_subcommand("apply", "transplant a pattern onto a trace's current channel");
  std::string apply_in, apply_pattern, apply_out;
  apply->add_option("--input", apply_in)->required()->check(CLI::ExistingFile);
  apply->add_option("--pattern", apply_pattern)->required()->check(CLI::ExistingFile);
  apply->add_option("--out", apply_out, "output .csv or .zip")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "clean, select, benchmark and rank end to end");
  std::string pipe_in, pipe_out, pipe_config, pipe_source;
  std::vector<std::string> pipe_scenarios, pipe_models;
  std::optional<std::uint64_t> pipe_seed;
  std::optional<std::size_t> pipe_reps, pipe_runs;
  std::optional<double> pipe_alpha;
  pipe->add_option("--input", pipe_in, "zip or CSV usage log")->required()->check(CLI::ExistingFile);
  pipe->add_option("--out", pipe_out, "artifact directory")->required();
  pipe->add_option("--seed", pipe_seed)->required();
  pipe->add_option("--config", pipe_config, "pipeline config JSON")->check(CLI::ExistingFile);
  pipe->add_option("--source-id", pipe_source, "defaults to the input file stem");
  pipe->add_option("--scenario", pipe_scenarios, "full | no-orientation | feature-selected (repeatable)");
  pipe->add_option("--model", pipe_models, "model kind (repeatable)");
  pipe->add_option("--repetitions", pipe_reps, "build_k_rank repetitions");
  pipe->add_option("--runs", pipe_runs, "benchmark splits");
  pipe->add_option("--alpha", pipe_alpha);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP ingestion service");
  std::string serve_config, serve_listen, serve_dir;
  std::optional<std::size_t> serve_cap, serve_conc;
  serve->add_option("--config", serve_config)->check(CLI::ExistingFile);
  serve->add_option("--listen", serve_listen, "host:port");
  serve->add_option("--data-dir", serve_dir);
  serve->add_option("--max-upload-bytes", serve_cap);
  serve->add_option("--concurrency", serve_conc);

  CLI11_PARSE(app, argc, argv);
  const bool as_json = format == "json";
  std::string stage = app.get_subcommands().front()->get_name();

  try {
    if (*synth) {
      if (!synth_config.empty()) {
        const auto base = ap::biasim::synth_config_from_json(json::parse(ap::pipeline::read_file(synth_config)));
        const auto duration = sc.duration_s;
        const auto seed = sc.seed;
        sc = base;
        if (synth->count("--duration")) sc.duration_s = duration;
        if (synth->count("--seed")) sc.seed = seed;
      }
      if (noise) sc.power_law.noise_sigma_mw = *noise;
      if (!fault_file.empty()) {
        sc.gauge_fault = ap::biasim::pattern_from_json(json::parse(ap::pipeline::read_file(fault_file)));
      } else if (fault_max > 0) {
        sc.gauge_fault = ap::biasim::random_fault_pattern(sc.seed, fault_min ? fault_min : 1, fault_max, fault_runs);
      }
      const auto trace = ap::biasim::synth_trace(sc);
      write_trace(synth_out, trace);
      emit(ap::biasim::to_json(sc), as_json, "wrote " + std::to_string(trace.rows) + " rows to " + synth_out + "\n");
    } else if (*ingest_cmd) {
      ap::ingest::DeriveReport rep;
      const auto fm = ap::ingest::derive_features(load_trace(ingest_in, {}), &rep);
      ap::pipeline::write_file(ingest_out, ap::ingest::write_feature_csv(fm));
      const json j = {{"input_rows", rep.input_rows},
                      {"dropped_rows", rep.dropped_rows},
                      {"ignored_columns", rep.ignored_columns},
                      {"features", fm.feature_names}};
      emit(j, as_json,
           std::to_string(fm.n()) + " rows x " + std::to_string(fm.p()) + " features (" +
               std::to_string(rep.dropped_rows) + " rows dropped)\n");
    } else if (*clean_cmd) {
      const auto cleaned = ap::cleaning::clean(load_features(clean_in), copts);
      ap::pipeline::write_file(clean_out, ap::ingest::write_feature_csv(cleaned.matrix));
      const json j = ap::cleaning::to_json(cleaned.report);
      if (!clean_report.empty()) ap::pipeline::write_file(clean_report, ap::pipeline::dump(j));
      emit(j, as_json,
           std::to_string(cleaned.matrix.n()) + " rows x " + std::to_string(cleaned.matrix.p()) + " features kept, " +
               std::to_string(cleaned.report.outlier_count) + " outliers removed\n");
    } else if (*selk) {
      const auto fm = load_features(selk_in);
      ap::featsel::ScoreStrategy strategy{ap::featsel::score_kind_from_string(selk_strategy), selk_bins};
      const auto r = ap::featsel::build_k_rank(fm.X, fm.y, selk_flags.spec(selk_model), strategy, kopts);
      emit(ap::featsel::to_json(r), as_json,
           "best_k = " + std::to_string(r.best_k) + (r.fallback ? " (fallback)" : "") + "\n");
    } else if (*bench) {
      const auto fm = load_features(bench_in);
      std::filesystem::create_directories(bench_out);
      json all = json::array();
      std::string text;
      for (const auto& name : bench_models) {
        stage = "benchmark " + name;
        auto r = ap::evaluate::thirty_run_benchmark(bench_flags.spec(name).with_seed(bench_seed), fm, bench_runs);
        r.scenario = bench_scenario;
        const json j = ap::evaluate::to_json(r);
        ap::pipeline::write_file(std::filesystem::path(bench_out) / (r.algorithm + ".json"), ap::pipeline::dump(j));
        text += r.algorithm + ": median MAE " + fmt(r.median) + " mW, final train size " +
                std::to_string(r.final_train_size) + "\n";
        all.push_back(j);
      }
      emit(all, as_json, text);
    } else if (*rank) {
      std::vector<ap::evaluate::BenchmarkResult> results;
      for (const auto& f : rank_in) {
        results.push_back(ap::evaluate::benchmark_from_json(json::parse(ap::pipeline::read_file(f))));
      }
      const auto table = ap::evaluate::choose_best(results, rank_alpha);
      if (!rank_csv.empty()) ap::pipeline::write_file(rank_csv, ap::evaluate::cd_diagram_csv(table));
      std::string text;
      for (std::size_t i = 0; i < table.algorithms.size(); ++i) {
        text += table.algorithms[i] + ": mean rank " + fmt(table.mean_ranks[i]) + "\n";
      }
      text += "CD = " + fmt(table.cd) + ", winner = " + table.winner + "\n";
      emit(ap::evaluate::to_json(table), as_json, text);
    } else if (*extract) {
      const auto trace = load_trace(extract_in, {});
      const auto* col = trace.find(extract_column);
      if (!col || !col->numeric) {
        throw ap::Error(ap::ErrorKind::schema, "biasim", "no numeric column '" + extract_column + "'");
      }
      const auto p = ap::biasim::extract_run_lengths(col->values);
      const json j = ap::biasim::to_json(p);
      if (!extract_out.empty()) ap::pipeline::write_file(extract_out, ap::pipeline::dump(j));
      emit(j, as_json,
           std::to_string(p.run_lengths.size()) + " runs, mean length " + fmt(p.mean_run_length()) + "\n");
    } else if (*apply) {
      auto trace = load_trace(apply_in, {});
      const auto p = ap::biasim::pattern_from_json(json::parse(ap::pipeline::read_file(apply_pattern)));
      auto* col = trace.find("current_ma");
      if (!col) throw ap::Error(ap::ErrorKind::schema, "biasim", "trace has no current_ma column");
      col->values = ap::biasim::apply_bias(col->values, p);
      write_trace(apply_out, trace);
      emit(ap::biasim::to_json(p), as_json, "wrote biased trace to " + apply_out + "\n");
    } else if (*pipe) {
      auto config = pipe_config.empty() ? ap::pipeline::PipelineConfig{}
                                        : ap::pipeline::config_from_json(json::parse(ap::pipeline::read_file(pipe_config)));
      config.seed = *pipe_seed;
      if (!pipe_scenarios.empty()) {
        config.scenarios.clear();
        for (const auto& s : pipe_scenarios) config.scenarios.push_back(ap::pipeline::scenario_from_string(s));
      }
      if (!pipe_models.empty()) {
        // Named kinds replace the list; a kind already configured keeps its hyperparameters.
        std::vector<ap::models::ModelSpec> chosen;
        for (const auto& name : pipe_models) {
          const auto kind = ap::models::model_kind_from_string(name);
          auto it = std::find_if(config.models.begin(), config.models.end(), [&](const auto& m) { return m.kind == kind; });
          ap::models::ModelSpec spec;
          spec.kind = kind;
          chosen.push_back(it != config.models.end() ? *it : spec);
        }
        config.models = chosen;
      }
      if (pipe_reps) config.k_rank_repetitions = *pipe_reps;
      if (pipe_runs) config.benchmark_runs = *pipe_runs;
      if (pipe_alpha) config.alpha = *pipe_alpha;
      config.validate();
      stage = "pipeline ingest";
      const auto trace = load_trace(pipe_in, pipe_source);
      const auto result = ap::pipeline::run_pipeline(trace, config, [&](const std::string& s) {
        stage = "pipeline " + s;
        if (!as_json) std::cerr << "[" << s << "]\n";
      });
      stage = "pipeline write";
      ap::pipeline::write_artifacts(pipe_out, result, config, trace.source_id);
      const auto& win = result.winner();
      const json j = {{"winner",
                       {{"scenario", ap::pipeline::to_string(result.scenarios[result.winner_scenario].scenario)},
                        {"algorithm", win.algorithm},
                        {"median_mae", win.median}}},
                      {"artifact", (std::filesystem::path(pipe_out) / "artifact.json").string()}};
      emit(j, as_json,
           "winner: " + win.algorithm + " (" + ap::pipeline::to_string(result.scenarios[result.winner_scenario].scenario) +
               "), median MAE " + fmt(win.median) + " mW\n");
    } else if (*serve) {
      auto config = ap::server::load_config(serve_config.empty() ? std::nullopt
                                                                 : std::optional<std::filesystem::path>(serve_config));
      if (!serve_listen.empty()) ap::server::parse_listen(serve_listen, config);
      if (!serve_dir.empty()) config.data_dir = serve_dir;
      if (serve_cap) config.max_upload_bytes = *serve_cap;
      if (serve_conc) config.concurrency = *serve_conc;
      ap::server::HttpServer server(config);
      const int port = server.bind();
      std::cerr << "listening on " << config.host << ":" << port << "\n";
      server.serve();
    }
  } catch (const ap::Error& e) {
    std::cerr << "autopower " << stage << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "autopower " << stage << ": format error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "autopower " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
