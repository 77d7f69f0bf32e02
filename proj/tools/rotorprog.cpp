// rotorprog: command-line driver for the fault-prediction pipeline.
//
//   datagen          synthetic fleet -> fleet.csv + one wave bundle per machine
//   featurize        wave bundles -> feature CSV
//   select-features  feature CSV -> na.txt / rh.txt / ternary.txt + box statistics
//   train            feature CSV + lists -> one model JSON per stage and algorithm
//   evaluate         feature CSV + models -> score grid, per-machine reports, predictions
//   score            prediction CSV -> OPAI report
//   report           selection + evaluation outputs -> SVG charts and ranked table

#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotorprog/datagen.hpp"
#include "rotorprog/experiment.hpp"
#include "rotorprog/io/config.hpp"
#include "rotorprog/io/csv.hpp"
#include "rotorprog/io/files.hpp"
#include "rotorprog/io/svg.hpp"

namespace fs = std::filesystem;
using namespace rotorprog;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

io::PipelineConfig load_config(const Globals& g) {
  io::PipelineConfig cfg;
  if (!g.config_path.empty()) {
    try {
      cfg = io::parse_config(io::read_file(g.config_path));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) fail(ErrorKind::config, g.config_path + ": " + e.what());
      throw;
    }
  }
  if (g.seed) cfg.set_seed(*g.seed);
  return cfg;
}

FeatureTable load_features(const std::string& path) {
  io::require_file(path);
  return io::parse_feature_csv(io::read_file(path), path);
}

std::pair<FeatureTable, FeatureTable> split_tables(const FeatureTable& all, const ExperimentConfig& cfg) {
  require(all.labeled(), ErrorKind::invalid_labels, "feature file has no labels");
  const auto split = make_split(all, cfg);
  return {all.subset(split.train), all.subset(split.test)};
}

std::string stage_list_path(const fs::path& dir, StageKind stage) { return (dir / (to_string(stage) + ".txt")).string(); }

std::string model_path(const fs::path& dir, StageKind stage, Algo algo) {
  return (dir / (to_string(stage) + "_" + to_string(algo) + ".json")).string();
}

const std::map<int, std::string>& class_names(StageKind stage) {
  static const std::map<int, std::string> na{{0, "Normal"}, {1, "Abnormal"}};
  static const std::map<int, std::string> states{{0, "Normal"}, {1, "Risky"}, {2, "High-risk"}};
  return stage == StageKind::na ? na : states;
}

// ---------------------------------------------------------------------------

void cmd_datagen(const Globals& g, const std::string& out) {
  const auto cfg = load_config(g);
  const auto fleet = generate_fleet(cfg.fleet);
  std::vector<io::ManifestEntry> manifest;
  for (const auto& m : fleet) {
    std::vector<Wave> waves;
    for (const auto& arr : m.waves) waves.insert(waves.end(), arr.begin(), arr.end());
    io::write_file_atomic(fs::path(out) / (m.timeline.machine_id + ".csv"), io::wave_bundle_csv(waves));
    manifest.push_back({m.timeline.machine_id, m.timeline.failure_time});
  }
  io::write_file_atomic(fs::path(out) / "fleet.csv", io::manifest_csv(manifest));
  std::cout << "wrote " << fleet.size() << " wave bundles and fleet.csv to " << out << "\n";
}

void cmd_featurize(const Globals& g, const std::string& waves_dir, const std::string& out, bool no_labels) {
  const auto cfg = load_config(g);
  const fs::path manifest_path = fs::path(waves_dir) / "fleet.csv";
  io::require_file(manifest_path);
  const auto manifest = io::parse_manifest(io::read_file(manifest_path), manifest_path.string());
  FeatureTable table;
  table.names = machine_feature_names();
  for (const auto& entry : manifest) {
    const fs::path bundle = fs::path(waves_dir) / (entry.machine_id + ".csv");
    io::require_file(bundle);
    auto waves = io::parse_wave_bundle(io::read_file(bundle), bundle.string());
    for (const auto& w : waves)
      require(w.machine_id == entry.machine_id, ErrorKind::alignment,
              bundle.string() + " contains waves of machine " + w.machine_id);
    for (const auto& arr : io::group_wave_arrays(std::move(waves))) {
      auto fv = featurize(arr, cfg.denoise);
      std::optional<int> label;
      if (!no_labels) label = label_at(fv.timestamp, entry.failure_time);
      table.add({fv.machine_id, fv.timestamp, std::move(fv.values)}, label);
    }
  }
  io::write_file_atomic(out, io::feature_csv(table));
  std::cout << "wrote " << table.size() << " feature rows to " << out << "\n";
}

void cmd_select(const Globals& g, const std::string& features, const std::string& out) {
  const auto cfg = load_config(g);
  const auto all = load_features(features);
  const auto [train, test] = split_tables(all, cfg.experiment);
  const auto selected = select_all_features(train, cfg.experiment);
  std::string report = "stage,feature,cv,cv_retained,gini_importance,gini_retained,selected\n";
  for (const auto& [stage, sf] : selected) {
    io::write_file_atomic(stage_list_path(out, stage), io::feature_list_text(sf.selected));
    const auto table = stage_table(train, stage);
    io::write_file_atomic(fs::path(out) / ("boxplot_" + to_string(stage) + ".csv"),
                          io::boxplot_csv(boxplot_export(table.select_columns(sf.selected))));
    for (std::size_t j = 0; j < train.width(); ++j) {
      const auto& name = train.names[j];
      const auto cv_pos = std::find(sf.cv.retained.begin(), sf.cv.retained.end(), name);
      std::string gini_imp, gini_kept;
      if (cv_pos != sf.cv.retained.end()) {
        gini_imp = format_double(sf.gini.importances[static_cast<std::size_t>(cv_pos - sf.cv.retained.begin())]);
        gini_kept = std::count(sf.gini.retained.begin(), sf.gini.retained.end(), name) ? "1" : "0";
      }
      const bool sel = std::count(sf.selected.begin(), sf.selected.end(), name) > 0;
      report += io::join_line({to_string(stage), name, format_double(sf.cv.cv[j]),
                               cv_pos != sf.cv.retained.end() ? "1" : "0", gini_imp, gini_kept, sel ? "1" : "0"});
    }
    for (const auto& w : sf.warnings) std::cerr << "warning: " << to_string(stage) << ": " << w << "\n";
    std::cout << to_string(stage) << ": " << sf.cv.retained.size() << " pass the CV filter, " << sf.gini.retained.size()
              << " pass the Gini filter, " << sf.selected.size() << " selected\n";
  }
  io::write_file_atomic(fs::path(out) / "selection.csv", report);
}

void cmd_train(const Globals& g, const std::string& features, const std::string& selection, const std::string& out) {
  const auto cfg = load_config(g);
  const auto all = load_features(features);
  const auto [train, test] = split_tables(all, cfg.experiment);
  std::string cv_csv = "stage,algo,fold,accuracy,consistency\n";
  for (StageKind stage : stages_for(cfg.experiment.mode)) {
    const auto list_path = stage_list_path(selection, stage);
    io::require_file(list_path);
    const auto names = io::parse_feature_list(io::read_file(list_path));
    require(!names.empty(), ErrorKind::feature_mismatch, list_path + " lists no features");
    for (const auto& n : names)
      require(std::count(all.names.begin(), all.names.end(), n) > 0, ErrorKind::feature_mismatch,
              list_path + " names unknown feature '" + n + "'");
    const auto models = train_stage_models(train, stage, names, cfg.experiment);
    for (const auto& [algo, model] : models.models)
      io::write_file_atomic(model_path(out, stage, algo), to_json(model).dump(1) + "\n");
    for (const auto& [algo, cv] : models.cv) {
      for (std::size_t f = 0; f < cv.fold_accuracy.size(); ++f)
        cv_csv += io::join_line({to_string(stage), to_string(algo), std::to_string(f + 1),
                                 format_double(cv.fold_accuracy[f]), format_double(cv.fold_consistency[f])});
      cv_csv += io::join_line({to_string(stage), to_string(algo), "mean", format_double(cv.mean_accuracy),
                               format_double(cv.mean_consistency)});
      for (const auto& w : cv.warnings) std::cerr << "warning: " << to_string(stage) << "/" << to_string(algo) << ": " << w << "\n";
      std::cout << to_string(stage) << " " << display_name(algo) << ": cv accuracy " << format_double(cv.mean_accuracy)
                << ", cv C " << format_double(cv.mean_consistency) << "\n";
    }
  }
  io::write_file_atomic(fs::path(out) / "cv.csv", cv_csv);
  io::write_file_atomic(fs::path(out) / "config.toml", io::config_text(cfg));
}

void cmd_evaluate(const Globals& g, const std::string& features, const std::string& models_dir, const std::string& out) {
  const auto cfg = load_config(g);
  const auto all = load_features(features);
  const auto [train, test] = split_tables(all, cfg.experiment);
  std::map<StageKind, StageModels> models;
  for (StageKind stage : stages_for(cfg.experiment.mode))
    for (Algo algo : kAllAlgos) {
      const auto path = model_path(models_dir, stage, algo);
      io::require_file(path);
      TrainedModel m;
      try {
        m = model_from_json(Json::parse(io::read_file(path)));
      } catch (const Json::exception& e) {
        fail(ErrorKind::invalid_input, path + ": " + e.what());
      }
      models[stage].models.emplace(algo, std::move(m));
    }
  const auto candidates = evaluate_all(models, train, test, cfg.experiment);
  std::vector<ScoreRow> rows;
  std::string reports = io::machine_report_header();
  for (const auto& c : candidates) {
    rows.push_back(c.row);
    reports += io::machine_report_lines(c.row.name, "train", c.train_report);
    reports += io::machine_report_lines(c.row.name, "test", c.test_report);
  }
  io::write_file_atomic(fs::path(out) / "score_grid.csv", io::score_grid_csv(rows));
  io::write_file_atomic(fs::path(out) / "machine_reports.csv", reports);

  // test-set predictions, one loop per machine, readable by `score`
  std::vector<std::size_t> all_rows(test.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  const auto order = time_order(test, all_rows);
  auto write_predictions = [&](const std::string& name, const std::vector<int>& pred) {
    std::vector<io::PredictionRow> out_rows;
    for (std::size_t i : order)
      out_rows.push_back({test.rows[i].machine_id, test.rows[i].timestamp, test.labels[i], pred[i]});
    std::string file = name;
    std::replace(file.begin(), file.end(), '+', '_');
    io::write_file_atomic(fs::path(out) / "predictions" / (file + ".csv"), io::prediction_csv(out_rows));
  };
  if (models.count(StageKind::na) && models.count(StageKind::rh))
    for (Algo a : kAllAlgos)
      for (Algo b : kAllAlgos)
        write_predictions(display_name(a) + "+" + display_name(b),
                          predict_cascade({models[StageKind::na].models.at(a), models[StageKind::rh].models.at(b)}, test));
  if (models.count(StageKind::ternary))
    for (Algo a : kAllAlgos) write_predictions(display_name(a), predict_table(models[StageKind::ternary].models.at(a), test));

  const auto ranked = select_model(rows);
  std::cout << io::ranking_markdown(ranked);
}

void cmd_score(const Globals& g, const std::string& predictions, const std::string& out) {
  const auto cfg = load_config(g);
  io::require_file(predictions);
  const auto loops = io::to_loops(io::parse_prediction_csv(io::read_file(predictions), predictions));
  const auto& w = cfg.experiment.weights;
  std::string csv = "loop_id,n1,n2,n3,accuracy,s,c,c1,c2,c3\n";
  std::vector<PredictionSeries> series;
  std::size_t hits = 0, total = 0;
  for (const auto& [id, s] : loops) {
    const auto& l = s.layout;
    for (std::size_t i = 0; i < s.truth.size(); ++i) hits += s.truth[i] == s.predicted[i];
    total += s.truth.size();
    const auto counts = std::vector<std::string>{id, std::to_string(l.n1), std::to_string(l.n2), std::to_string(l.n3)};
    std::vector<std::string> fields = counts;
    if (l.n2 == 0 && l.n3 == 0) {
      // healthy run: no deterioration interval, so only accuracy and normal-interval consistency
      const double c1 = c_score(s.predicted, l).c1;
      for (const auto& v : {format_double(accuracy(s)), std::string(), format_double(c1), format_double(c1),
                            std::string(), std::string()})
        fields.push_back(v);
    } else {
      const auto r = opai(s, w);
      for (double v : {r.accuracy, r.s, r.c, r.c1, r.c2, r.c3}) fields.push_back(format_double(v));
      series.push_back(s);
    }
    csv += io::join_line(fields);
  }
  require(!series.empty(), ErrorKind::degenerate_layout, "no loop reaches the risky and high-risk intervals");
  // accuracy pooled over every loop; S and C averaged over the deteriorating ones
  const auto agg = multi_loop_opai(series, w);
  const double pooled = static_cast<double>(hits) / static_cast<double>(total);
  csv += io::join_line({"all", "", "", "", format_double(pooled), format_double(agg.s), format_double(agg.c),
                        format_double(agg.c1), format_double(agg.c2), format_double(agg.c3)});
  if (!out.empty()) io::write_file_atomic(out, csv);
  std::cout << csv;
}

void cmd_report(const Globals& g, const std::string& selection, const std::string& evaluation, const std::string& out) {
  const auto cfg = load_config(g);
  std::size_t charts = 0;
  for (StageKind stage : stages_for(cfg.experiment.mode)) {
    const fs::path path = fs::path(selection) / ("boxplot_" + to_string(stage) + ".csv");
    io::require_file(path);
    const auto ex = io::parse_boxplot_csv(io::read_file(path), path.string());
    const std::string title = stage == StageKind::na ? "Normal vs abnormal inputs"
                              : stage == StageKind::rh ? "Risky vs high-risk inputs"
                                                       : "Ternary inputs";
    io::write_file_atomic(fs::path(out) / ("boxplot_" + to_string(stage) + ".svg"),
                          io::boxplot_svg(ex, title, class_names(stage)));
    ++charts;
  }
  const fs::path grid_path = fs::path(evaluation) / "score_grid.csv";
  io::require_file(grid_path);
  const auto rows = io::parse_score_grid(io::read_file(grid_path), grid_path.string());
  io::write_file_atomic(fs::path(out) / "test_scores.svg", io::score_bars_svg(rows, "Test scores per model"));
  io::write_file_atomic(fs::path(out) / "test_score_boxes.svg", io::score_boxes_svg(rows, "Ternary vs cascade test scores"));
  const auto ranked = select_model(rows);
  const auto table = io::ranking_markdown(ranked);
  io::write_file_atomic(fs::path(out) / "ranking.md", table);
  std::cout << table << "wrote " << charts + 2 << " charts and ranking.md to " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascade fault-prediction pipeline for rotating machinery vibration data"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("-c,--config", g.config_path, "TOML-style config file (defaults apply when omitted)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");

  std::string out, waves, features, selection, models, evaluation, predictions;
  bool no_labels = false;

  auto* datagen = app.add_subcommand("datagen", "generate a synthetic fleet as wave bundles");
  datagen->add_option("-o,--out", out, "output directory")->required();

  auto* featurize_cmd = app.add_subcommand("featurize", "denoise, extract and assemble features");
  featurize_cmd->add_option("-w,--waves", waves, "directory with fleet.csv and <machine>.csv bundles")->required();
  featurize_cmd->add_option("-o,--out", out, "feature CSV to write")->required();
  featurize_cmd->add_flag("--no-labels", no_labels, "leave the label column empty");

  auto* select = app.add_subcommand("select-features", "CV and Gini filtering on the training machines");
  select->add_option("-f,--features", features, "feature CSV")->required();
  select->add_option("-o,--out", out, "output directory for feature lists")->required();

  auto* train = app.add_subcommand("train", "train every stage model on the training machines");
  train->add_option("-f,--features", features, "feature CSV")->required();
  train->add_option("-s,--selection", selection, "directory with na.txt / rh.txt / ternary.txt")->required();
  train->add_option("-o,--out", out, "output directory for model JSON files")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score the cascade grid and ternary models");
  evaluate_cmd->add_option("-f,--features", features, "feature CSV")->required();
  evaluate_cmd->add_option("-m,--models", models, "directory written by train")->required();
  evaluate_cmd->add_option("-o,--out", out, "output directory")->required();

  auto* score = app.add_subcommand("score", "OPAI report for a prediction CSV");
  score->add_option("-p,--predictions", predictions, "prediction CSV (loop_id,timestamp,truth,predicted)")->required();
  score->add_option("-o,--out", out, "optional CSV copy of the report");

  auto* report = app.add_subcommand("report", "SVG charts and ranked model table");
  report->add_option("-s,--selection", selection, "directory written by select-features")->required();
  report->add_option("-e,--evaluation", evaluation, "directory written by evaluate")->required();
  report->add_option("-o,--out", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: kind=usage message=\"" << e.what() << "\"\n";
    return 2;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*datagen) cmd_datagen(g, out);
    else if (*featurize_cmd) cmd_featurize(g, waves, out, no_labels);
    else if (*select) cmd_select(g, features, out);
    else if (*train) cmd_train(g, features, selection, out);
    else if (*evaluate_cmd) cmd_evaluate(g, features, models, out);
    else if (*score) cmd_score(g, predictions, out);
    else if (*report) cmd_report(g, selection, evaluation, out);
  } catch (const Error& e) {
    std::cerr << "error: kind=" << to_string(e.kind()) << " message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=internal message=\"" << e.what() << "\"\n";
    return 1;
  }
  return 0;
}
