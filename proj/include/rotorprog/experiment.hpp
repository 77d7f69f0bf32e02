#pragma once

// End-to-end comparison of the cascade against single ternary models:
// per-stage feature selection on training machines, per-algorithm training and
// cross-validation, and evaluation of 9 cascade combinations + 3 ternary models.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotorprog/cascade.hpp"
#include "rotorprog/classifiers/cv.hpp"

namespace rotorprog {

struct ExperimentConfig {
  std::uint64_t seed = 0;
  SelectionConfig selection;
  KnnParams knn;
  ForestParams forest;
  MlpParams mlp;
  int cv_folds = 5;
  std::array<double, 3> weights = kDefaultWeights;
  std::string mode = "both";  // cascade | ternary | both

  // "by_machine" uses the two lists; "stratified" uses train_fraction.
  std::string split = "by_machine";
  std::vector<std::string> train_machines;
  std::vector<std::string> test_machines;
  double train_fraction = 0.8;

  // Optional user-pinned final feature lists (replace the automated top-k pick).
  std::map<StageKind, std::vector<std::string>> pinned_features;

  ModelSpec spec(Algo algo, std::uint64_t s) const {
    ModelSpec m;
    m.algo = algo;
    m.knn = knn;
    m.forest = forest;
    m.mlp = mlp;
    m.seed = s;
    return m;
  }
};

inline std::uint64_t stage_seed(const ExperimentConfig& cfg, StageKind stage, std::string_view what) {
  return derive_seed(cfg.seed, to_string(stage) + "/" + std::string(what));
}

inline Split make_split(const FeatureTable& all, const ExperimentConfig& cfg) {
  if (cfg.split == "by_machine") return split_by_machine(all, cfg.train_machines, cfg.test_machines);
  if (cfg.split == "stratified") return split_stratified(all.labels, cfg.train_fraction, derive_seed(cfg.seed, "split"));
  fail(ErrorKind::config, "unknown split strategy '" + cfg.split + "'");
}

inline constexpr StageKind kAllStages[] = {StageKind::na, StageKind::rh, StageKind::ternary};

inline std::vector<StageKind> stages_for(std::string_view mode) {
  if (mode == "both") return {StageKind::na, StageKind::rh, StageKind::ternary};
  if (mode == "cascade") return {StageKind::na, StageKind::rh};
  if (mode == "ternary") return {StageKind::ternary};
  fail(ErrorKind::config, "unknown mode '" + std::string(mode) + "'");
}

/// Selected features for every stage, computed from training rows only.
inline std::map<StageKind, StageFeatures> select_all_features(const FeatureTable& train, const ExperimentConfig& cfg,
                                                              PipelineAudit* audit = nullptr) {
  if (audit) audit->record_fit(audit_stage::selection, train);
  const auto cv = cv_filter(train, cfg.selection.cv_threshold);
  std::map<StageKind, StageFeatures> out;
  for (StageKind stage : stages_for(cfg.mode)) {
    auto sf = select_stage_features(stage_table(train, stage), cv, cfg.selection, stage_seed(cfg, stage, "gini"), audit);
    if (auto it = cfg.pinned_features.find(stage); it != cfg.pinned_features.end()) sf.selected = it->second;
    out.emplace(stage, std::move(sf));
  }
  return out;
}

struct StageModels {
  std::map<Algo, TrainedModel> models;
  std::map<Algo, CvReport> cv;
};

/// Trains knn / forest / mlp for one stage and cross-validates each on the balanced stage set.
inline StageModels train_stage_models(const FeatureTable& train, StageKind stage,
                                      const std::vector<std::string>& features, const ExperimentConfig& cfg,
                                      PipelineAudit* audit = nullptr) {
  const auto table = stage_table(train, stage);
  require(table.size() > 0 && distinct_labels(table.labels).size() >= 2, ErrorKind::untrainable_stage,
          "stage " + to_string(stage) + " has fewer than 2 classes in the training data");
  const auto us_seed = stage_seed(cfg, stage, "undersample");
  const auto balanced = balanced_stage(table, features, us_seed);
  StageModels out;
  for (Algo algo : kAllAlgos) {
    const auto spec = cfg.spec(algo, stage_seed(cfg, stage, "model/" + to_string(algo)));
    out.models.emplace(algo, train_stage(table, features, spec, us_seed, audit));
    out.cv.emplace(algo, kfold_cv(balanced, spec, cfg.cv_folds, stage_seed(cfg, stage, "cv/" + to_string(algo))));
  }
  return out;
}

struct CandidateResult {
  ScoreRow row;
  EvaluationReport train_report;
  EvaluationReport test_report;
};

/// Scores all 9 cascade combinations and 3 ternary models on both sides of the split.
inline std::vector<CandidateResult> evaluate_all(const std::map<StageKind, StageModels>& models,
                                                 const FeatureTable& train, const FeatureTable& test,
                                                 const ExperimentConfig& cfg) {
  std::vector<CandidateResult> out;
  const bool cascade = models.count(StageKind::na) && models.count(StageKind::rh);
  for (Algo a : kAllAlgos)
    for (Algo b : kAllAlgos) {
      if (!cascade) break;
      const auto& na = models.at(StageKind::na).models;
      const auto& rh = models.at(StageKind::rh).models;
      const CascadeModel cm{na.at(a), rh.at(b)};
      CandidateResult r;
      r.row.name = display_name(a) + "+" + display_name(b);
      r.row.kind = "cascade";
      r.train_report = evaluate(train, predict_cascade(cm, train), cfg.weights);
      r.test_report = evaluate(test, predict_cascade(cm, test), cfg.weights);
      r.row.train = summarize(r.train_report);
      r.row.test = summarize(r.test_report);
      out.push_back(std::move(r));
    }
  for (Algo a : kAllAlgos) {
    if (!models.count(StageKind::ternary)) break;
    const auto& m = models.at(StageKind::ternary).models.at(a);
    CandidateResult r;
    r.row.name = display_name(a);
    r.row.kind = "ternary";
    r.train_report = evaluate(train, predict_table(m, train), cfg.weights);
    r.test_report = evaluate(test, predict_table(m, test), cfg.weights);
    r.row.train = summarize(r.train_report);
    r.row.test = summarize(r.test_report);
    out.push_back(std::move(r));
  }
  return out;
}

struct ExperimentResult {
  Split split;
  std::map<StageKind, StageFeatures> features;
  std::map<StageKind, StageModels> models;
  std::vector<CandidateResult> candidates;
  std::vector<ScoreRow> ranked;
};

inline ExperimentResult run_experiment(const FeatureTable& all, const ExperimentConfig& cfg,
                                       PipelineAudit* audit = nullptr) {
  require(all.labeled(), ErrorKind::invalid_labels, "experiment needs labeled data");
  ExperimentResult res;
  res.split = make_split(all, cfg);
  const auto train = all.subset(res.split.train);
  const auto test = all.subset(res.split.test);
  res.features = select_all_features(train, cfg, audit);
  for (StageKind stage : stages_for(cfg.mode))
    res.models.emplace(stage, train_stage_models(train, stage, res.features.at(stage).selected, cfg, audit));
  res.candidates = evaluate_all(res.models, train, test, cfg);
  std::vector<ScoreRow> rows;
  for (const auto& c : res.candidates) rows.push_back(c.row);
  res.ranked = select_model(rows);
  return res;
}

inline double median(std::vector<double> v) {
  require(!v.empty(), ErrorKind::invalid_input, "median of empty data");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace rotorprog
