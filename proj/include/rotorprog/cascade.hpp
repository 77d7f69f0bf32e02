#pragma once

// Labeling, splitting, under-sampling, and the two-stage (normal/abnormal,
// then risky/high-risk) cascade alongside the single ternary model.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rotorprog/classifiers/cv.hpp"
#include "rotorprog/classifiers/model.hpp"
#include "rotorprog/dataset.hpp"
#include "rotorprog/metrics.hpp"
#include "rotorprog/selection.hpp"

namespace rotorprog {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kRiskyWindow = 30.0 * kSecondsPerDay;
inline constexpr double kHighRiskWindow = 1.0 * kSecondsPerDay;

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------

struct MachineTimeline {
  std::string machine_id;
  std::vector<double> timestamps;    // strictly increasing
  std::optional<double> failure_time;  // absent for healthy machines
  std::optional<double> downtime_end;  // end of the breakdown; informational

  bool faulty() const { return failure_time.has_value(); }
};

inline void validate(const MachineTimeline& t) {
  for (std::size_t i = 1; i < t.timestamps.size(); ++i)
    require(t.timestamps[i] > t.timestamps[i - 1], ErrorKind::invalid_input,
            "timestamps of " + t.machine_id + " are not strictly increasing");
  if (t.failure_time && !t.timestamps.empty())
    require(t.timestamps.back() <= *t.failure_time, ErrorKind::invalid_input,
            "observation after failure on " + t.machine_id);
}

/// State of one observation; the later interval owns each boundary.
inline int label_at(double timestamp, std::optional<double> failure_time) {
  if (!failure_time) return kNormal;
  if (timestamp >= *failure_time - kHighRiskWindow) return kHighRisk;
  if (timestamp >= *failure_time - kRiskyWindow) return kRisky;
  return kNormal;
}

inline std::vector<int> label_timeline(const MachineTimeline& timeline) {
  validate(timeline);
  std::vector<int> out;
  out.reserve(timeline.timestamps.size());
  for (double t : timeline.timestamps) out.push_back(label_at(t, timeline.failure_time));
  return out;
}

/// Normal (0) vs abnormal (1).
inline int na_label(int state) { return state == kNormal ? 0 : 1; }

// ---------------------------------------------------------------------------
// Splitting and under-sampling
// ---------------------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Whole machines go to one side; every machine in the table must be assigned.
inline Split split_by_machine(const FeatureTable& table, const std::vector<std::string>& train_ids,
                              const std::vector<std::string>& test_ids) {
  const auto present = table.machines();
  std::set<std::string> train_set(train_ids.begin(), train_ids.end());
  std::set<std::string> test_set(test_ids.begin(), test_ids.end());
  for (const auto& id : train_set) {
    require(std::find(present.begin(), present.end(), id) != present.end(), ErrorKind::unknown_machine,
            "unknown machine id " + id);
    require(!test_set.count(id), ErrorKind::invalid_input, "machine " + id + " on both sides");
  }
  for (const auto& id : test_set)
    require(std::find(present.begin(), present.end(), id) != present.end(), ErrorKind::unknown_machine,
            "unknown machine id " + id);
  Split s;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& id = table.rows[i].machine_id;
    if (train_set.count(id)) {
      s.train.push_back(i);
    } else {
      require(test_set.count(id) > 0, ErrorKind::invalid_input, "machine " + id + " not assigned to a side");
      s.test.push_back(i);
    }
  }
  return s;
}

/// Per-class proportional split; each class sends round(fraction * n_c) rows to train.
inline Split split_stratified(std::span<const int> labels, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::invalid_input, "train fraction must be in (0, 1)");
  Rng rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  Split s;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Random under-sampling of every class to the minority count. Returns sorted row indices.
inline std::vector<std::size_t> undersample(std::span<const int> labels, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  require(by_class.size() >= 2, ErrorKind::invalid_labels, "under-sampling needs at least 2 classes");
  std::size_t minority = labels.size();
  for (const auto& [label, idx] : by_class) minority = std::min(minority, idx.size());
  Rng rng(seed);
  std::vector<std::size_t> out;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(minority));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Audit trail
// ---------------------------------------------------------------------------

/// Records which rows each fitting step read. A source row equal to its
/// consumer (a wave denoised with its own threshold) is a self-read, not a leak.
class PipelineAudit {
 public:
  struct Record {
    std::string stage;
    std::string consumer;
    std::vector<std::string> sources;
  };

  void record(std::string stage, std::string consumer, std::vector<std::string> sources) {
    records_.push_back({std::move(stage), std::move(consumer), std::move(sources)});
  }

  void record_fit(const std::string& stage, const FeatureTable& table, std::span<const std::size_t> rows) {
    std::vector<std::string> keys;
    keys.reserve(rows.size());
    for (std::size_t i : rows) keys.push_back(table.rows[i].key());
    record(stage, "fit:" + stage, std::move(keys));
  }

  void record_fit(const std::string& stage, const FeatureTable& table) {
    std::vector<std::size_t> all(table.size());
    std::iota(all.begin(), all.end(), 0);
    record_fit(stage, table, all);
  }

  /// Reads of `forbidden` rows by any consumer other than the row itself.
  std::size_t foreign_reads(std::string_view stage, const std::set<std::string>& forbidden) const {
    std::size_t n = 0;
    for (const auto& r : records_)
      if (r.stage == stage)
        for (const auto& s : r.sources) n += forbidden.count(s) && s != r.consumer;
    return n;
  }

  std::size_t reads(std::string_view stage) const {
    std::size_t n = 0;
    for (const auto& r : records_)
      if (r.stage == stage) n += r.sources.size();
    return n;
  }

  const std::vector<Record>& records() const { return records_; }

 private:
  std::vector<Record> records_;
};

namespace audit_stage {
inline constexpr const char* denoise = "denoise-threshold";
inline constexpr const char* selection = "selection";
inline constexpr const char* standardization = "standardization";
inline constexpr const char* undersampling = "undersampling";
inline constexpr const char* training = "training";
}  // namespace audit_stage

// ---------------------------------------------------------------------------
// Stage preparation
// ---------------------------------------------------------------------------

enum class StageKind { na, rh, ternary };

inline std::string to_string(StageKind k) {
  switch (k) {
    case StageKind::na: return "na";
    case StageKind::rh: return "rh";
    case StageKind::ternary: return "ternary";
  }
  return "?";
}

/// Training view of one stage: N-A relabels everything normal/abnormal,
/// R-H keeps only abnormal rows (labels 1/2), ternary keeps all three states.
inline FeatureTable stage_table(const FeatureTable& train, StageKind kind) {
  require(train.labeled(), ErrorKind::invalid_labels, "stage data must be labeled");
  if (kind == StageKind::ternary) return train;
  if (kind == StageKind::na) {
    FeatureTable t = train;
    for (int& y : t.labels) y = na_label(y);
    return t;
  }
  std::vector<std::size_t> abnormal;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (train.labels[i] != kNormal) abnormal.push_back(i);
  return train.subset(abnormal);
}

struct SelectionConfig {
  double cv_threshold = 1.0;
  double gini_threshold = 0.01;
  int max_features = 0;  // 0 keeps everything that passes both filters
  ForestParams forest;
};

struct StageFeatures {
  CvFilterResult cv;
  GiniFilterResult gini;  // importances aligned with cv.retained
  std::vector<std::string> selected;
  std::vector<std::string> warnings;
};

/// CV filter, then Gini filter, then the highest-importance survivors up to max_features.
/// Gini filter and top-k pick on one stage table, starting from a coefficient-of-variation
/// result computed on the whole training table (shared by all stages).
inline StageFeatures select_stage_features(const FeatureTable& stage, const CvFilterResult& cv,
                                           const SelectionConfig& cfg, std::uint64_t seed,
                                           PipelineAudit* audit = nullptr) {
  if (audit) audit->record_fit(audit_stage::selection, stage);
  StageFeatures out;
  out.cv = cv;
  require(!out.cv.retained.empty(), ErrorKind::invalid_input, "coefficient-of-variation filter removed every feature");
  const auto reduced = stage.select_columns(out.cv.retained);
  out.gini = gini_filter(reduced, cfg.gini_threshold, seed, cfg.forest);
  if (out.gini.retained.empty()) {
    out.warnings.push_back("no feature reached the Gini threshold; ranking all CV survivors");
    for (std::size_t j = 0; j < reduced.width(); ++j)
      if (out.gini.importances[j] > 0.0) out.gini.retained.push_back(reduced.names[j]);
  }
  const std::size_t cap = cfg.max_features > 0 ? static_cast<std::size_t>(cfg.max_features) : out.gini.retained.size();
  out.selected = top_by_importance(reduced, out.gini, cap);
  return out;
}

inline StageFeatures select_stage_features(const FeatureTable& stage, const SelectionConfig& cfg,
                                           std::uint64_t seed, PipelineAudit* audit = nullptr) {
  return select_stage_features(stage, cv_filter(stage, cfg.cv_threshold), cfg, seed, audit);
}

/// Restrict to `features`, under-sample to balance, then standardize and fit.
inline TrainedModel train_stage(const FeatureTable& stage, const std::vector<std::string>& features,
                                const ModelSpec& spec, std::uint64_t undersample_seed,
                                PipelineAudit* audit = nullptr) {
  const auto narrowed = stage.select_columns(features);
  if (audit) audit->record_fit(audit_stage::undersampling, narrowed);
  const auto keep = undersample(narrowed.labels, undersample_seed);
  const auto balanced = narrowed.subset(keep);
  if (audit) {
    audit->record_fit(audit_stage::standardization, balanced);
    audit->record_fit(audit_stage::training, balanced);
  }
  return train_model(balanced, spec);
}

/// Balanced, narrowed stage table (what train_stage fits on); used for cross-validation.
inline FeatureTable balanced_stage(const FeatureTable& stage, const std::vector<std::string>& features,
                                   std::uint64_t undersample_seed) {
  const auto narrowed = stage.select_columns(features);
  return narrowed.subset(undersample(narrowed.labels, undersample_seed));
}

// ---------------------------------------------------------------------------
// Cascade
// ---------------------------------------------------------------------------

struct CascadeModel {
  TrainedModel na;  // labels 0 normal / 1 abnormal
  TrainedModel rh;  // labels 1 risky / 2 high-risk
};

/// Stage invocation counters for one prediction pass.
struct CascadeTrace {
  std::size_t na_calls = 0;
  std::size_t rh_calls = 0;
};

inline CascadeModel train_cascade(const FeatureTable& train, const std::vector<std::string>& na_features,
                                  const std::vector<std::string>& rh_features, const ModelSpec& na_spec,
                                  const ModelSpec& rh_spec, std::uint64_t seed, PipelineAudit* audit = nullptr) {
  const auto rh = stage_table(train, StageKind::rh);
  require(rh.size() > 0, ErrorKind::untrainable_stage, "no abnormal rows: risky/high-risk stage cannot be trained");
  require(distinct_labels(rh.labels).size() == 2, ErrorKind::untrainable_stage,
          "risky/high-risk stage needs both risky and high-risk rows");
  const auto na = stage_table(train, StageKind::na);
  return {train_stage(na, na_features, na_spec, derive_seed(seed, "undersample/na"), audit),
          train_stage(rh, rh_features, rh_spec, derive_seed(seed, "undersample/rh"), audit)};
}

namespace detail {

inline std::vector<std::size_t> column_map(const FeatureTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(table.column(n));
  return cols;
}

inline std::vector<double> gather(const FeatureRow& row, const std::vector<std::size_t>& cols,
                                  const std::vector<std::string>& names) {
  std::vector<double> out;
  out.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto& v = row.values[cols[k]];
    require(v.has_value(), ErrorKind::feature_mismatch, "missing " + names[k] + " in row " + row.key());
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

/// The risky/high-risk stage only runs on rows the first stage flags abnormal.
inline std::vector<int> predict_cascade(const CascadeModel& model, const FeatureTable& table,
                                        CascadeTrace* trace = nullptr) {
  const auto na_cols = detail::column_map(table, model.na.feature_names);
  const auto rh_cols = detail::column_map(table, model.rh.feature_names);
  std::vector<int> out(table.size(), kNormal);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (trace) ++trace->na_calls;
    if (model.na.predict_raw(detail::gather(table.rows[i], na_cols, model.na.feature_names)) == kNormal) continue;
    if (trace) ++trace->rh_calls;
    out[i] = model.rh.predict_raw(detail::gather(table.rows[i], rh_cols, model.rh.feature_names));
  }
  return out;
}

inline TrainedModel train_ternary(const FeatureTable& train, const std::vector<std::string>& features,
                                  const ModelSpec& spec, std::uint64_t seed, PipelineAudit* audit = nullptr) {
  return train_stage(stage_table(train, StageKind::ternary), features, spec,
                     derive_seed(seed, "undersample/ternary"), audit);
}

/// Predicts with a single model, selecting its columns by name from a wider table.
inline std::vector<int> predict_table(const TrainedModel& model, const FeatureTable& table) {
  const auto cols = detail::column_map(table, model.feature_names);
  std::vector<int> out(table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    out[i] = model.predict_raw(detail::gather(table.rows[i], cols, model.feature_names));
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation and ranking
// ---------------------------------------------------------------------------

struct MachineReport {
  std::string machine_id;
  bool faulty = false;
  std::size_t samples = 0;
  double accuracy = 0.0;
  std::optional<double> s;  // not applicable for healthy machines
  double c = 1.0, c1 = 1.0, c2 = 1.0, c3 = 1.0;
};

struct EvaluationReport {
  std::vector<MachineReport> machines;
  double accuracy = 0.0;             // pooled over every sample
  std::optional<OpaiReport> loops;   // faulty machines, one loop each
  std::optional<double> healthy_c;   // mean normal-only consistency of healthy machines

  double s() const { return loops ? loops->s : std::numeric_limits<double>::quiet_NaN(); }
  double c() const { return loops ? loops->c : healthy_c.value_or(std::numeric_limits<double>::quiet_NaN()); }
};

/// Scores time-ordered predictions machine by machine.
inline EvaluationReport evaluate(const FeatureTable& table, std::span<const int> predicted,
                                 std::array<double, 3> weights = kDefaultWeights) {
  require(table.labeled(), ErrorKind::invalid_labels, "evaluation needs labeled test data");
  require(predicted.size() == table.size(), ErrorKind::invalid_input, "one prediction per row required");
  EvaluationReport rep;
  std::vector<PredictionSeries> loops;
  std::size_t hits = 0;
  double healthy_sum = 0.0;
  std::size_t healthy = 0;
  for (const auto& id : table.machines()) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < table.size(); ++i)
      if (table.rows[i].machine_id == id) rows.push_back(i);
    rows = time_order(table, rows);
    std::vector<int> truth, pred;
    for (std::size_t i : rows) {
      truth.push_back(table.labels[i]);
      pred.push_back(predicted[i]);
      hits += table.labels[i] == predicted[i];
    }
    MachineReport m;
    m.machine_id = id;
    m.samples = rows.size();
    m.accuracy = accuracy(truth, pred);
    m.faulty = std::any_of(truth.begin(), truth.end(), [](int y) { return y != kNormal; });
    if (m.faulty) {
      auto series = PredictionSeries::from(truth, pred);
      const auto r = opai(series, weights);
      m.s = r.s;
      m.c = r.c;
      m.c1 = r.c1;
      m.c2 = r.c2;
      m.c3 = r.c3;
      loops.push_back(std::move(series));
    } else {
      m.c1 = c_score(pred, LoopLayout{pred.size(), 0, 0}).c1;
      m.c = m.c1;
      healthy_sum += m.c1;
      ++healthy;
    }
    rep.machines.push_back(std::move(m));
  }
  rep.accuracy = static_cast<double>(hits) / static_cast<double>(table.size());
  if (!loops.empty()) rep.loops = multi_loop_opai(loops, weights);
  if (healthy > 0) rep.healthy_c = healthy_sum / static_cast<double>(healthy);
  return rep;
}

struct Scores {
  double accuracy = 0.0;
  double s = 0.0;
  double c = 0.0;
};

inline Scores summarize(const EvaluationReport& r) { return {r.accuracy, r.s(), r.c()}; }

/// One row of the score grid: a cascade combination or a ternary model.
struct ScoreRow {
  std::string name;  // e.g. "KNN+ANN" or "RF"
  std::string kind;  // "cascade" or "ternary"
  Scores train;
  Scores test;
};

/// Test S descending, then test C, then test accuracy, then name.
inline std::vector<ScoreRow> select_model(std::vector<ScoreRow> candidates) {
  auto key = [](double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; };
  std::stable_sort(candidates.begin(), candidates.end(), [&](const ScoreRow& a, const ScoreRow& b) {
    if (key(a.test.s) != key(b.test.s)) return key(a.test.s) > key(b.test.s);
    if (key(a.test.c) != key(b.test.c)) return key(a.test.c) > key(b.test.c);
    if (key(a.test.accuracy) != key(b.test.accuracy)) return key(a.test.accuracy) > key(b.test.accuracy);
    return a.name < b.name;
  });
  return candidates;
}

}  // namespace rotorprog
