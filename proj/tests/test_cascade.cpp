#include <gtest/gtest.h>

#include "rotorprog/cascade.hpp"
#include "rotorprog/experiment.hpp"

using namespace rotorprog;

namespace {

constexpr double kDay = 86400.0;

// Rows of one feature equal to the state (plus a constant column), so learners can memorize.
FeatureTable state_table(const std::vector<std::pair<std::string, std::vector<int>>>& machines) {
  FeatureTable t;
  t.names = {"state", "bias"};
  for (const auto& [id, states] : machines)
    for (std::size_t i = 0; i < states.size(); ++i)
      t.add({id, double(i), {double(states[i]) * 10.0 + 0.01 * double(i % 3), 1.0}}, states[i]);
  return t;
}

std::vector<int> loop(std::size_t n1, std::size_t n2, std::size_t n3) {
  return truth_for({n1, n2, n3});
}

ModelSpec knn1() {
  ModelSpec s;
  s.algo = Algo::knn;
  s.knn.k = 1;
  return s;
}

}  // namespace

TEST(Labels, Thresholds) {
  const double f = 1e9;
  EXPECT_EQ(label_at(f - 40 * kDay, f), kNormal);
  EXPECT_EQ(label_at(f - 10 * kDay, f), kRisky);
  EXPECT_EQ(label_at(f - 2 * 3600.0, f), kHighRisk);
  EXPECT_EQ(label_at(f - 30 * kDay, f), kRisky);
  EXPECT_EQ(label_at(f - kDay, f), kHighRisk);
  EXPECT_EQ(label_at(f, std::nullopt), kNormal);
}

TEST(Labels, TimelineValidation) {
  MachineTimeline t{"M1", {1.0, 1.0}, std::nullopt, std::nullopt};
  EXPECT_THROW(label_timeline(t), Error);
  t = {"M1", {1.0, 5.0}, 3.0, std::nullopt};
  EXPECT_THROW(label_timeline(t), Error);
}

TEST(Labels, StageRelabelingPartitionsStates) {
  const auto t = state_table({{"M1", loop(5, 3, 2)}});
  const auto na = stage_table(t, StageKind::na);
  const auto rh = stage_table(t, StageKind::rh);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(na.labels[i], t.labels[i] == kNormal ? 0 : 1);
  EXPECT_EQ(rh.size(), 5u);
  for (int y : rh.labels) EXPECT_TRUE(y == kRisky || y == kHighRisk);
}

TEST(Split, ByMachineDefaultAssignment) {
  std::vector<std::pair<std::string, std::vector<int>>> ms;
  for (int i = 1; i <= 14; ++i) ms.push_back({"M" + std::to_string(i), i <= 7 ? loop(4, 2, 2) : loop(6, 0, 0)});
  const auto t = state_table(ms);
  const auto s = split_by_machine(t, {"M1", "M2", "M3", "M4", "M5", "M8", "M9", "M10", "M11", "M12"},
                                  {"M6", "M7", "M13", "M14"});
  EXPECT_EQ(s.train.size() + s.test.size(), t.size());
  for (std::size_t i : s.test) {
    const auto& id = t.rows[i].machine_id;
    EXPECT_TRUE(id == "M6" || id == "M7" || id == "M13" || id == "M14");
  }
  try {
    split_by_machine(t, {"M99"}, {"M1"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unknown_machine);
  }
}

TEST(Split, StratifiedProportions) {
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) y.push_back(0);
  for (int i = 0; i < 30; ++i) y.push_back(1);
  for (int i = 0; i < 10; ++i) y.push_back(2);
  const auto s = split_stratified(y, 0.8, 4);
  std::array<int, 3> counts{};
  for (std::size_t i : s.train) ++counts[std::size_t(y[i])];
  EXPECT_NEAR(counts[0], 48, 1);
  EXPECT_NEAR(counts[1], 24, 1);
  EXPECT_NEAR(counts[2], 8, 1);
  EXPECT_EQ(s.train, split_stratified(y, 0.8, 4).train);
}

TEST(Undersample, MinorityCountForEveryClass) {
  std::vector<int> y;
  y.insert(y.end(), 13203, 0);
  y.insert(y.end(), 2991, 1);
  y.insert(y.end(), 2870, 2);
  const auto keep = undersample(y, 1);
  std::array<std::size_t, 3> counts{};
  for (std::size_t i : keep) ++counts[std::size_t(y[i])];
  EXPECT_EQ(counts, (std::array<std::size_t, 3>{2870, 2870, 2870}));
  EXPECT_EQ(keep, undersample(y, 1));
}

TEST(Undersample, BalancedUnchanged) {
  const std::vector<int> y{0, 1, 0, 1, 2, 2};
  EXPECT_EQ(undersample(y, 3), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Cascade, HealthyOnlyDataIsUntrainable) {
  const auto t = state_table({{"M1", loop(8, 0, 0)}, {"M2", loop(8, 0, 0)}});
  try {
    train_cascade(t, {"state"}, {"state"}, knn1(), knn1(), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::untrainable_stage);
  }
}

TEST(Cascade, ShortCircuitAndComposition) {
  const auto t = state_table({{"M1", loop(10, 6, 6)}, {"M2", loop(10, 6, 6)}});
  const auto cm = train_cascade(t, {"state"}, {"state"}, knn1(), knn1(), 0);
  CascadeTrace trace;
  const auto pred = predict_cascade(cm, t, &trace);
  EXPECT_EQ(pred, t.labels);
  EXPECT_EQ(trace.na_calls, t.size());
  EXPECT_EQ(trace.rh_calls, 24u);

  const auto normal_only = state_table({{"M3", loop(5, 0, 0)}});
  CascadeTrace none;
  for (int y : predict_cascade(cm, normal_only, &none)) EXPECT_EQ(y, kNormal);
  EXPECT_EQ(none.rh_calls, 0u);
}

TEST(Cascade, MemorizingStagesScorePerfectly) {
  const auto t = state_table({{"M1", loop(10, 6, 6)}, {"M2", loop(12, 5, 4)}, {"M3", loop(9, 0, 0)}});
  const auto cm = train_cascade(t, {"state"}, {"state"}, knn1(), knn1(), 0);
  const auto rep = evaluate(t, predict_cascade(cm, t));
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_NEAR(rep.s(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(rep.c(), 1.0);
  ASSERT_EQ(rep.machines.size(), 3u);
  EXPECT_FALSE(rep.machines[2].s.has_value());
}

TEST(Evaluate, ConstantNormalForfeitsDeterioration) {
  const auto t = state_table({{"M1", loop(10, 6, 6)}});
  const std::vector<int> zeros(t.size(), kNormal);
  const auto rep = evaluate(t, zeros);
  EXPECT_LE(rep.s(), 0.5);
  EXPECT_NEAR(rep.s(), 0.2, 1e-9);
}

TEST(Evaluate, AveragesLoops) {
  const auto t = state_table({{"M1", loop(5, 3, 2)}, {"M2", loop(6, 4, 3)}});
  std::vector<int> p = t.labels;
  p[9] = kRisky;
  p[12] = kNormal;
  const auto rep = evaluate(t, p);
  std::vector<int> p1(p.begin(), p.begin() + 10), p2(p.begin() + 10, p.end());
  const auto a = opai(PredictionSeries::from(loop(5, 3, 2), p1));
  const auto b = opai(PredictionSeries::from(loop(6, 4, 3), p2));
  EXPECT_NEAR(rep.s(), 0.5 * (a.s + b.s), 1e-15);
  EXPECT_NEAR(rep.c(), 0.5 * (a.c + b.c), 1e-15);
}

TEST(Evaluate, TimeOrdersRows) {
  auto t = state_table({{"M1", loop(5, 3, 2)}});
  std::vector<int> p = t.labels;
  std::reverse(t.rows.begin(), t.rows.end());
  std::reverse(t.labels.begin(), t.labels.end());
  std::reverse(p.begin(), p.end());
  EXPECT_NEAR(evaluate(t, p).s(), 1.0, 1e-12);
}

TEST(SelectModel, Ordering) {
  std::vector<ScoreRow> rows{{"a", "cascade", {}, {0.9, 0.8, 0.7}},
                             {"b", "cascade", {}, {0.9, 0.9, 0.9}},
                             {"c", "ternary", {}, {0.9, 0.8, 0.95}}};
  const auto r = select_model(rows);
  EXPECT_EQ(r[0].name, "b");
  EXPECT_EQ(r[1].name, "c");
  EXPECT_EQ(r[2].name, "a");
}

TEST(Audit, ForeignReadsCounted) {
  PipelineAudit a;
  a.record("denoise-threshold", "M1@1", {"M1@1"});
  a.record("training", "fit", {"M1@1", "M2@1"});
  const std::set<std::string> test{"M1@1"};
  EXPECT_EQ(a.foreign_reads("denoise-threshold", test), 0u);
  EXPECT_EQ(a.foreign_reads("training", test), 1u);
  EXPECT_EQ(a.reads("training"), 2u);
}

TEST(Experiment, SmallRunProducesTwelveCandidates) {
  std::vector<std::pair<std::string, std::vector<int>>> ms;
  for (int i = 1; i <= 4; ++i) ms.push_back({"M" + std::to_string(i), loop(12, 8, 8)});
  for (int i = 5; i <= 6; ++i) ms.push_back({"M" + std::to_string(i), loop(20, 0, 0)});
  auto t = state_table(ms);
  t.names.push_back("wobble");
  for (std::size_t i = 0; i < t.size(); ++i) t.rows[i].values.push_back(1.0 + double(i % 7));
  ExperimentConfig cfg;
  cfg.train_machines = {"M1", "M2", "M3", "M5"};
  cfg.test_machines = {"M4", "M6"};
  cfg.forest.n_trees = 10;
  cfg.selection.forest.n_trees = 10;
  cfg.mlp.epochs = 100;
  cfg.cv_folds = 3;
  cfg.selection.cv_threshold = 0.1;
  PipelineAudit audit;
  const auto res = run_experiment(t, cfg, &audit);
  EXPECT_EQ(res.candidates.size(), 12u);
  EXPECT_EQ(res.ranked.size(), 12u);
  std::set<std::string> test_keys;
  for (std::size_t i : res.split.test) test_keys.insert(t.rows[i].key());
  for (const char* stage : {audit_stage::selection, audit_stage::standardization, audit_stage::undersampling,
                            audit_stage::training}) {
    EXPECT_GT(audit.reads(stage), 0u) << stage;
    EXPECT_EQ(audit.foreign_reads(stage, test_keys), 0u) << stage;
  }

  cfg.mode = "ternary";
  EXPECT_EQ(run_experiment(t, cfg).candidates.size(), 3u);
  cfg.mode = "sideways";
  EXPECT_THROW(run_experiment(t, cfg), Error);
}
