// Acceptance checks, one PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance 4 7        run only criteria 4 and 7
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "rotorprog/archetypes.hpp"
#include "rotorprog/datagen.hpp"
#include "rotorprog/experiment.hpp"
#include "rotorprog/io/config.hpp"
#include "rotorprog/io/csv.hpp"

using namespace rotorprog;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

PredictionSeries make_series(const LoopLayout& l, std::vector<int> predicted) {
  PredictionSeries s;
  s.layout = l;
  s.truth = truth_for(l);
  s.predicted = std::move(predicted);
  return s;
}

// ---------------------------------------------------------------------------

Outcome metric_identities() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(1, "acceptance/metric-identities"));
  std::uniform_int_distribution<std::size_t> n1d(2, 120), n2d(2, 80), n3d(1, 80);
  std::uniform_int_distribution<int> state(0, 2), shift(1, 2);
  double worst_perfect = 0, worst_constant = 0, worst_wrong = 0;
  for (int c = 0; c < 200; ++c) {
    const LoopLayout l{n1d(rng), n2d(rng), n3d(rng)};
    const auto calib = calibrate(l);
    const auto truth = truth_for(l);
    worst_perfect = std::max(worst_perfect, std::abs(s_score(make_series(l, truth), calib) - 1.0));

    std::array<int, 3> block{state(rng), state(rng), state(rng)};
    std::vector<int> constant(l.total());
    for (std::size_t i = 0; i < constant.size(); ++i) constant[i] = block[std::size_t(l.interval_of(i))];
    worst_constant = std::max(worst_constant, std::abs(c_score(constant, l).c - 1.0));

    std::vector<int> wrong(l.total());
    for (std::size_t i = 0; i < wrong.size(); ++i) wrong[i] = (truth[i] + shift(rng)) % 3;
    worst_wrong = std::max(worst_wrong, std::abs(s_score(make_series(l, wrong), calib)));
  }
  const double t = seconds_since(t0);
  const bool ok = worst_perfect == 0.0 && worst_constant == 0.0 && worst_wrong <= 1e-9 && t < 1.0;
  return {ok, "200 cases; max |S_perfect-1|=" + fmt(worst_perfect) + " max |C_const-1|=" + fmt(worst_constant) +
                  " max |S_wrong|=" + fmt(worst_wrong) + " (tol 1e-9); " + fmt(t, 3) + "s (budget 1s)"};
}

Outcome calibration_oracle() {
  Rng rng(derive_seed(2, "acceptance/calibration"));
  std::uniform_int_distribution<std::size_t> n1d(2, 300), n2d(2, 200), n3d(1, 200);
  int found = 0, tries = 0;
  double worst = 0.0;
  while (found < 100 && tries < 100000) {
    ++tries;
    const LoopLayout l{n1d(rng), n2d(rng), n3d(rng)};
    const auto c = calibrate(l);
    if (!c.feasible()) continue;
    ++found;
    const auto sums = oracle::interval_sums(long(l.n1), long(l.n2), long(l.n3), c.alpha, c.beta, c.gamma);
    worst = std::max({worst, std::abs(sums[0] - 0.2), std::abs(sums[1] - 0.3), std::abs(sums[2] - 0.5)});
  }
  return {found == 100 && worst <= 1e-10,
          std::to_string(found) + " feasible layouts; max |interval sum - weight|=" + fmt(worst) + " (tol 1e-10)"};
}

Outcome weighting_monotonicity() {
  Rng rng(derive_seed(3, "acceptance/monotonicity"));
  std::uniform_int_distribution<std::size_t> n1d(2, 150), n2d(2, 100), n3d(1, 60);
  int feasible = 0, skipped = 0, violations = 0, strict_cases = 0;
  while (feasible < 50) {
    const LoopLayout l{n1d(rng), n2d(rng), n3d(rng)};
    const auto calib = calibrate(l);
    if (!calib.feasible()) {
      ++skipped;
      continue;
    }
    ++feasible;
    const auto truth = truth_for(l);
    std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (std::size_t i = 0; i < l.total(); ++i) {
      auto p = truth;
      p[i] = (p[i] + 1) % 3;
      const double s = s_score(make_series(l, p), calib);
      const auto k = std::size_t(l.interval_of(i));
      lo[k] = std::min(lo[k], s);
      hi[k] = std::max(hi[k], s);
    }
    if (hi[2] > lo[1] || hi[1] > lo[0]) ++violations;
    if (calib.gamma > 0) {
      ++strict_cases;
      if (!(hi[2] < lo[1])) ++violations;
    }
  }
  return {violations == 0, std::to_string(feasible) + " feasible layouts (" + std::to_string(strict_cases) +
                               " with gamma>0, " + std::to_string(skipped) +
                               " infeasible draws skipped); violations=" + std::to_string(violations)};
}

Outcome worked_values() {
  const LoopLayout l{4, 3, 2};
  const auto c = calibrate(l);
  const auto o = oracle::solve_calibration(4, 3, 2);
  auto p = truth_for(l);
  p.back() = kRisky;
  const double s = s_score(make_series(l, p), c);
  std::vector<bool> wrong(9, false);
  wrong.back() = true;
  const double s_oracle = oracle::s_score(wrong, 4, 3, o);
  const double tol = 1e-6;
  const bool ok = std::abs(c.alpha - 0.0360674) <= tol && std::abs(c.beta - 0.0837166) <= tol &&
                  std::abs(c.gamma - 0.0432112) <= tol && std::abs(s - 0.685183) <= tol &&
                  std::abs(c.alpha - o.alpha) <= tol && std::abs(c.beta - o.beta) <= tol &&
                  std::abs(c.gamma - o.gamma) <= tol && std::abs(s - s_oracle) <= tol;
  return {ok, "alpha=" + fmt(c.alpha, 9) + " beta=" + fmt(c.beta, 9) + " gamma=" + fmt(c.gamma, 9) +
                  " S=" + fmt(s, 9) + " oracle S=" + fmt(s_oracle, 9) + " (tol 1e-6)"};
}

Outcome archetype_ordering() {
  const auto t0 = Clock::now();
  const LoopLayout l{40, 30, 30};
  std::array<OpaiReport, 6> r{};
  for (int kind = 1; kind <= 5; ++kind) r[std::size_t(kind)] = opai(archetype_series(kind, l, 0.8, 7));
  bool s1_lowest = true, s3_highest = true;
  for (int kind = 1; kind <= 5; ++kind) {
    if (kind != 1 && !(r[1].s < r[std::size_t(kind)].s)) s1_lowest = false;
    if (kind != 3 && !(r[3].s > r[std::size_t(kind)].s)) s3_highest = false;
  }
  const bool c2_low = r[2].c < r[1].c && r[2].c < r[3].c;
  const double t = seconds_since(t0);
  std::string detail = "seed 7;";
  for (int kind = 1; kind <= 5; ++kind)
    detail += " k" + std::to_string(kind) + "(acc " + fmt(r[std::size_t(kind)].accuracy, 3) + " S " +
              fmt(r[std::size_t(kind)].s, 4) + " C " + fmt(r[std::size_t(kind)].c, 4) + ")";
  detail += "; " + fmt(t, 3) + "s";
  return {s1_lowest && s3_highest && c2_low && t < 1.0, detail};
}

Outcome signal_correctness() {
  double worst_rec = 0, worst_energy = 0, worst_tone = 0;
  for (std::uint64_t w = 0; w < 50; ++w) {
    Rng rng(derive_seed(6, w));
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double scale = 0.1 + 20.0 * u(rng);
    std::vector<double> x(1024);
    for (std::size_t m = 0; m < x.size(); ++m)
      x[m] = scale * g(rng) + 3.0 * std::sin(2 * std::numbers::pi * 37.0 * double(m) / 1024.0);
    const auto dec = dwt_decompose(x);
    const auto y = dwt_reconstruct(dec);
    double diff = 0, norm = 0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      diff += (x[m] - y[m]) * (x[m] - y[m]);
      norm += x[m] * x[m];
    }
    worst_rec = std::max(worst_rec, std::sqrt(diff / norm));
    worst_energy = std::max(worst_energy, std::abs(dec.energy() - norm) / norm);

    const double amp = 0.5 + 20.0 * u(rng);
    const auto bin = std::uniform_int_distribution<std::size_t>(1, 511)(rng);
    const double phase = 2 * std::numbers::pi * u(rng);
    std::vector<double> tone(1024);
    for (std::size_t m = 0; m < tone.size(); ++m)
      tone[m] = amp * std::cos(2 * std::numbers::pi * double(bin) * double(m) / 1024.0 + phase);
    const auto s = fft_spectrum(tone);
    worst_tone = std::max(worst_tone, std::abs(s.amplitudes[bin] - amp));
    for (std::size_t k = 0; k < s.bins(); ++k)
      if (k != bin) worst_tone = std::max(worst_tone, s.amplitudes[k]);
  }
  return {worst_rec <= 1e-8 && worst_energy <= 1e-6 && worst_tone <= 1e-6,
          "50 waves; max reconstruction rel err=" + fmt(worst_rec) + " (tol 1e-8), energy rel err=" +
              fmt(worst_energy) + " (tol 1e-6), tone amplitude err=" + fmt(worst_tone) + " (tol 1e-6)"};
}

Outcome feature_oracle() {
  const auto profile = DegradationProfile::standard();
  double worst = 0.0;
  std::size_t worst_feature = 0;
  for (std::uint64_t w = 0; w < 100; ++w) {
    Rng rng(derive_seed(7, w));
    std::vector<double> x;
    if (w % 2 == 0) {
      WaveCondition cond;
      cond.interval = int(w % 3);
      cond.sd = profile.target_std[w % 6][w % 3];
      cond.freq = profile.base_bin[w % 3];
      cond.spiking = cond.interval == kHighRisk;
      x = synthesize_wave(profile, cond, rng);
    } else {
      std::normal_distribution<double> g(1.5, 4.0);
      x.resize(1024);
      for (double& v : x) v = g(rng);
    }
    const auto got = wave_features(x);
    const auto want = oracle::wave_features(x);
    for (std::size_t i = 0; i < 24; ++i) {
      const double e = got[i] ? oracle::rel_err(*got[i], want[i]) : 1.0;
      if (e > worst) {
        worst = e;
        worst_feature = i;
      }
    }
  }
  // worked row, compared at the printed precision of the reference values
  const std::vector<double> row{1, 2, 3, 4};
  const auto v = time_domain_features_partial(row).values();
  const double ref[13] = {4, 1, 2.5, 3, 1.25, 1.118034, 2.738613, 0, 1.64, 1.095445, 1.460593, 1.6, 1.694172};
  const bool exact[13] = {true, true, true, true, true, false, false, true, true, false, false, true, false};
  bool row_ok = true;
  for (std::size_t i = 0; i < 13; ++i) {
    const double tol = exact[i] ? 1e-12 : 5e-7;
    if (!v[i] || std::abs(*v[i] - ref[i]) > tol) row_ok = false;
  }
  const auto names = sensor_feature_names(1);
  return {worst <= 1e-9 && row_ok, "100 waves x 24 features; max rel err=" + fmt(worst) + " (" +
                                       names[worst_feature] + ", tol 1e-9); [1,2,3,4] row " +
                                       (row_ok ? "matches" : "MISMATCH")};
}

Outcome learner_checks() {
  // MLP gradient on a 5-sample, 3-class problem at a non-trivial point
  Rng rng(derive_seed(8, "mlp"));
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(5, 4);
  for (double& v : x.data) v = g(rng);
  const std::vector<int> targets{0, 1, 2, 1, 0};
  MlpModel m = mlp_init(4, {0, 1, 2}, 6, 11);
  for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] = 0.1 * g(rng);
  for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] = 0.1 * g(rng);
  const auto grad = mlp_loss_gradient(m, x, targets);
  const double eps = 1e-5;
  double worst_grad = 0.0;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    const double saved = m.parameter(i);
    m.parameter(i) = saved + eps;
    const double up = mlp_loss_gradient(m, x, targets).loss;
    m.parameter(i) = saved - eps;
    const double down = mlp_loss_gradient(m, x, targets).loss;
    m.parameter(i) = saved;
    const double numeric = (up - down) / (2 * eps);
    const double denom = std::max(std::abs(numeric) + std::abs(grad.at(i)), 1e-8);
    worst_grad = std::max(worst_grad, std::abs(numeric - grad.at(i)) / denom);
  }

  // forest importances and KNN memorization on seeded 3-class data
  Matrix d(150, 8);
  std::vector<int> y(150);
  for (std::size_t i = 0; i < d.rows; ++i) {
    y[i] = int(i % 3);
    for (std::size_t j = 0; j < d.cols; ++j) d(i, j) = g(rng) + (j < 2 ? 1.5 * y[i] : 0.0);
  }
  const auto forest = forest_train(d, y, {}, derive_seed(8, "forest"));
  double sum = 0.0;
  for (double v : forest.importances) sum += v;
  const auto knn = knn_train(d, y, {1});
  std::size_t memorized = 0;
  for (std::size_t i = 0; i < d.rows; ++i) memorized += knn.predict(d.row(i)) == y[i];
  const bool ok = worst_grad <= 1e-4 && std::abs(sum - 1.0) <= 1e-9 && memorized == d.rows;
  return {ok, "mlp max rel grad err=" + fmt(worst_grad) + " (tol 1e-4); forest importance sum-1=" +
                  fmt(sum - 1.0) + " (tol 1e-9); knn k=1 recalled " + std::to_string(memorized) + "/" +
                  std::to_string(d.rows)};
}

// ---------------------------------------------------------------------------
// Full pipeline on the default seeded fleet
// ---------------------------------------------------------------------------

struct PipelineRun {
  FeatureTable features;
  ExperimentResult result;
  std::string feature_csv;
  std::string score_grid;
  std::string models;
  double seconds = 0.0;
};

std::string serialized_models(const ExperimentResult& r) {
  std::string out;
  for (const auto& [stage, sm] : r.models)
    for (const auto& [algo, model] : sm.models)
      out += to_string(stage) + "_" + to_string(algo) + "\n" + to_json(model).dump(1) + "\n";
  return out;
}

PipelineRun run_pipeline(PipelineAudit* audit = nullptr,
                         const std::function<void(FeatureTable&, const io::PipelineConfig&)>& tamper = {}) {
  const auto t0 = Clock::now();
  const io::PipelineConfig cfg;
  PipelineRun run;
  for (const auto& m : generate_fleet(cfg.fleet)) append(run.features, featurize_machine(m, audit, cfg.denoise));
  run.feature_csv = io::feature_csv(run.features);
  if (tamper) tamper(run.features, cfg);
  run.result = run_experiment(run.features, cfg.experiment, audit);
  std::vector<ScoreRow> rows;
  for (const auto& c : run.result.candidates) rows.push_back(c.row);
  run.score_grid = io::score_grid_csv(rows);
  run.models = serialized_models(run.result);
  run.seconds = seconds_since(t0);
  return run;
}

Outcome pipeline_hygiene() {
  PipelineAudit audit;
  const auto run = run_pipeline(&audit);
  std::set<std::string> test_keys;
  for (std::size_t i : run.result.split.test) test_keys.insert(run.features.rows[i].key());
  const char* stages[] = {audit_stage::denoise, audit_stage::selection, audit_stage::standardization,
                          audit_stage::undersampling, audit_stage::training};
  bool ok = !test_keys.empty();
  std::string detail = std::to_string(test_keys.size()) + " test rows;";
  for (const char* s : stages) {
    const auto foreign = audit.foreign_reads(s, test_keys);
    const auto reads = audit.reads(s);
    ok = ok && foreign == 0 && reads > 0;
    detail += " " + std::string(s) + " reads=" + std::to_string(reads) + " test=" + std::to_string(foreign);
  }
  // Scrambling every test-row feature must leave selection and models untouched.
  const auto scrambled = run_pipeline(nullptr, [](FeatureTable& t, const io::PipelineConfig& cfg) {
    const std::set<std::string> test(cfg.experiment.test_machines.begin(), cfg.experiment.test_machines.end());
    for (auto& r : t.rows)
      if (test.count(r.machine_id))
        for (auto& v : r.values)
          if (v) v = -3.0 * *v + 1.0;
  });
  bool same_selection = true;
  for (const auto& [stage, sf] : run.result.features)
    same_selection = same_selection && sf.selected == scrambled.result.features.at(stage).selected;
  const bool same_models = run.models == scrambled.models;
  ok = ok && same_selection && same_models;
  detail += std::string("; scrambled-test rerun: selection ") + (same_selection ? "identical" : "CHANGED") +
            ", models " + (same_models ? "identical" : "CHANGED");
  return {ok, detail};
}

Outcome end_to_end() {
  const auto run = run_pipeline();
  std::vector<double> cascade, ternary;
  std::string best_c, best_t;
  double top_c = -1e300, top_t = -1e300;
  for (const auto& c : run.result.candidates) {
    const bool is_cascade = c.row.kind == "cascade";
    (is_cascade ? cascade : ternary).push_back(c.row.test.s);
    double& top = is_cascade ? top_c : top_t;
    if (c.row.test.s > top) {
      top = c.row.test.s;
      (is_cascade ? best_c : best_t) = c.row.name;
    }
  }
  const double mc = median(cascade), mt = median(ternary);
  const bool ok = cascade.size() == 9 && ternary.size() == 3 && mc > mt && run.seconds < 300.0;
  return {ok, "median test S cascade=" + fmt(mc, 6) + " (9 combos) vs ternary=" + fmt(mt, 6) +
                  " (3 models); best cascade " + best_c + " " + fmt(top_c, 6) + ", best ternary " + best_t + " " +
                  fmt(top_t, 6) + "; runtime " + fmt(run.seconds, 3) + "s (budget 300s)"};
}

Outcome determinism() {
  const auto a = run_pipeline();
  const auto b = run_pipeline();
  const bool f = a.feature_csv == b.feature_csv;
  const bool g = a.score_grid == b.score_grid;
  const bool m = a.models == b.models;
  return {f && g && m, std::string("feature CSV ") + (f ? "identical" : "DIFFERS") + " (" +
                           std::to_string(a.feature_csv.size()) + " bytes), score grid " +
                           (g ? "identical" : "DIFFERS") + ", models " + (m ? "identical" : "DIFFERS") + " (" +
                           std::to_string(a.models.size()) + " bytes)"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "metric identities", metric_identities},
    {2, "calibration oracle", calibration_oracle},
    {3, "weighting monotonicity", weighting_monotonicity},
    {4, "worked values", worked_values},
    {5, "archetype ordering", archetype_ordering},
    {6, "signal correctness", signal_correctness},
    {7, "feature oracle", feature_oracle},
    {8, "learner checks", learner_checks},
    {9, "pipeline hygiene", pipeline_hygiene},
    {10, "cascade beats ternary (median test S)", end_to_end},
    {11, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
