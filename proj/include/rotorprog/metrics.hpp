#pragma once

// Online prediction ability index: time-weighted accuracy S, consistency C,
// and plain accuracy over one or more run-to-failure loops.

#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rotorprog/dataset.hpp"
#include "rotorprog/error.hpp"

namespace rotorprog {

/// Sample counts of the normal / risky / high-risk intervals of one loop.
struct LoopLayout {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  std::size_t total() const { return n1 + n2 + n3; }

  /// Interval (0, 1, 2) owning the 0-based sample index.
  int interval_of(std::size_t i) const {
    if (i < n1) return kNormal;
    if (i < n1 + n2) return kRisky;
    return kHighRisk;
  }

  bool operator==(const LoopLayout&) const = default;

  /// Layout of an interval-ordered truth sequence (0...0 1...1 2...2).
  static LoopLayout from_truth(std::span<const int> truth) {
    LoopLayout l;
    int prev = kNormal;
    for (int y : truth) {
      require(y >= kNormal && y <= kHighRisk, ErrorKind::invalid_input, "state outside {0,1,2}");
      require(y >= prev, ErrorKind::invalid_input, "truth is not interval-ordered");
      prev = y;
      (y == kNormal ? l.n1 : y == kRisky ? l.n2 : l.n3)++;
    }
    return l;
  }
};

inline void validate(const LoopLayout& l) {
  require(l.n1 >= 2, ErrorKind::degenerate_layout,
          "normal interval needs at least 2 samples (ln N1 > 0)");
  require(l.n2 >= 1 && l.n3 >= 1, ErrorKind::degenerate_layout,
          "risky and high-risk intervals need at least 1 sample");
}

/// Truth sequence implied by a layout.
inline std::vector<int> truth_for(const LoopLayout& l) {
  std::vector<int> t(l.total(), kNormal);
  for (std::size_t i = l.n1; i < l.total(); ++i) t[i] = l.interval_of(i);
  return t;
}

struct PredictionSeries {
  std::vector<int> truth;
  std::vector<int> predicted;
  LoopLayout layout;

  static PredictionSeries from(std::vector<int> truth, std::vector<int> predicted) {
    PredictionSeries s;
    s.layout = LoopLayout::from_truth(truth);
    s.truth = std::move(truth);
    s.predicted = std::move(predicted);
    return s;
  }
};

inline void validate(const PredictionSeries& s) {
  require(s.truth.size() == s.layout.total() && s.predicted.size() == s.layout.total(),
          ErrorKind::invalid_input, "series length does not match layout");
  require(s.truth == truth_for(s.layout), ErrorKind::invalid_input,
          "truth is not consistent with layout");
  for (int p : s.predicted)
    require(p >= kNormal && p <= kHighRisk, ErrorKind::invalid_input, "prediction outside {0,1,2}");
}

/// Coefficients that make an all-wrong series lose exactly weights[k] in interval k.
struct Calibration {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::array<double, 3> weights{0.2, 0.3, 0.5};
  LoopLayout layout;
  std::string warning;  // non-empty when beta < 0 or gamma < 0

  bool feasible() const { return beta >= 0.0 && gamma >= 0.0; }

  /// Penalty for mispredicting the 0-based sample i.
  double error_cost(std::size_t i) const {
    const double ln_n1 = std::log(static_cast<double>(layout.n1));
    if (i < layout.n1) return alpha * ln_n1;
    if (i < layout.n1 + layout.n2) {
      const double j = static_cast<double>(i - layout.n1 + 1);
      return beta * std::log(j) + alpha * ln_n1;
    }
    const double j = static_cast<double>(i - layout.n1 - layout.n2 + 1);
    return gamma * j * j + beta * std::log(static_cast<double>(layout.n2)) + alpha * ln_n1;
  }
};

inline constexpr std::array<double, 3> kDefaultWeights{0.2, 0.3, 0.5};

inline Calibration calibrate(const LoopLayout& layout,
                             std::array<double, 3> weights = kDefaultWeights) {
  validate(layout);
  require(std::abs(weights[0] + weights[1] + weights[2] - 1.0) < 1e-12, ErrorKind::invalid_input,
          "interval weights must sum to 1");
  Calibration c;
  c.layout = layout;
  c.weights = weights;
  const double n1 = static_cast<double>(layout.n1);
  const double n2 = static_cast<double>(layout.n2);
  const double n3 = static_cast<double>(layout.n3);
  const double ln_n1 = std::log(n1);
  c.alpha = weights[0] / (n1 * ln_n1);

  const double risky_rest = weights[1] - n2 * c.alpha * ln_n1;
  double log_sum = 0.0;
  for (std::size_t j = 2; j <= layout.n2; ++j) log_sum += std::log(static_cast<double>(j));
  if (layout.n2 == 1) {
    require(std::abs(risky_rest) < 1e-12, ErrorKind::infeasible_calibration,
            "N2 = 1 leaves no freedom to reach the risky weight");
    c.beta = 0.0;
  } else {
    c.beta = risky_rest / log_sum;
  }

  double sq_sum = 0.0;
  for (std::size_t j = 1; j <= layout.n3; ++j) sq_sum += static_cast<double>(j * j);
  c.gamma = (weights[2] - n3 * (c.beta * std::log(n2) + c.alpha * ln_n1)) / sq_sum;

  if (!c.feasible())
    c.warning = "calibration has negative coefficient (beta=" + format_double(c.beta) +
                ", gamma=" + format_double(c.gamma) + "); S may leave [0,1]";
  return c;
}

inline double s_score(const PredictionSeries& s, const Calibration& calib) {
  validate(s);
  require(s.layout == calib.layout, ErrorKind::invalid_input,
          "calibration was computed for a different layout");
  double err = 0.0;
  for (std::size_t i = 0; i < s.predicted.size(); ++i)
    if (s.predicted[i] != s.truth[i]) err += calib.error_cost(i);
  return 1.0 - err;
}

struct Consistency {
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

/// Mean squared step between consecutive predictions, taken inside each interval only.
inline Consistency c_score(std::span<const int> predicted, const LoopLayout& layout) {
  require(predicted.size() == layout.total(), ErrorKind::invalid_input,
          "prediction length does not match layout");
  auto block = [&](std::size_t begin, std::size_t count) {
    if (count < 2) return 1.0;
    double sum = 0.0;
    for (std::size_t i = begin; i + 1 < begin + count; ++i) {
      const double d = predicted[i + 1] - predicted[i];
      sum += d * d;
    }
    return 1.0 - sum / static_cast<double>(count - 1);
  };
  Consistency out;
  out.c1 = block(0, layout.n1);
  out.c2 = block(layout.n1, layout.n2);
  out.c3 = block(layout.n1 + layout.n2, layout.n3);
  out.c = (out.c1 + out.c2 + out.c3) / 3.0;
  return out;
}

inline double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  require(truth.size() == predicted.size() && !truth.empty(), ErrorKind::invalid_input,
          "accuracy needs equal-length non-empty sequences");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline double accuracy(const PredictionSeries& s) {
  validate(s);
  return accuracy(s.truth, s.predicted);
}

struct OpaiReport {
  double accuracy = 0.0;
  double s = 0.0;
  double c = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

inline OpaiReport opai(const PredictionSeries& s,
                       std::array<double, 3> weights = kDefaultWeights) {
  const auto calib = calibrate(s.layout, weights);
  const auto cons = c_score(s.predicted, s.layout);
  return {accuracy(s), s_score(s, calib), cons.c, cons.c1, cons.c2, cons.c3};
}

/// Accuracy pooled over every sample; S and C averaged over loops,
/// each loop calibrated on its own layout.
inline OpaiReport multi_loop_opai(std::span<const PredictionSeries> loops,
                                  std::array<double, 3> weights = kDefaultWeights) {
  require(!loops.empty(), ErrorKind::invalid_input, "no loops to score");
  OpaiReport agg;
  std::size_t hits = 0, total = 0;
  for (const auto& loop : loops) {
    const auto r = opai(loop, weights);
    agg.s += r.s;
    agg.c += r.c;
    agg.c1 += r.c1;
    agg.c2 += r.c2;
    agg.c3 += r.c3;
    for (std::size_t i = 0; i < loop.truth.size(); ++i) hits += loop.truth[i] == loop.predicted[i];
    total += loop.truth.size();
  }
  const double n = static_cast<double>(loops.size());
  agg.s /= n;
  agg.c /= n;
  agg.c1 /= n;
  agg.c2 /= n;
  agg.c3 /= n;
  agg.accuracy = static_cast<double>(hits) / static_cast<double>(total);
  return agg;
}

}  // namespace rotorprog
