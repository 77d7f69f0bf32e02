#pragma once

// Feature selection: coefficient-of-variation filter, then a random-forest
// Gini-importance filter, plus boxplot statistics for manual review.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rotorprog/classifiers/forest.hpp"
#include "rotorprog/dataset.hpp"

namespace rotorprog {

struct CvFilterResult {
  std::vector<std::string> retained;
  std::vector<double> cv;  // aligned with the input names; NaN for entirely missing features
};

inline double coefficient_of_variation(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (std::abs(mean) < 1e-12) return sd > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return sd / std::abs(mean);
}

/// Deletes features whose CV = std / |mean| is below the threshold.
inline CvFilterResult cv_filter(const FeatureTable& table, double threshold = 1.0) {
  require(table.size() > 0 && table.width() > 0, ErrorKind::invalid_input, "empty feature matrix");
  CvFilterResult out;
  out.cv.reserve(table.width());
  std::vector<double> column;
  for (std::size_t j = 0; j < table.width(); ++j) {
    column.clear();
    for (const auto& r : table.rows)
      if (r.values[j]) column.push_back(*r.values[j]);
    const double cv = coefficient_of_variation(column);
    out.cv.push_back(cv);
    if (!column.empty() && !(cv < threshold)) out.retained.push_back(table.names[j]);
  }
  return out;
}

struct GiniFilterResult {
  std::vector<std::string> retained;
  std::vector<double> importances;  // aligned with the input names, sums to 1
};

/// Trains a forest on the complete columns and keeps features whose normalized
/// Gini importance reaches the threshold. Columns with any missing cell get 0.
inline GiniFilterResult gini_filter(const FeatureTable& table, double threshold, std::uint64_t seed,
                                    ForestParams params = {}) {
  require(table.labeled(), ErrorKind::invalid_labels, "gini filter needs labels");
  require(distinct_labels(table.labels).size() >= 2, ErrorKind::invalid_labels,
          "gini filter needs at least 2 classes");
  std::vector<std::string> complete;
  for (std::size_t j = 0; j < table.width(); ++j) {
    const bool full = std::all_of(table.rows.begin(), table.rows.end(),
                                  [&](const FeatureRow& r) { return r.values[j].has_value(); });
    if (full) complete.push_back(table.names[j]);
  }
  require(!complete.empty(), ErrorKind::invalid_input, "no complete feature columns");
  const auto dense = table.select_columns(complete);
  const auto forest = forest_train(to_dense(dense), dense.labels, params, seed);

  GiniFilterResult out;
  out.importances.assign(table.width(), 0.0);
  for (std::size_t c = 0; c < complete.size(); ++c)
    out.importances[table.column(complete[c])] = forest.importances[c];
  for (std::size_t j = 0; j < table.width(); ++j)
    if (out.importances[j] >= threshold) out.retained.push_back(table.names[j]);
  return out;
}

/// The `count` highest-importance names among `retained` (ties by name order).
inline std::vector<std::string> top_by_importance(const FeatureTable& table, const GiniFilterResult& gini,
                                                  std::size_t count) {
  std::vector<std::string> ranked = gini.retained;
  std::stable_sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
    return gini.importances[table.column(a)] > gini.importances[table.column(b)];
  });
  if (ranked.size() > count) ranked.resize(count);
  return ranked;
}

// ---------------------------------------------------------------------------
// Boxplots
// ---------------------------------------------------------------------------

/// Quantile by linear interpolation between order statistics of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), ErrorKind::invalid_input, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct BoxStats {
  std::string feature;
  int label = 0;
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_low = 0, whisker_high = 0;  // most extreme points within 1.5 IQR of the box
  std::vector<double> outliers;
};

inline BoxStats box_stats(std::vector<double> values) {
  require(!values.empty(), ErrorKind::invalid_input, "box statistics of empty data");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.count = values.size();
  b.min = values.front();
  b.max = values.back();
  b.q1 = quantile_sorted(values, 0.25);
  b.median = quantile_sorted(values, 0.5);
  b.q3 = quantile_sorted(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.max;
  b.whisker_high = b.min;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    } else {
      b.whisker_low = std::min(b.whisker_low, v);
      b.whisker_high = std::max(b.whisker_high, v);
    }
  }
  return b;
}

struct BoxplotExport {
  std::vector<BoxStats> boxes;  // feature-major, label ascending
  std::vector<std::string> warnings;
};

/// Per-feature, per-class box statistics. `classes` lists the expected labels;
/// empty means the labels present. Classes without rows are reported as warnings.
inline BoxplotExport boxplot_export(const FeatureTable& table, std::vector<int> classes = {}) {
  require(table.labeled(), ErrorKind::invalid_labels, "boxplot export needs labels");
  if (classes.empty()) classes = distinct_labels(table.labels);
  BoxplotExport out;
  for (int c : classes)
    if (std::find(table.labels.begin(), table.labels.end(), c) == table.labels.end())
      out.warnings.push_back("class " + std::to_string(c) + " has no rows; omitted");
  for (std::size_t j = 0; j < table.width(); ++j) {
    for (int c : classes) {
      std::vector<double> v;
      for (std::size_t i = 0; i < table.size(); ++i)
        if (table.labels[i] == c && table.rows[i].values[j]) v.push_back(*table.rows[i].values[j]);
      if (v.empty()) continue;
      auto b = box_stats(std::move(v));
      b.feature = table.names[j];
      b.label = c;
      out.boxes.push_back(std::move(b));
    }
  }
  return out;
}

}  // namespace rotorprog
