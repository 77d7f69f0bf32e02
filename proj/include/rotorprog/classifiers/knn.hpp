#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "rotorprog/dataset.hpp"

namespace rotorprog {

struct KnnParams {
  int k = 5;
};

/// Stores the training rows; Euclidean distance, majority vote.
/// Vote ties go to the tied class owning the nearest neighbor, and exact
/// distance ties between neighbors are broken by training-row order.
struct KnnModel {
  Matrix rows;
  std::vector<int> labels;
  int k = 5;

  int predict(std::span<const double> query) const {
    require(query.size() == rows.cols, ErrorKind::feature_mismatch, "knn query width mismatch");
    std::vector<std::pair<double, std::size_t>> dist(rows.rows);
    for (std::size_t i = 0; i < rows.rows; ++i) {
      const auto r = rows.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < r.size(); ++j) d += (r[j] - query[j]) * (r[j] - query[j]);
      dist[i] = {d, i};
    }
    const auto kk = static_cast<std::size_t>(k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    std::map<int, std::size_t> votes;
    for (std::size_t n = 0; n < kk; ++n) ++votes[labels[dist[n].second]];
    std::size_t best = 0;
    for (const auto& [label, count] : votes) best = std::max(best, count);
    for (std::size_t n = 0; n < kk; ++n) {
      const int label = labels[dist[n].second];
      if (votes[label] == best) return label;
    }
    return labels[dist[0].second];
  }
};

inline KnnModel knn_train(Matrix rows, std::vector<int> labels, KnnParams params = {}) {
  require(params.k >= 1, ErrorKind::invalid_input, "k must be >= 1");
  require(labels.size() == rows.rows, ErrorKind::invalid_input, "labels not aligned with rows");
  require(static_cast<std::size_t>(params.k) <= rows.rows, ErrorKind::invalid_input,
          "k exceeds the number of training rows");
  return KnnModel{std::move(rows), std::move(labels), params.k};
}

}  // namespace rotorprog
