#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rotorprog/dataset.hpp"

namespace rotorprog {

/// Per-feature z-score using training statistics only.
/// Zero-variance features pass through unscaled.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;  // 0 marks a pass-through feature
  std::vector<std::string> warnings;

  static Standardizer fit(const Matrix& train, std::span<const std::string> names = {}) {
    require(train.rows > 0, ErrorKind::invalid_input, "cannot standardize an empty matrix");
    Standardizer s;
    s.means.assign(train.cols, 0.0);
    s.stds.assign(train.cols, 0.0);
    const double n = static_cast<double>(train.rows);
    for (std::size_t j = 0; j < train.cols; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < train.rows; ++i) sum += train(i, j);
      const double mean = sum / n;
      double ss = 0.0;
      for (std::size_t i = 0; i < train.rows; ++i) ss += (train(i, j) - mean) * (train(i, j) - mean);
      s.means[j] = mean;
      s.stds[j] = std::sqrt(ss / n);
      if (!(s.stds[j] > 0.0)) {
        s.stds[j] = 0.0;
        s.warnings.push_back("zero-variance feature " +
                             (j < names.size() ? names[j] : std::to_string(j)) +
                             " passed through unscaled");
      }
    }
    return s;
  }

  std::size_t width() const { return means.size(); }

  void apply_row(std::span<double> row) const {
    require(row.size() == means.size(), ErrorKind::feature_mismatch,
            "standardizer width does not match row");
    for (std::size_t j = 0; j < row.size(); ++j)
      if (stds[j] > 0.0) row[j] = (row[j] - means[j]) / stds[j];
  }

  Matrix apply(Matrix m) const {
    for (std::size_t i = 0; i < m.rows; ++i) apply_row(m.row(i));
    return m;
  }
};

}  // namespace rotorprog
