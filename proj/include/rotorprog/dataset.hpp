#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rotorprog/error.hpp"
#include "rotorprog/features.hpp"

namespace rotorprog {

/// Machine state. Values double as class labels everywhere.
enum class State : int { normal = 0, risky = 1, high_risk = 2 };

inline constexpr int kNormal = static_cast<int>(State::normal);
inline constexpr int kRisky = static_cast<int>(State::risky);
inline constexpr int kHighRisk = static_cast<int>(State::high_risk);

/// Shortest round-trip text for a double; the basis of byte-identical outputs.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::invalid_input, "not a number: '" + std::string(s) + "'");
  return v;
}

struct FeatureRow {
  std::string machine_id;
  double timestamp = 0.0;
  std::vector<MaybeValue> values;

  std::string key() const { return machine_id + "@" + format_double(timestamp); }
};

/// Rows sharing one ordered name list, with optional aligned labels.
struct FeatureTable {
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;
  std::vector<int> labels;  // empty, or one per row

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return names.size(); }
  bool labeled() const { return !rows.empty() && labels.size() == rows.size(); }

  void validate() const {
    for (const auto& r : rows)
      require(r.values.size() == names.size(), ErrorKind::invalid_input,
              "row width does not match name list");
    require(labels.empty() || labels.size() == rows.size(), ErrorKind::invalid_input,
            "labels not aligned with rows");
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            ErrorKind::invalid_input, "duplicate feature names");
  }

  std::size_t column(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), ErrorKind::feature_mismatch,
            "unknown feature '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  void add(FeatureRow row, std::optional<int> label = std::nullopt) {
    rows.push_back(std::move(row));
    if (label) labels.push_back(*label);
  }

  FeatureTable subset(std::span<const std::size_t> idx) const {
    FeatureTable out;
    out.names = names;
    out.rows.reserve(idx.size());
    for (std::size_t i : idx) {
      out.rows.push_back(rows[i]);
      if (labeled()) out.labels.push_back(labels[i]);
    }
    return out;
  }

  FeatureTable select_columns(std::span<const std::string> keep) const {
    std::vector<std::size_t> cols;
    cols.reserve(keep.size());
    for (const auto& n : keep) cols.push_back(column(n));
    FeatureTable out;
    out.names.assign(keep.begin(), keep.end());
    out.labels = labels;
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
      FeatureRow nr{r.machine_id, r.timestamp, {}};
      nr.values.reserve(cols.size());
      for (std::size_t c : cols) nr.values.push_back(r.values[c]);
      out.rows.push_back(std::move(nr));
    }
    return out;
  }

  std::vector<std::string> machines() const {
    std::vector<std::string> ids;
    for (const auto& r : rows)
      if (std::find(ids.begin(), ids.end(), r.machine_id) == ids.end()) ids.push_back(r.machine_id);
    return ids;
  }
};

/// Dense row-major matrix used by the learners.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  Matrix take_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }
};

/// Throws feature-mismatch if any cell is missing.
inline Matrix to_dense(const FeatureTable& table) {
  Matrix m(table.size(), table.width());
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table.width(); ++j) {
      const auto& v = table.rows[i].values[j];
      require(v.has_value(), ErrorKind::feature_mismatch,
              "missing value for " + table.names[j] + " in row " + table.rows[i].key());
      m(i, j) = *v;
    }
  return m;
}

inline std::vector<int> distinct_labels(std::span<const int> labels) {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Row indices ordered by (machine_id, timestamp), stable.
inline std::vector<std::size_t> time_order(const FeatureTable& table, std::span<const std::size_t> idx) {
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = table.rows[a];
    const auto& rb = table.rows[b];
    if (ra.machine_id != rb.machine_id) return ra.machine_id < rb.machine_id;
    return ra.timestamp < rb.timestamp;
  });
  return order;
}

}  // namespace rotorprog
