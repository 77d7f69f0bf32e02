#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "rotorprog/dataset.hpp"
#include "rotorprog/rng.hpp"

namespace rotorprog {

struct ForestParams {
  int n_trees = 100;
  int max_features = 0;  // 0 -> floor(sqrt(k))
  int max_depth = 0;     // 0 -> unlimited
  int min_samples_split = 2;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;  // class index, meaningful for leaves
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict_index(std::span<const double> x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(at)];
      at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].label;
  }
};

struct ForestModel {
  std::vector<int> classes;  // sorted distinct labels; trees vote class indices
  std::vector<DecisionTree> trees;
  std::vector<double> importances;  // normalized mean decrease in Gini impurity

  int predict(std::span<const double> x) const {
    require(x.size() == importances.size(), ErrorKind::feature_mismatch, "forest query width mismatch");
    std::vector<int> votes(classes.size(), 0);
    for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict_index(x))];
    // ties resolve to the smallest label
    return classes[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
  }
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, std::size_t n_classes, std::size_t mtry,
              const ForestParams& params, Rng& rng)
      : x_(x), y_(y), n_classes_(n_classes), mtry_(mtry), params_(params), rng_(rng),
        importance_(x.cols, 0.0) {}

  DecisionTree build(std::vector<std::size_t> sample) {
    total_ = static_cast<double>(sample.size());
    grow(sample, 0);
    return std::move(tree_);
  }

  const std::vector<double>& importance() const { return importance_; }

 private:
  double gini(const std::vector<double>& counts, double n) const {
    if (n <= 0.0) return 0.0;
    double s = 1.0;
    for (double c : counts) s -= (c / n) * (c / n);
    return s;
  }

  int grow(std::vector<std::size_t>& sample, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::vector<double> counts(n_classes_, 0.0);
    for (std::size_t i : sample) counts[static_cast<std::size_t>(y_[i])] += 1.0;
    const double n = static_cast<double>(sample.size());
    const double impurity = gini(counts, n);
    const int majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    tree_.nodes[static_cast<std::size_t>(id)].label = majority;

    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    if (impurity <= 0.0 || depth_capped || sample.size() < static_cast<std::size_t>(params_.min_samples_split))
      return id;

    // Visit features in random order until mtry non-constant ones have been tried.
    std::vector<std::size_t> features(x_.cols);
    std::iota(features.begin(), features.end(), 0);
    std::shuffle(features.begin(), features.end(), rng_);

    double best_child = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t tried = 0;
    std::vector<std::size_t> order(sample);
    std::vector<double> left(n_classes_), right(n_classes_);
    for (std::size_t f : features) {
      if (tried >= mtry_) break;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(a, f), vb = x_(b, f);
        return va < vb || (va == vb && a < b);
      });
      if (x_(order.front(), f) == x_(order.back(), f)) continue;
      ++tried;
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        const auto c = static_cast<std::size_t>(y_[order[pos]]);
        left[c] += 1.0;
        right[c] -= 1.0;
        const double lo = x_(order[pos], f), hi = x_(order[pos + 1], f);
        if (lo == hi) continue;
        const double nl = static_cast<double>(pos + 1), nr = n - nl;
        const double child = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (child < best_child) {
          best_child = child;
          best_feature = static_cast<int>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (mid >= hi) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    importance_[static_cast<std::size_t>(best_feature)] += (n / total_) * (impurity - best_child);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t i : sample)
      (x_(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(i);
    sample.clear();
    sample.shrink_to_fit();
    const int l = grow(left_rows, depth + 1);
    const int r = grow(right_rows, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t n_classes_;
  std::size_t mtry_;
  const ForestParams& params_;
  Rng& rng_;
  DecisionTree tree_;
  std::vector<double> importance_;
  double total_ = 0.0;
};

}  // namespace detail

/// Bootstrap-sampled CART trees with Gini splits. Each tree draws from its own
/// seed derived from `seed` and the tree index, so trees are order-independent.
inline ForestModel forest_train(const Matrix& x, std::span<const int> labels, ForestParams params,
                                std::uint64_t seed) {
  require(labels.size() == x.rows && x.rows > 0, ErrorKind::invalid_input,
          "labels not aligned with rows");
  require(params.n_trees >= 1, ErrorKind::invalid_input, "forest needs at least one tree");
  ForestModel model;
  model.classes = distinct_labels(labels);
  require(model.classes.size() >= 2, ErrorKind::invalid_labels, "forest needs at least 2 classes");
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
                            model.classes.begin());

  const std::size_t mtry = params.max_features > 0
                               ? static_cast<std::size_t>(params.max_features)
                               : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols))));
  model.importances.assign(x.cols, 0.0);
  std::size_t contributing = 0;
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::uniform_int_distribution<std::size_t> pick(0, x.rows - 1);
    std::vector<std::size_t> boot(x.rows);
    for (auto& b : boot) b = pick(rng);
    detail::TreeBuilder builder(x, y, model.classes.size(), mtry, params, rng);
    model.trees.push_back(builder.build(std::move(boot)));
    const auto& imp = builder.importance();
    const double sum = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (sum > 0.0) {
      ++contributing;
      for (std::size_t j = 0; j < imp.size(); ++j) model.importances[j] += imp[j] / sum;
    }
  }
  if (contributing == 0) {
    std::fill(model.importances.begin(), model.importances.end(), 1.0 / static_cast<double>(x.cols));
  } else {
    const double sum = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
    for (double& v : model.importances) v /= sum;
  }
  return model;
}

}  // namespace rotorprog
