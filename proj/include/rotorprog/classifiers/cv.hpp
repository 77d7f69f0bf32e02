#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rotorprog/classifiers/model.hpp"

namespace rotorprog {

struct CvReport {
  std::vector<std::vector<std::size_t>> folds;  // held-out row indices per fold
  std::vector<double> fold_accuracy;
  std::vector<double> fold_consistency;
  std::vector<std::vector<double>> fold_standardizer_means;
  double mean_accuracy = 0.0;
  double mean_consistency = 0.0;
  std::vector<std::string> warnings;
};

/// Consistency of predictions ordered by (machine, timestamp): one minus the mean
/// squared step between neighbours, counting only neighbours from the same machine
/// whose true state is also the same, so interval boundaries are never penalized.
inline double sequence_consistency(const FeatureTable& table, std::span<const std::size_t> rows,
                                   std::span<const int> predicted_by_row) {
  const auto order = time_order(table, rows);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t n = 0; n + 1 < order.size(); ++n) {
    const std::size_t a = order[n], b = order[n + 1];
    if (table.rows[a].machine_id != table.rows[b].machine_id) continue;
    if (table.labeled() && table.labels[a] != table.labels[b]) continue;
    const double d = predicted_by_row[b] - predicted_by_row[a];
    sum += d * d;
    ++pairs;
  }
  return pairs == 0 ? 1.0 : 1.0 - sum / static_cast<double>(pairs);
}

/// Stratified fold assignment; falls back to plain shuffled folds when a class
/// has fewer than k rows.
inline std::vector<std::vector<std::size_t>> make_folds(std::span<const int> labels, int k, std::uint64_t seed,
                                                        std::vector<std::string>* warnings = nullptr) {
  require(k >= 2, ErrorKind::invalid_input, "k must be >= 2");
  const auto kk = static_cast<std::size_t>(k);
  require(labels.size() >= kk, ErrorKind::invalid_input, "fewer rows than folds");
  Rng rng(seed);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  bool stratify = true;
  for (const auto& [label, idx] : by_class)
    if (idx.size() < kk) stratify = false;

  std::vector<std::vector<std::size_t>> folds(kk);
  std::size_t next = 0;
  if (stratify) {
    for (auto& [label, idx] : by_class) {
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i : idx) folds[next++ % kk].push_back(i);
    }
  } else {
    if (warnings) warnings->push_back("a class has fewer rows than folds; using unstratified folds");
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    for (std::size_t i : all) folds[next++ % kk].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// k-fold cross-validation; every statistic (standardizer, learner) is fitted
/// on the training folds only.
inline CvReport kfold_cv(const FeatureTable& table, const ModelSpec& spec, int k, std::uint64_t seed) {
  require(table.labeled(), ErrorKind::invalid_labels, "cross-validation needs labels");
  const Matrix x = to_dense(table);
  CvReport rep;
  rep.folds = make_folds(table.labels, k, seed, &rep.warnings);
  std::vector<int> predicted(table.size(), -1);
  for (std::size_t f = 0; f < rep.folds.size(); ++f) {
    const auto& held = rep.folds[f];
    std::vector<std::size_t> train;
    std::vector<bool> is_held(table.size(), false);
    for (std::size_t i : held) is_held[i] = true;
    for (std::size_t i = 0; i < table.size(); ++i)
      if (!is_held[i]) train.push_back(i);
    std::vector<int> train_labels;
    for (std::size_t i : train) train_labels.push_back(table.labels[i]);
    ModelSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, f);
    const auto model = train_model(x.take_rows(train), train_labels, table.names, fold_spec);
    rep.fold_standardizer_means.push_back(model.standardizer.means);
    std::size_t hits = 0;
    for (std::size_t i : held) {
      predicted[i] = model.predict_raw(x.row(i));
      hits += predicted[i] == table.labels[i];
    }
    rep.fold_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(held.size()));
    rep.fold_consistency.push_back(sequence_consistency(table, held, predicted));
  }
  const double n = static_cast<double>(rep.folds.size());
  rep.mean_accuracy = std::accumulate(rep.fold_accuracy.begin(), rep.fold_accuracy.end(), 0.0) / n;
  rep.mean_consistency = std::accumulate(rep.fold_consistency.begin(), rep.fold_consistency.end(), 0.0) / n;
  return rep;
}

}  // namespace rotorprog
