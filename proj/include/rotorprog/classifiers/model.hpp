#pragma once

// Algorithm-tagged trained model plus its self-describing JSON form.

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rotorprog/classifiers/forest.hpp"
#include "rotorprog/classifiers/knn.hpp"
#include "rotorprog/classifiers/mlp.hpp"
#include "rotorprog/classifiers/standardizer.hpp"

namespace rotorprog {

enum class Algo { knn, forest, mlp };

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::knn: return "knn";
    case Algo::forest: return "forest";
    case Algo::mlp: return "mlp";
  }
  return "?";
}

inline Algo parse_algo(std::string_view s) {
  if (s == "knn") return Algo::knn;
  if (s == "forest" || s == "rf") return Algo::forest;
  if (s == "mlp" || s == "ann") return Algo::mlp;
  fail(ErrorKind::invalid_input, "unknown algorithm '" + std::string(s) + "'");
}

/// Display name used in score grids (KNN / RF / ANN).
inline std::string display_name(Algo a) {
  switch (a) {
    case Algo::knn: return "KNN";
    case Algo::forest: return "RF";
    case Algo::mlp: return "ANN";
  }
  return "?";
}

inline constexpr Algo kAllAlgos[] = {Algo::knn, Algo::forest, Algo::mlp};

struct ModelSpec {
  Algo algo = Algo::forest;
  KnnParams knn;
  ForestParams forest;
  MlpParams mlp;
  std::uint64_t seed = 0;
};

struct TrainedModel {
  Algo algo = Algo::forest;
  ModelSpec spec;
  std::vector<std::string> feature_names;
  Standardizer standardizer;
  std::variant<KnnModel, ForestModel, MlpModel> learner;

  /// `raw` is one unstandardized row in feature_names order.
  int predict_raw(std::span<const double> raw) const {
    std::vector<double> z(raw.begin(), raw.end());
    standardizer.apply_row(z);
    return std::visit([&](const auto& m) { return m.predict(z); }, learner);
  }

  /// Rejects tables whose name list differs from the trained one.
  std::vector<int> predict(const FeatureTable& table) const {
    require(table.names == feature_names, ErrorKind::feature_mismatch,
            "feature names do not match the trained model");
    const Matrix x = to_dense(table);
    std::vector<int> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_raw(x.row(i));
    return out;
  }

  const std::vector<double>* importances() const {
    if (const auto* f = std::get_if<ForestModel>(&learner)) return &f->importances;
    return nullptr;
  }
};

/// Fits the standardizer on `x`, then the learner on the standardized rows.
inline TrainedModel train_model(const Matrix& x, std::span<const int> labels,
                                std::vector<std::string> names, const ModelSpec& spec) {
  require(names.size() == x.cols, ErrorKind::feature_mismatch, "name list does not match matrix width");
  require(distinct_labels(labels).size() >= 2, ErrorKind::invalid_labels,
          "training needs at least 2 classes");
  TrainedModel m;
  m.algo = spec.algo;
  m.spec = spec;
  m.feature_names = std::move(names);
  m.standardizer = Standardizer::fit(x, m.feature_names);
  Matrix z = m.standardizer.apply(x);
  switch (spec.algo) {
    case Algo::knn:
      m.learner = knn_train(std::move(z), std::vector<int>(labels.begin(), labels.end()), spec.knn);
      break;
    case Algo::forest:
      m.learner = forest_train(z, labels, spec.forest, spec.seed);
      break;
    case Algo::mlp:
      m.learner = mlp_train(z, labels, spec.mlp, spec.seed);
      break;
  }
  return m;
}

inline TrainedModel train_model(const FeatureTable& table, const ModelSpec& spec) {
  require(table.labeled(), ErrorKind::invalid_labels, "training table is unlabeled");
  return train_model(to_dense(table), table.labels, table.names, spec);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

inline Json to_json(const Matrix& m) {
  return Json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline Matrix matrix_from_json(const Json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  require(m.data.size() == m.rows * m.cols, ErrorKind::invalid_input, "matrix data size mismatch");
  return m;
}

inline Json to_json(const ModelSpec& s) {
  return Json{{"algo", to_string(s.algo)},
              {"seed", s.seed},
              {"knn", {{"k", s.knn.k}}},
              {"forest",
               {{"n_trees", s.forest.n_trees},
                {"max_features", s.forest.max_features},
                {"max_depth", s.forest.max_depth},
                {"min_samples_split", s.forest.min_samples_split}}},
              {"mlp",
               {{"hidden", s.mlp.hidden},
                {"epochs", s.mlp.epochs},
                {"learning_rate", s.mlp.learning_rate}}}};
}

inline ModelSpec spec_from_json(const Json& j) {
  ModelSpec s;
  s.algo = parse_algo(j.at("algo").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.knn.k = j.at("knn").at("k").get<int>();
  const auto& f = j.at("forest");
  s.forest = {f.at("n_trees").get<int>(), f.at("max_features").get<int>(), f.at("max_depth").get<int>(),
              f.at("min_samples_split").get<int>()};
  const auto& p = j.at("mlp");
  s.mlp = {p.at("hidden").get<int>(), p.at("epochs").get<int>(), p.at("learning_rate").get<double>()};
  return s;
}

inline Json to_json(const TrainedModel& m) {
  Json j;
  j["format"] = "rotorprog-model";
  j["version"] = 1;
  j["algo"] = to_string(m.algo);
  j["spec"] = to_json(m.spec);
  j["feature_names"] = m.feature_names;
  j["standardizer"] = {{"means", m.standardizer.means}, {"stds", m.standardizer.stds}};
  Json body;
  if (const auto* k = std::get_if<KnnModel>(&m.learner)) {
    body = {{"k", k->k}, {"rows", to_json(k->rows)}, {"labels", k->labels}};
  } else if (const auto* f = std::get_if<ForestModel>(&m.learner)) {
    Json trees = Json::array();
    for (const auto& t : f->trees) {
      // columnar node layout keeps large forests compact
      std::vector<int> feature, left, right, label;
      std::vector<double> threshold;
      for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        label.push_back(n.label);
      }
      trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                       {"right", right}, {"label", label}});
    }
    body = {{"classes", f->classes}, {"importances", f->importances}, {"trees", trees}};
  } else {
    const auto& p = std::get<MlpModel>(m.learner);
    body = {{"activation", "tanh"}, {"output", "softmax"}, {"inputs", p.inputs}, {"hidden", p.hidden},
            {"classes", p.classes}, {"w1", p.w1}, {"b1", p.b1}, {"w2", p.w2}, {"b2", p.b2}};
  }
  j["model"] = std::move(body);
  return j;
}

inline TrainedModel model_from_json(const Json& j) {
  require(j.value("format", "") == "rotorprog-model", ErrorKind::invalid_input,
          "not a rotorprog model document");
  TrainedModel m;
  m.algo = parse_algo(j.at("algo").get<std::string>());
  m.spec = spec_from_json(j.at("spec"));
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.standardizer.means = j.at("standardizer").at("means").get<std::vector<double>>();
  m.standardizer.stds = j.at("standardizer").at("stds").get<std::vector<double>>();
  const auto& b = j.at("model");
  switch (m.algo) {
    case Algo::knn:
      m.learner = KnnModel{matrix_from_json(b.at("rows")), b.at("labels").get<std::vector<int>>(),
                           b.at("k").get<int>()};
      break;
    case Algo::forest: {
      ForestModel f;
      f.classes = b.at("classes").get<std::vector<int>>();
      f.importances = b.at("importances").get<std::vector<double>>();
      for (const auto& t : b.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto label = t.at("label").get<std::vector<int>>();
        DecisionTree tree;
        for (std::size_t i = 0; i < feature.size(); ++i)
          tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], label[i]});
        f.trees.push_back(std::move(tree));
      }
      m.learner = std::move(f);
      break;
    }
    case Algo::mlp: {
      MlpModel p;
      p.inputs = b.at("inputs").get<std::size_t>();
      p.hidden = b.at("hidden").get<std::size_t>();
      p.classes = b.at("classes").get<std::vector<int>>();
      p.w1 = b.at("w1").get<std::vector<double>>();
      p.b1 = b.at("b1").get<std::vector<double>>();
      p.w2 = b.at("w2").get<std::vector<double>>();
      p.b2 = b.at("b2").get<std::vector<double>>();
      m.learner = std::move(p);
      break;
    }
  }
  return m;
}

}  // namespace rotorprog
