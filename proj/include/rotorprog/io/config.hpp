#pragma once

// TOML-style configuration: `key = value` lines under [section] headers, '#'
// comments. Values are numbers, true/false, "strings" or [lists] of either.
// Unknown sections or keys are rejected so typos never fall back to defaults.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rotorprog/datagen.hpp"
#include "rotorprog/experiment.hpp"

namespace rotorprog::io {

struct PipelineConfig {
  FleetConfig fleet;   // [data]; fleet.seed mirrors `seed`
  bool denoise = true;  // [features]
  ExperimentConfig experiment;  // [selection] [classifiers] [cascade] [metrics]

  PipelineConfig() {
    experiment.train_machines = {"M1", "M2", "M3", "M4", "M5", "M8", "M9", "M10", "M11", "M12"};
    experiment.test_machines = {"M6", "M7", "M13", "M14"};
  }

  std::uint64_t seed() const { return experiment.seed; }
  void set_seed(std::uint64_t s) {
    experiment.seed = s;
    fleet.seed = s;
  }
};

namespace detail {

using Scalar = std::variant<double, bool, std::string>;
struct Value {
  std::vector<Scalar> items;
  bool list = false;
  std::size_t line = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void config_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::config, "line " + std::to_string(line) + ": " + what);
}

inline Scalar parse_scalar(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) config_error(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') config_error(line, "unterminated string");
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    config_error(line, "cannot parse value '" + std::string(s) + "'");
  return v;
}

/// Strips a '#' comment that is not inside a string.
inline std::string_view strip_comment(std::string_view s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline std::map<std::string, Value> parse_entries(const std::string& text) {
  std::map<std::string, Value> out;
  std::string section;
  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(strip_comment(std::string_view(text).substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(line_no, "bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) config_error(line_no, "empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) config_error(line_no, "expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) config_error(line_no, "empty key");
    std::string_view raw = trim(line.substr(eq + 1));
    Value v;
    v.line = line_no;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') config_error(line_no, "lists must close on the same line");
      v.list = true;
      std::string_view inner = trim(raw.substr(1, raw.size() - 2));
      while (!inner.empty()) {
        const std::size_t comma = inner.find(',');
        v.items.push_back(parse_scalar(inner.substr(0, comma), line_no));
        if (comma == std::string_view::npos) break;
        inner = trim(inner.substr(comma + 1));
      }
    } else {
      v.items.push_back(parse_scalar(raw, line_no));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) config_error(line_no, "duplicate key " + full);
    out.emplace(full, std::move(v));
  }
  return out;
}

class Binder {
 public:
  explicit Binder(std::map<std::string, Value> entries) : entries_(std::move(entries)) {}

  void number(const std::string& key, double& dst) {
    if (const auto* v = take(key)) dst = scalar_number(*v, key);
  }

  void count(const std::string& key, std::size_t& dst, std::size_t min = 0) {
    if (const auto* v = take(key)) dst = static_cast<std::size_t>(whole(*v, key, static_cast<double>(min)));
  }

  void integer(const std::string& key, int& dst, int min = 0) {
    if (const auto* v = take(key)) dst = static_cast<int>(whole(*v, key, min));
  }

  void seed(const std::string& key, std::uint64_t& dst) {
    if (const auto* v = take(key)) dst = static_cast<std::uint64_t>(whole(*v, key, 0));
  }

  void flag(const std::string& key, bool& dst) {
    if (const auto* v = take(key)) {
      if (v->list || !std::holds_alternative<bool>(v->items[0])) config_error(v->line, key + " must be true or false");
      dst = std::get<bool>(v->items[0]);
    }
  }

  void text(const std::string& key, std::string& dst, std::initializer_list<const char*> allowed) {
    if (const auto* v = take(key)) {
      if (v->list || !std::holds_alternative<std::string>(v->items[0])) config_error(v->line, key + " must be a string");
      dst = std::get<std::string>(v->items[0]);
      for (const char* a : allowed)
        if (dst == a) return;
      config_error(v->line, "unsupported value '" + dst + "' for " + key);
    }
  }

  void strings(const std::string& key, std::vector<std::string>& dst) {
    if (const auto* v = take(key)) {
      if (!v->list) config_error(v->line, key + " must be a list");
      dst.clear();
      for (const auto& s : v->items) {
        if (!std::holds_alternative<std::string>(s)) config_error(v->line, key + " must list strings");
        dst.push_back(std::get<std::string>(s));
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& dst) {
    if (const auto* v = take(key)) {
      if (!v->list) config_error(v->line, key + " must be a list");
      dst.clear();
      for (const auto& s : v->items) {
        if (!std::holds_alternative<double>(s)) config_error(v->line, key + " must list numbers");
        dst.push_back(std::get<double>(s));
      }
    }
  }

  void finish() const {
    if (!entries_.empty()) {
      const auto& [key, v] = *entries_.begin();
      config_error(v.line, "unknown key " + key);
    }
  }

 private:
  const Value* take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    taken_.push_back(std::move(it->second));
    entries_.erase(it);
    return &taken_.back();
  }

  static double scalar_number(const Value& v, const std::string& key) {
    if (v.list || !std::holds_alternative<double>(v.items[0])) config_error(v.line, key + " must be a number");
    const double d = std::get<double>(v.items[0]);
    if (!std::isfinite(d)) config_error(v.line, key + " must be finite");
    return d;
  }

  static double whole(const Value& v, const std::string& key, double min) {
    const double d = scalar_number(v, key);
    if (d != std::floor(d) || d < min || d > 9.0e15)
      config_error(v.line, key + " must be a whole number >= " + format_double(min));
    return d;
  }

  std::map<std::string, Value> entries_;
  std::vector<Value> taken_{};
};

}  // namespace detail

inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  detail::Binder b(detail::parse_entries(text));
  std::uint64_t seed = 0;
  b.seed("seed", seed);
  cfg.set_seed(seed);

  auto& fl = cfg.fleet;
  b.count("data.n_faulty", fl.n_faulty);
  b.count("data.n_healthy", fl.n_healthy);
  b.count("data.normal_waves", fl.faulty_counts.normal, 1);
  b.count("data.risky_waves", fl.faulty_counts.risky, 1);
  b.count("data.high_risk_waves", fl.faulty_counts.high_risk, 1);
  b.count("data.healthy_waves", fl.healthy_waves, 1);
  b.count("data.wave_length", fl.profile.wave_length, 16);

  b.flag("features.denoise", cfg.denoise);

  auto& ex = cfg.experiment;
  b.number("selection.cv_threshold", ex.selection.cv_threshold);
  b.number("selection.gini_threshold", ex.selection.gini_threshold);
  b.integer("selection.max_features", ex.selection.max_features);
  b.integer("selection.gini_trees", ex.selection.forest.n_trees, 1);
  for (StageKind stage : kAllStages) {
    std::vector<std::string> pinned;
    b.strings("selection.pinned_" + to_string(stage), pinned);
    if (!pinned.empty()) ex.pinned_features[stage] = pinned;
  }

  b.integer("classifiers.knn_k", ex.knn.k, 1);
  b.integer("classifiers.forest_trees", ex.forest.n_trees, 1);
  b.integer("classifiers.forest_max_features", ex.forest.max_features);
  b.integer("classifiers.forest_max_depth", ex.forest.max_depth);
  b.integer("classifiers.forest_min_samples_split", ex.forest.min_samples_split, 2);
  b.integer("classifiers.mlp_hidden", ex.mlp.hidden, 1);
  b.integer("classifiers.mlp_epochs", ex.mlp.epochs, 1);
  b.number("classifiers.mlp_learning_rate", ex.mlp.learning_rate);
  b.integer("classifiers.cv_folds", ex.cv_folds, 2);

  b.text("cascade.mode", ex.mode, {"both", "cascade", "ternary"});
  b.text("cascade.split", ex.split, {"by_machine", "stratified"});
  b.strings("cascade.train_machines", ex.train_machines);
  b.strings("cascade.test_machines", ex.test_machines);
  b.number("cascade.train_fraction", ex.train_fraction);

  std::vector<double> w(ex.weights.begin(), ex.weights.end());
  b.numbers("metrics.weights", w);
  b.finish();

  require(w.size() == 3, ErrorKind::config, "metrics.weights needs 3 entries");
  require(w[0] > 0 && w[1] > 0 && w[2] > 0 && std::abs(w[0] + w[1] + w[2] - 1.0) < 1e-9, ErrorKind::config,
          "metrics.weights must be positive and sum to 1");
  std::copy(w.begin(), w.end(), ex.weights.begin());
  require(ex.mlp.learning_rate > 0.0, ErrorKind::config, "classifiers.mlp_learning_rate must be positive");
  require(ex.train_fraction > 0.0 && ex.train_fraction < 1.0, ErrorKind::config,
          "cascade.train_fraction must be in (0, 1)");
  require(ex.selection.gini_threshold >= 0.0 && ex.selection.cv_threshold >= 0.0, ErrorKind::config,
          "selection thresholds must be non-negative");
  require(fl.n_faulty + fl.n_healthy >= 1, ErrorKind::config, "fleet has no machines");
  return cfg;
}

/// Full config text with every key spelled out; parse_config(config_text(c)) == c.
inline std::string config_text(const PipelineConfig& cfg) {
  auto list = [](const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", \"" : "\"") + v[i] + "\"";
    return s + "]";
  };
  const auto& fl = cfg.fleet;
  const auto& ex = cfg.experiment;
  std::string o;
  o += "seed = " + std::to_string(cfg.seed()) + "\n\n";
  o += "[data]\n";
  o += "n_faulty = " + std::to_string(fl.n_faulty) + "\n";
  o += "n_healthy = " + std::to_string(fl.n_healthy) + "\n";
  o += "normal_waves = " + std::to_string(fl.faulty_counts.normal) + "\n";
  o += "risky_waves = " + std::to_string(fl.faulty_counts.risky) + "\n";
  o += "high_risk_waves = " + std::to_string(fl.faulty_counts.high_risk) + "\n";
  o += "healthy_waves = " + std::to_string(fl.healthy_waves) + "\n";
  o += "wave_length = " + std::to_string(fl.profile.wave_length) + "\n\n";
  o += "[features]\n";
  o += std::string("denoise = ") + (cfg.denoise ? "true" : "false") + "\n\n";
  o += "[selection]\n";
  o += "cv_threshold = " + format_double(ex.selection.cv_threshold) + "\n";
  o += "gini_threshold = " + format_double(ex.selection.gini_threshold) + "\n";
  o += "max_features = " + std::to_string(ex.selection.max_features) + "\n";
  o += "gini_trees = " + std::to_string(ex.selection.forest.n_trees) + "\n";
  for (StageKind stage : kAllStages) {
    auto it = ex.pinned_features.find(stage);
    o += "pinned_" + to_string(stage) + " = " + list(it == ex.pinned_features.end() ? std::vector<std::string>{} : it->second) + "\n";
  }
  o += "\n[classifiers]\n";
  o += "knn_k = " + std::to_string(ex.knn.k) + "\n";
  o += "forest_trees = " + std::to_string(ex.forest.n_trees) + "\n";
  o += "forest_max_features = " + std::to_string(ex.forest.max_features) + "\n";
  o += "forest_max_depth = " + std::to_string(ex.forest.max_depth) + "\n";
  o += "forest_min_samples_split = " + std::to_string(ex.forest.min_samples_split) + "\n";
  o += "mlp_hidden = " + std::to_string(ex.mlp.hidden) + "\n";
  o += "mlp_epochs = " + std::to_string(ex.mlp.epochs) + "\n";
  o += "mlp_learning_rate = " + format_double(ex.mlp.learning_rate) + "\n";
  o += "cv_folds = " + std::to_string(ex.cv_folds) + "\n\n";
  o += "[cascade]\n";
  o += "mode = \"" + ex.mode + "\"\n";
  o += "split = \"" + ex.split + "\"\n";
  o += "train_machines = " + list(ex.train_machines) + "\n";
  o += "test_machines = " + list(ex.test_machines) + "\n";
  o += "train_fraction = " + format_double(ex.train_fraction) + "\n\n";
  o += "[metrics]\n";
  o += "weights = [" + format_double(ex.weights[0]) + ", " + format_double(ex.weights[1]) + ", " +
       format_double(ex.weights[2]) + "]\n";
  return o;
}

}  // namespace rotorprog::io
