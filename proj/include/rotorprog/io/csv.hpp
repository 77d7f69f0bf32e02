#pragma once

// Text formats of the pipeline: wave bundles, feature tables, predictions,
// fleet manifests, feature lists, score grids and box statistics.
// Plain comma-separated fields, no quoting, '.' decimal point, LF endings.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotorprog/cascade.hpp"
#include "rotorprog/dataset.hpp"
#include "rotorprog/io/files.hpp"
#include "rotorprog/metrics.hpp"
#include "rotorprog/selection.hpp"
#include "rotorprog/signal.hpp"

namespace rotorprog::io {

/// Line-by-line reader that reports `<source>:<line>` on malformed input.
class CsvReader {
 public:
  CsvReader(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  /// Next non-empty line split on commas; false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::malformed_csv, source_ + ":" + std::to_string(line_) + ": " + what);
  }

  void expect_width(const std::vector<std::string_view>& fields, std::size_t n) const {
    if (fields.size() != n)
      error("expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
  }

  double number(std::string_view field, std::string_view what) const {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      error("bad " + std::string(what) + " '" + std::string(field) + "'");
    return v;
  }

  int integer(std::string_view field, std::string_view what) const {
    int v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
      error("bad " + std::string(what) + " '" + std::string(field) + "'");
    return v;
  }

  void expect_header(const std::vector<std::string_view>& fields, const std::vector<std::string>& header) const {
    expect_width(fields, header.size());
    for (std::size_t i = 0; i < header.size(); ++i)
      if (fields[i] != header[i])
        error("header column " + std::to_string(i + 1) + " is '" + std::string(fields[i]) + "', expected '" +
              header[i] + "'");
  }

 private:
  std::string text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

inline void check_id(const std::string& id) {
  require(!id.empty() && id.find_first_of(",\n\r") == std::string::npos, ErrorKind::invalid_input,
          "identifier '" + id + "' is empty or contains a separator");
}

inline std::string join_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Wave bundle: machine_id,sensor_id,timestamp,s0,...,s{M-1}
// ---------------------------------------------------------------------------

inline std::string wave_bundle_csv(const std::vector<Wave>& waves) {
  std::string out = "machine_id,sensor_id,timestamp";
  const std::size_t m = waves.empty() ? kDefaultWaveLength : waves.front().size();
  for (std::size_t i = 0; i < m; ++i) out += ",s" + std::to_string(i);
  out += '\n';
  for (const auto& w : waves) {
    check_id(w.machine_id);
    require(w.size() == m, ErrorKind::invalid_input, "waves in one bundle must share a length");
    out += w.machine_id;
    out += ',' + std::to_string(w.sensor_id) + ',' + format_double(w.timestamp);
    for (double v : w.samples) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<Wave> parse_wave_bundle(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty wave bundle");
  if (f.size() < 5 || f[0] != "machine_id" || f[1] != "sensor_id" || f[2] != "timestamp")
    r.error("header must start with machine_id,sensor_id,timestamp followed by samples");
  const std::size_t m = f.size() - 3;
  for (std::size_t i = 0; i < m; ++i)
    if (f[3 + i] != "s" + std::to_string(i)) r.error("sample column " + std::to_string(i) + " is misnamed");
  std::vector<Wave> waves;
  while (r.next(f)) {
    r.expect_width(f, m + 3);
    Wave w;
    w.machine_id = std::string(f[0]);
    if (w.machine_id.empty()) r.error("empty machine_id");
    w.sensor_id = r.integer(f[1], "sensor_id");
    if (w.sensor_id < 1 || w.sensor_id > kSensorCount) r.error("sensor_id out of range");
    w.timestamp = r.number(f[2], "timestamp");
    w.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i) w.samples[i] = r.number(f[3 + i], "sample");
    waves.push_back(std::move(w));
  }
  return waves;
}

/// Groups waves into six-sensor arrays per (machine, timestamp), time-ordered.
inline std::vector<std::vector<Wave>> group_wave_arrays(std::vector<Wave> waves) {
  std::map<std::pair<std::string, double>, std::vector<Wave>> by_key;
  for (auto& w : waves) by_key[{w.machine_id, w.timestamp}].push_back(std::move(w));
  std::vector<std::vector<Wave>> out;
  for (auto& [key, arr] : by_key) {
    require(arr.size() == kSensorCount, ErrorKind::alignment,
            key.first + "@" + format_double(key.second) + " has " + std::to_string(arr.size()) +
                " sensor waves, expected 6");
    std::sort(arr.begin(), arr.end(), [](const Wave& a, const Wave& b) { return a.sensor_id < b.sensor_id; });
    out.push_back(std::move(arr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fleet manifest: machine_id,faulty,failure_time (empty when healthy)
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string machine_id;
  std::optional<double> failure_time;
};

inline std::string manifest_csv(const std::vector<ManifestEntry>& entries) {
  std::string out = "machine_id,faulty,failure_time\n";
  for (const auto& e : entries) {
    check_id(e.machine_id);
    out += e.machine_id + ',' + (e.failure_time ? "1," + format_double(*e.failure_time) : "0,") + '\n';
  }
  return out;
}

inline std::vector<ManifestEntry> parse_manifest(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty manifest");
  r.expect_header(f, {"machine_id", "faulty", "failure_time"});
  std::vector<ManifestEntry> out;
  while (r.next(f)) {
    r.expect_width(f, 3);
    ManifestEntry e;
    e.machine_id = std::string(f[0]);
    if (e.machine_id.empty()) r.error("empty machine_id");
    if (f[1] == "1") {
      e.failure_time = r.number(f[2], "failure_time");
    } else if (f[1] != "0" || !f[2].empty()) {
      r.error("faulty must be 1 with a failure time or 0 with an empty one");
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature CSV: machine_id,timestamp,label,<names>; missing values are empty
// ---------------------------------------------------------------------------

inline std::string feature_csv(const FeatureTable& table) {
  table.validate();
  std::string out = "machine_id,timestamp,label";
  for (const auto& n : table.names) out += ',' + n;
  out += '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.rows[i];
    check_id(row.machine_id);
    out += row.machine_id + ',' + format_double(row.timestamp) + ',';
    if (table.labeled()) out += std::to_string(table.labels[i]);
    for (const auto& v : row.values) {
      out += ',';
      if (v) out += format_double(*v);
    }
    out += '\n';
  }
  return out;
}

/// All rows must be labeled, or none.
inline FeatureTable parse_feature_csv(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty feature file");
  if (f.size() < 4 || f[0] != "machine_id" || f[1] != "timestamp" || f[2] != "label")
    r.error("header must start with machine_id,timestamp,label");
  FeatureTable t;
  for (std::size_t i = 3; i < f.size(); ++i) t.names.emplace_back(f[i]);
  std::optional<bool> labeled;
  while (r.next(f)) {
    r.expect_width(f, t.names.size() + 3);
    FeatureRow row;
    row.machine_id = std::string(f[0]);
    if (row.machine_id.empty()) r.error("empty machine_id");
    row.timestamp = r.number(f[1], "timestamp");
    const bool has_label = !f[2].empty();
    if (labeled && *labeled != has_label) r.error("label column must be filled on every row or on none");
    labeled = has_label;
    std::optional<int> label;
    if (has_label) {
      label = r.integer(f[2], "label");
      if (*label < kNormal || *label > kHighRisk) r.error("label outside {0,1,2}");
    }
    row.values.reserve(t.names.size());
    for (std::size_t j = 0; j < t.names.size(); ++j) {
      if (f[3 + j].empty()) {
        row.values.emplace_back();
      } else {
        row.values.emplace_back(r.number(f[3 + j], t.names[j]));
      }
    }
    t.add(std::move(row), label);
  }
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorKind::malformed_csv, source + ": " + e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Prediction CSV: loop_id,timestamp,truth,predicted
// ---------------------------------------------------------------------------

struct PredictionRow {
  std::string loop_id;
  double timestamp = 0.0;
  int truth = 0;
  int predicted = 0;
};

inline std::string prediction_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "loop_id,timestamp,truth,predicted\n";
  for (const auto& p : rows) {
    check_id(p.loop_id);
    out += p.loop_id + ',' + format_double(p.timestamp) + ',' + std::to_string(p.truth) + ',' +
           std::to_string(p.predicted) + '\n';
  }
  return out;
}

inline std::vector<PredictionRow> parse_prediction_csv(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty prediction file");
  r.expect_header(f, {"loop_id", "timestamp", "truth", "predicted"});
  std::vector<PredictionRow> out;
  while (r.next(f)) {
    r.expect_width(f, 4);
    PredictionRow p;
    p.loop_id = std::string(f[0]);
    if (p.loop_id.empty()) r.error("empty loop_id");
    p.timestamp = r.number(f[1], "timestamp");
    p.truth = r.integer(f[2], "truth");
    p.predicted = r.integer(f[3], "predicted");
    if (p.truth < kNormal || p.truth > kHighRisk || p.predicted < kNormal || p.predicted > kHighRisk)
      r.error("state outside {0,1,2}");
    out.push_back(std::move(p));
  }
  if (out.empty()) fail(ErrorKind::malformed_csv, source + ": no prediction rows");
  return out;
}

/// Series per loop id (first-appearance order), each sorted by timestamp.
inline std::vector<std::pair<std::string, PredictionSeries>> to_loops(std::vector<PredictionRow> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<PredictionRow>> by_loop;
  for (auto& p : rows) {
    if (!by_loop.count(p.loop_id)) order.push_back(p.loop_id);
    by_loop[p.loop_id].push_back(std::move(p));
  }
  std::vector<std::pair<std::string, PredictionSeries>> out;
  for (const auto& id : order) {
    auto& v = by_loop[id];
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::vector<int> truth, pred;
    for (const auto& p : v) {
      truth.push_back(p.truth);
      pred.push_back(p.predicted);
    }
    PredictionSeries s;
    try {
      s = PredictionSeries::from(std::move(truth), std::move(pred));
    } catch (const Error& e) {
      fail(e.kind(), "loop " + id + ": " + e.what());
    }
    out.emplace_back(id, std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature lists: one name per line
// ---------------------------------------------------------------------------

inline std::string feature_list_text(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += n + '\n';
  return out;
}

inline std::vector<std::string> parse_feature_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Score grid and per-machine reports
// ---------------------------------------------------------------------------

inline std::string score_grid_csv(const std::vector<ScoreRow>& rows) {
  std::string out = "name,kind,train_accuracy,train_s,train_c,test_accuracy,test_s,test_c\n";
  for (const auto& r : rows)
    out += join_line({r.name, r.kind, format_double(r.train.accuracy), format_double(r.train.s),
                      format_double(r.train.c), format_double(r.test.accuracy), format_double(r.test.s),
                      format_double(r.test.c)});
  return out;
}

inline std::vector<ScoreRow> parse_score_grid(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty score grid");
  r.expect_header(f, {"name", "kind", "train_accuracy", "train_s", "train_c", "test_accuracy", "test_s", "test_c"});
  std::vector<ScoreRow> out;
  while (r.next(f)) {
    r.expect_width(f, 8);
    ScoreRow s;
    s.name = std::string(f[0]);
    s.kind = std::string(f[1]);
    s.train = {r.number(f[2], "train_accuracy"), r.number(f[3], "train_s"), r.number(f[4], "train_c")};
    s.test = {r.number(f[5], "test_accuracy"), r.number(f[6], "test_s"), r.number(f[7], "test_c")};
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string machine_report_header() {
  return "candidate,split,machine_id,faulty,samples,accuracy,s,c,c1,c2,c3\n";
}

inline std::string machine_report_lines(const std::string& candidate, const std::string& split,
                                        const EvaluationReport& rep) {
  std::string out;
  for (const auto& m : rep.machines)
    out += join_line({candidate, split, m.machine_id, m.faulty ? "1" : "0", std::to_string(m.samples),
                      format_double(m.accuracy), m.s ? format_double(*m.s) : "", format_double(m.c),
                      format_double(m.c1), format_double(m.c2), format_double(m.c3)});
  return out;
}

// ---------------------------------------------------------------------------
// Box statistics: feature,label,count,min,q1,median,q3,max,whisker_low,whisker_high,outliers
// (outliers separated by ';')
// ---------------------------------------------------------------------------

inline std::string boxplot_csv(const BoxplotExport& ex) {
  std::string out = "feature,label,count,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n";
  for (const auto& b : ex.boxes) {
    std::string outl;
    for (std::size_t i = 0; i < b.outliers.size(); ++i) {
      if (i) outl += ';';
      outl += format_double(b.outliers[i]);
    }
    out += join_line({b.feature, std::to_string(b.label), std::to_string(b.count), format_double(b.min),
                      format_double(b.q1), format_double(b.median), format_double(b.q3), format_double(b.max),
                      format_double(b.whisker_low), format_double(b.whisker_high), outl});
  }
  return out;
}

inline BoxplotExport parse_boxplot_csv(std::string text, const std::string& source) {
  CsvReader r(std::move(text), source);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.error("empty box statistics");
  r.expect_header(f, {"feature", "label", "count", "min", "q1", "median", "q3", "max", "whisker_low",
                      "whisker_high", "outliers"});
  BoxplotExport ex;
  while (r.next(f)) {
    r.expect_width(f, 11);
    BoxStats b;
    b.feature = std::string(f[0]);
    b.label = r.integer(f[1], "label");
    b.count = static_cast<std::size_t>(r.integer(f[2], "count"));
    b.min = r.number(f[3], "min");
    b.q1 = r.number(f[4], "q1");
    b.median = r.number(f[5], "median");
    b.q3 = r.number(f[6], "q3");
    b.max = r.number(f[7], "max");
    b.whisker_low = r.number(f[8], "whisker_low");
    b.whisker_high = r.number(f[9], "whisker_high");
    std::string_view rest = f[10];
    while (!rest.empty()) {
      const std::size_t semi = rest.find(';');
      b.outliers.push_back(r.number(rest.substr(0, semi), "outlier"));
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
    ex.boxes.push_back(std::move(b));
  }
  return ex;
}

}  // namespace rotorprog::io
