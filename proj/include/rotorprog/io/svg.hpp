#pragma once

// Hand-written SVG charts. Geometry is fixed so identical inputs give
// byte-identical files; see docs/formats.md.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rotorprog/cascade.hpp"
#include "rotorprog/dataset.hpp"
#include "rotorprog/selection.hpp"

namespace rotorprog::io {

namespace svg {

inline constexpr const char* kPalette[] = {"#4e79a7", "#e15759", "#59a14f", "#f28e2b", "#b07aa1"};

inline std::string num(double v) {
  // two decimals is plenty for pixel coordinates
  return format_double(std::round(v * 100.0) / 100.0);
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
         std::to_string(size) + "\">" + escape(s) + "</text>\n";
}

inline std::string line(double x1, double y1, double x2, double y2, const char* stroke = "black") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"" + stroke + "\"/>\n";
}

inline std::string rect(double x, double y, double w, double h, const char* fill, const char* stroke = "black") {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

/// Maps [lo, hi] onto [bottom, top] pixels; a flat range is widened by 1.
struct Scale {
  double lo, hi, bottom, top;
  Scale(double l, double h, double b, double t) : lo(l), hi(h), bottom(b), top(t) {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double operator()(double v) const { return bottom - (v - lo) / (hi - lo) * (bottom - top); }
};

/// One box at horizontal centre `cx` with half-width `hw`.
inline std::string box(const BoxStats& b, const Scale& y, double cx, double hw, const char* fill) {
  std::string o;
  o += line(cx, y(b.whisker_low), cx, y(b.q1));
  o += line(cx, y(b.q3), cx, y(b.whisker_high));
  o += line(cx - hw / 2, y(b.whisker_low), cx + hw / 2, y(b.whisker_low));
  o += line(cx - hw / 2, y(b.whisker_high), cx + hw / 2, y(b.whisker_high));
  o += rect(cx - hw, y(b.q3), 2 * hw, std::max(0.5, y(b.q1) - y(b.q3)), fill);
  o += line(cx - hw, y(b.median), cx + hw, y(b.median));
  for (double v : b.outliers)
    o += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(y(v)) + "\" r=\"1.5\" fill=\"none\" stroke=\"black\"/>\n";
  return o;
}

}  // namespace svg

/// Panels of per-class boxes, one panel per feature, 4 panels per row.
/// Each panel has its own vertical scale.
inline std::string boxplot_svg(const BoxplotExport& ex, const std::string& title,
                               const std::map<int, std::string>& class_names) {
  std::vector<std::string> features;
  for (const auto& b : ex.boxes)
    if (std::find(features.begin(), features.end(), b.feature) == features.end()) features.push_back(b.feature);
  const double pw = 180, ph = 200, top = 40;
  const std::size_t cols = 4;
  const std::size_t rows = std::max<std::size_t>(1, (features.size() + cols - 1) / cols);
  const double width = pw * static_cast<double>(cols);
  const double height = top + ph * static_cast<double>(rows) + 10;
  std::string o = svg::open(width, height);
  o += svg::text(width / 2, 22, title, "middle", 14);
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double x0 = pw * static_cast<double>(f % cols);
    const double y0 = top + ph * static_cast<double>(f / cols);
    std::vector<const BoxStats*> boxes;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& b : ex.boxes)
      if (b.feature == features[f]) {
        boxes.push_back(&b);
        lo = std::min(lo, b.min);
        hi = std::max(hi, b.max);
      }
    const svg::Scale y(lo, hi, y0 + ph - 30, y0 + 25);
    o += svg::rect(x0 + 35, y0 + 20, pw - 45, ph - 45, "none", "#999999");
    o += svg::text(x0 + pw / 2, y0 + 14, features[f]);
    o += svg::text(x0 + 32, y.top + 4, svg::num(y.hi), "end", 9);
    o += svg::text(x0 + 32, y.bottom + 4, svg::num(y.lo), "end", 9);
    const double slot = (pw - 45) / static_cast<double>(boxes.size());
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const double cx = x0 + 35 + slot * (static_cast<double>(k) + 0.5);
      const auto it = class_names.find(boxes[k]->label);
      const std::string name = it == class_names.end() ? std::to_string(boxes[k]->label) : it->second;
      o += svg::box(*boxes[k], y, cx, std::min(18.0, slot * 0.3), svg::kPalette[static_cast<std::size_t>(boxes[k]->label) % 5]);
      o += svg::text(cx, y0 + ph - 12, name, "middle", 10);
    }
  }
  o += "</svg>\n";
  return o;
}

/// Test accuracy, S and C per candidate as grouped bars, in the given row order.
inline std::string score_bars_svg(const std::vector<ScoreRow>& rows, const std::string& title) {
  const double left = 50, right = 20, top = 50, plot_h = 260, bottom_pad = 70;
  const double group_w = 66;
  const double width = left + right + group_w * static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  const double height = top + plot_h + bottom_pad;
  double lo = 0.0;
  for (const auto& r : rows)
    for (double v : {r.test.accuracy, r.test.s, r.test.c})
      if (std::isfinite(v)) lo = std::min(lo, std::floor(v * 10.0) / 10.0);
  const svg::Scale y(lo, 1.0, top + plot_h, top);
  std::string o = svg::open(width, height);
  o += svg::text(width / 2, 22, title, "middle", 14);
  const char* series[] = {"accuracy", "S", "C"};
  for (int k = 0; k < 3; ++k) {
    const double lx = left + 100.0 * k;
    o += svg::rect(lx, 32, 10, 10, svg::kPalette[k], "none");
    o += svg::text(lx + 14, 41, series[k], "start");
  }
  for (int t = 0; t <= 10; ++t) {
    const double v = lo + (1.0 - lo) * t / 10.0;
    o += svg::line(left - 4, y(v), width - right, y(v), "#dddddd");
    o += svg::text(left - 6, y(v) + 4, svg::num(v), "end", 9);
  }
  o += svg::line(left, y(lo), left, y(1.0));
  const double zero = y(std::max(lo, 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double gx = left + group_w * static_cast<double>(i);
    const double vals[] = {rows[i].test.accuracy, rows[i].test.s, rows[i].test.c};
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(vals[k])) continue;
      const double x = gx + 6 + 18.0 * k;
      const double yv = y(vals[k]);
      o += svg::rect(x, std::min(yv, zero), 16, std::max(0.5, std::abs(zero - yv)), svg::kPalette[k], "none");
    }
    const double cx = gx + group_w / 2;
    const double cy = top + plot_h + 14;
    o += "<text x=\"" + svg::num(cx) + "\" y=\"" + svg::num(cy) + "\" text-anchor=\"end\" font-size=\"10\" transform=\"rotate(-40 " +
         svg::num(cx) + " " + svg::num(cy) + ")\">" + svg::escape(rows[i].name) + "</text>\n";
  }
  o += svg::line(left, zero, width - right, zero);
  o += "</svg>\n";
  return o;
}

/// Box of each test score across cascade vs ternary candidates.
inline std::string score_boxes_svg(const std::vector<ScoreRow>& rows, const std::string& title) {
  const char* metrics[] = {"accuracy", "S", "C"};
  const char* kinds[] = {"ternary", "cascade"};
  std::vector<BoxStats> boxes;
  double lo = INFINITY, hi = -INFINITY;
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 2; ++k) {
      std::vector<double> v;
      for (const auto& r : rows) {
        if (r.kind != kinds[k]) continue;
        const double x = m == 0 ? r.test.accuracy : m == 1 ? r.test.s : r.test.c;
        if (std::isfinite(x)) v.push_back(x);
      }
      BoxStats b;
      if (!v.empty()) {
        b = box_stats(v);
        lo = std::min(lo, b.min);
        hi = std::max(hi, b.max);
      }
      b.feature = metrics[m];
      b.label = k;
      boxes.push_back(b);
    }
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  const double width = 460, height = 320, left = 50, top = 50, plot_h = 220;
  const svg::Scale y(lo, hi, top + plot_h, top);
  std::string o = svg::open(width, height);
  o += svg::text(width / 2, 22, title, "middle", 14);
  for (int k = 0; k < 2; ++k) {
    o += svg::rect(left + 110.0 * k, 32, 10, 10, svg::kPalette[k], "none");
    o += svg::text(left + 110.0 * k + 14, 41, kinds[k], "start");
  }
  o += svg::text(left - 6, y(hi) + 4, svg::num(hi), "end", 9);
  o += svg::text(left - 6, y(lo) + 4, svg::num(lo), "end", 9);
  o += svg::line(left, y(lo), left, y(hi));
  const double group_w = (width - left - 20) / 3.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto m = i / 2, k = i % 2;
    const double cx = left + group_w * (static_cast<double>(m) + 0.3 + 0.4 * static_cast<double>(k));
    if (boxes[i].count > 0) o += svg::box(boxes[i], y, cx, 16, svg::kPalette[k]);
    if (k == 0) o += svg::text(left + group_w * (static_cast<double>(m) + 0.5), top + plot_h + 20, metrics[m]);
  }
  o += "</svg>\n";
  return o;
}

/// Ranked candidates as a Markdown table.
inline std::string ranking_markdown(const std::vector<ScoreRow>& ranked) {
  auto cell = [](double v) { return std::isfinite(v) ? format_double(std::round(v * 1e4) / 1e4) : std::string("n/a"); };
  std::string o = "| rank | model | kind | test S | test C | test accuracy | train S | train C | train accuracy |\n";
  o += "|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    o += "| " + std::to_string(i + 1) + " | " + r.name + " | " + r.kind + " | " + cell(r.test.s) + " | " +
         cell(r.test.c) + " | " + cell(r.test.accuracy) + " | " + cell(r.train.s) + " | " + cell(r.train.c) + " | " +
         cell(r.train.accuracy) + " |\n";
  }
  return o;
}

}  // namespace rotorprog::io
