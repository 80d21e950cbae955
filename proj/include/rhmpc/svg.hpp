#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rhmpc/error.hpp"

namespace rhmpc {

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // NaN entries break the polyline
};

/**
 * Minimal SVG line chart: one panel, linear axes, a legend, five ticks per
 * axis. Output depends only on the data, so reruns are byte-identical.
 */
class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add(LineSeries s) {
    if (s.x.size() != s.y.size()) throw Error(ErrorCode::DimensionMismatch, "series x and y differ in length");
    series_.push_back(std::move(s));
  }

  void write(std::ostream& out) const {
    double x0 = kInfD, x1 = -kInfD, y0 = kInfD, y1 = -kInfD;
    for (const auto& s : series_)
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
      }
    if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5 * std::max(1.0, std::abs(y0)), y1 += 0.5 * std::max(1.0, std::abs(y1));
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;

    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * kPlotW; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * kPlotH; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\"" << kPlotH
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
      out << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + kPlotH + 16 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
      out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
      out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + kPlotW << "\" y1=\"" << num(py(yv)) << "\" y2=\""
          << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
    }
    out << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 8 << "\" text-anchor=\"middle\">"
        << escape(x_label_) << "</text>\n";
    out << "<text x=\"14\" y=\"" << kTop + kPlotH / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << kTop + kPlotH / 2 << ")\">" << escape(y_label_) << "</text>\n";

    for (size_t s = 0; s < series_.size(); ++s) {
      const auto& ser = series_[s];
      const char* color = kPalette[s % kPaletteSize];
      std::string pts;
      auto flush = [&]() {
        if (!pts.empty())
          out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
              << "\"/>\n";
        pts.clear();
      };
      for (size_t i = 0; i < ser.x.size(); ++i) {
        if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += num(px(ser.x[i])) + "," + num(py(ser.y[i]));
      }
      flush();
      const int ly = kTop + 14 + 16 * static_cast<int>(s);
      out << "<line x1=\"" << kLeft + kPlotW - 150 << "\" x2=\"" << kLeft + kPlotW - 130 << "\" y1=\"" << ly - 4
          << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << kLeft + kPlotW - 125 << "\" y=\"" << ly << "\">" << escape(ser.name) << "</text>\n";
    }
    out << "</svg>\n";
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
    write(out);
  }

 private:
  static constexpr double kInfD = std::numeric_limits<double>::infinity();
  static constexpr int kWidth = 720, kHeight = 400, kLeft = 80, kTop = 34, kPlotW = 610, kPlotH = 320;
  static constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  static constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

  std::string title_, x_label_, y_label_;
  std::vector<LineSeries> series_;

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }
};

}  // namespace rhmpc
