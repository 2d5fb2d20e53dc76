#pragma once

// Static SVG line charts from CurveTable CSV.
//
// Column 0 is the x axis. Every other column is a series; a column named
// "quantity@label" is drawn in the panel for `quantity` with legend `label`,
// and columns without '@' share one panel. Panels stack vertically. The
// "axes" metadata entry ("x=log,y=log") selects logarithmic axes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qcd/report.hpp"

namespace qcd::report {

struct PlotPanel {
  std::string quantity;
  std::vector<std::size_t> columns;
  std::vector<std::string> labels;
};

/// Groups series columns into panels in order of first appearance.
inline std::vector<PlotPanel> plot_panels(const CurveTable& t) {
  std::vector<PlotPanel> panels;
  for (std::size_t c = 1; c < t.columns.size(); ++c) {
    const std::string& name = t.columns[c].name;
    const std::size_t at = name.find('@');
    const std::string quantity = at == std::string::npos ? std::string() : name.substr(0, at);
    const std::string label = at == std::string::npos ? name : name.substr(at + 1);
    auto it = std::find_if(panels.begin(), panels.end(), [&](const PlotPanel& p) { return p.quantity == quantity; });
    if (it == panels.end()) {
      panels.push_back({quantity, {}, {}});
      it = std::prev(panels.end());
    }
    it->columns.push_back(c);
    it->labels.push_back(label);
  }
  return panels;
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double norm(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int a = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int b = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      const int stride = std::max(1, (b - a) / 6 + 1);
      for (int e = a; e <= b; e += stride) out.push_back(std::pow(10.0, e));
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
};

inline Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!a.usable(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (hi == lo) {
    if (log) {
      lo /= 10.0;
      hi *= 10.0;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

inline std::string tick_label(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, r.ptr);
}

}  // namespace detail

inline std::string render_svg(const CurveTable& t) {
  if (t.rows.empty()) throw CsvParseError("plot: table has no data rows");
  if (t.columns.size() < 2) throw CsvParseError("plot: need at least one series column");

  const std::string axes = t.meta("axes").value_or("x=linear,y=linear");
  const bool xlog = axes.find("x=log") != std::string::npos;
  const bool ylog = axes.find("y=log") != std::string::npos;
  const auto panels = plot_panels(t);

  constexpr double kWidth = 720, kPanelHeight = 360;
  constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 50;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - kBottom;

  std::vector<double> xs;
  for (const auto& row : t.rows) xs.push_back(row[0]);
  const detail::Axis xaxis = detail::fit_axis(xs, xlog);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kPanelHeight * panels.size() << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title = t.meta("command").value_or("");

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const PlotPanel& panel = panels[p];
    const double y0 = kPanelHeight * p;
    std::vector<double> ys;
    for (const auto& row : t.rows) {
      for (std::size_t c : panel.columns) ys.push_back(row[c]);
    }
    const detail::Axis yaxis = detail::fit_axis(ys, ylog);
    auto px = [&](double v) { return kLeft + plot_w * xaxis.norm(v); };
    auto py = [&](double v) { return y0 + kTop + plot_h * (1.0 - yaxis.norm(v)); };

    os << "<g class=\"panel\">\n";
    os << "<text x=\"" << detail::fixed2(kLeft) << "\" y=\"" << detail::fixed2(y0 + 24) << "\">"
       << detail::xml_escape(title + (panel.quantity.empty() ? "" : ": " + panel.quantity)) << "</text>\n";
    os << "<rect x=\"" << detail::fixed2(kLeft) << "\" y=\"" << detail::fixed2(y0 + kTop) << "\" width=\""
       << detail::fixed2(plot_w) << "\" height=\"" << detail::fixed2(plot_h)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : xaxis.ticks()) {
      os << "<text x=\"" << detail::fixed2(px(v)) << "\" y=\"" << detail::fixed2(y0 + kTop + plot_h + 18)
         << "\" text-anchor=\"middle\">" << detail::tick_label(v) << "</text>\n";
    }
    for (double v : yaxis.ticks()) {
      os << "<text x=\"" << detail::fixed2(kLeft - 6) << "\" y=\"" << detail::fixed2(py(v) + 4)
         << "\" text-anchor=\"end\">" << detail::tick_label(v) << "</text>\n";
    }
    os << "<text x=\"" << detail::fixed2(kLeft + plot_w / 2) << "\" y=\""
       << detail::fixed2(y0 + kPanelHeight - 10) << "\" text-anchor=\"middle\">"
       << detail::xml_escape(t.columns[0].name) << "</text>\n";

    for (std::size_t s = 0; s < panel.columns.size(); ++s) {
      const std::size_t c = panel.columns[s];
      const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
      std::string points;
      auto flush = [&] {
        if (!points.empty()) {
          os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
             << points << "\"/>\n";
          points.clear();
        }
      };
      for (const auto& row : t.rows) {
        if (!xaxis.usable(row[0]) || !yaxis.usable(row[c])) {
          flush();
          continue;
        }
        if (!points.empty()) points += ' ';
        points += detail::fixed2(px(row[0])) + "," + detail::fixed2(py(row[c]));
      }
      flush();
      const double ly = y0 + kTop + 16.0 * s + 8;
      os << "<line x1=\"" << detail::fixed2(kLeft + plot_w + 10) << "\" y1=\"" << detail::fixed2(ly)
         << "\" x2=\"" << detail::fixed2(kLeft + plot_w + 30) << "\" y2=\"" << detail::fixed2(ly)
         << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      os << "<text x=\"" << detail::fixed2(kLeft + plot_w + 34) << "\" y=\"" << detail::fixed2(ly + 4) << "\">"
         << detail::xml_escape(panel.labels[s]) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qcd::report
