#pragma once

// Static plot emission: two-column whitespace-separated series files and a
// self-contained SVG with one or more panels side by side.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "jpq/error.hpp"

namespace jpq {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct PlotPanel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  bool equal_aspect = false;
};

namespace plot_detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

// Tick step of 1, 2 or 5 times a power of ten giving about `target` ticks.
inline double nice_step(double range, int target = 5) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  return colors[i % 5];
}

}  // namespace plot_detail

/// Two columns "x y" per line, preceded by a '#' comment naming them.
inline std::string format_series_dat(const std::string& xname, const std::string& yname,
                                     const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "format_series_dat: x and y lengths differ");
  std::string s = "# " + xname + " " + yname + "\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    s += plot_detail::fmt("%.17g", x[i]) + " " + plot_detail::fmt("%.17g", y[i]) + "\n";
  return s;
}

inline std::string render_svg(const std::vector<PlotPanel>& panels) {
  using namespace plot_detail;
  require(!panels.empty(), "render_svg: no panels");
  constexpr double pw = 420, ph = 340, ml = 80, mr = 20, mt = 36, mb = 56;
  const double width = pw * static_cast<double>(panels.size());
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) + "\" height=\"" +
       fmt("%.0f", ph) + "\" viewBox=\"0 0 " + fmt("%.0f", width) + " " + fmt("%.0f", ph) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const PlotPanel& p = panels[pi];
    const double ox = pw * static_cast<double>(pi);
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& se : p.series) {
      require(se.x.size() == se.y.size(), "render_svg: series length mismatch");
      for (std::size_t i = 0; i < se.x.size(); ++i) {
        if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
        x0 = std::min(x0, se.x[i]);
        x1 = std::max(x1, se.x[i]);
        y0 = std::min(y0, se.y[i]);
        y1 = std::max(y1, se.y[i]);
      }
    }
    if (!(x1 >= x0)) x0 = 0, x1 = 1;
    if (!(y1 >= y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double padx = 0.04 * (x1 - x0), pady = 0.06 * (y1 - y0);
    x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
    const double aw = pw - ml - mr, ah = ph - mt - mb;
    if (p.equal_aspect) {
      const double sx = (x1 - x0) / aw, sy = (y1 - y0) / ah;
      if (sx > sy) {
        const double c = 0.5 * (y0 + y1), h = 0.5 * sx * ah;
        y0 = c - h, y1 = c + h;
      } else {
        const double c = 0.5 * (x0 + x1), h = 0.5 * sy * aw;
        x0 = c - h, x1 = c + h;
      }
    }
    auto X = [&](double v) { return ox + ml + (v - x0) / (x1 - x0) * aw; };
    auto Y = [&](double v) { return mt + (y1 - v) / (y1 - y0) * ah; };

    s += "<g>\n<text x=\"" + fmt("%.1f", ox + ml + aw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" +
         escape(p.title) + "</text>\n";
    s += "<rect x=\"" + fmt("%.1f", ox + ml) + "\" y=\"" + fmt("%.1f", mt) + "\" width=\"" + fmt("%.1f", aw) +
         "\" height=\"" + fmt("%.1f", ah) + "\" fill=\"none\" stroke=\"black\"/>\n";
    const double xs = nice_step(x1 - x0), ys = nice_step(y1 - y0);
    for (double t = std::ceil(x0 / xs) * xs; t <= x1; t += xs) {
      const double px = X(t);
      s += "<line x1=\"" + fmt("%.1f", px) + "\" y1=\"" + fmt("%.1f", mt + ah) + "\" x2=\"" + fmt("%.1f", px) +
           "\" y2=\"" + fmt("%.1f", mt + ah + 4) + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + fmt("%.1f", px) + "\" y=\"" + fmt("%.1f", mt + ah + 16) + "\" text-anchor=\"middle\">" +
           fmt("%.4g", std::abs(t) < 1e-12 * xs ? 0.0 : t) + "</text>\n";
    }
    for (double t = std::ceil(y0 / ys) * ys; t <= y1; t += ys) {
      const double py = Y(t);
      s += "<line x1=\"" + fmt("%.1f", ox + ml - 4) + "\" y1=\"" + fmt("%.1f", py) + "\" x2=\"" +
           fmt("%.1f", ox + ml) + "\" y2=\"" + fmt("%.1f", py) + "\" stroke=\"black\"/>\n";
      s += "<text x=\"" + fmt("%.1f", ox + ml - 6) + "\" y=\"" + fmt("%.1f", py + 4) + "\" text-anchor=\"end\">" +
           fmt("%.4g", std::abs(t) < 1e-12 * ys ? 0.0 : t) + "</text>\n";
    }
    s += "<text x=\"" + fmt("%.1f", ox + ml + aw / 2) + "\" y=\"" + fmt("%.1f", ph - 12) +
         "\" text-anchor=\"middle\">" + escape(p.xlabel) + "</text>\n";
    s += "<text transform=\"translate(" + fmt("%.1f", ox + 16) + "," + fmt("%.1f", mt + ah / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(p.ylabel) + "</text>\n";

    for (std::size_t si = 0; si < p.series.size(); ++si) {
      const PlotSeries& se = p.series[si];
      const char* col = palette(si);
      if (se.markers) {
        for (std::size_t i = 0; i < se.x.size(); ++i) {
          if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
          s += "<circle cx=\"" + fmt("%.2f", X(se.x[i])) + "\" cy=\"" + fmt("%.2f", Y(se.y[i])) +
               "\" r=\"1.8\" fill=\"" + col + "\"/>\n";
        }
      } else {
        s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.4\" points=\"";
        for (std::size_t i = 0; i < se.x.size(); ++i) {
          if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
          s += fmt("%.2f", X(se.x[i])) + "," + fmt("%.2f", Y(se.y[i])) + " ";
        }
        s += "\"/>\n";
      }
      if (!se.label.empty()) {
        const double ly = mt + 14 + 14 * static_cast<double>(si);
        s += "<rect x=\"" + fmt("%.1f", ox + ml + aw - 110) + "\" y=\"" + fmt("%.1f", ly - 8) +
             "\" width=\"10\" height=\"8\" fill=\"" + col + "\"/>\n";
        s += "<text x=\"" + fmt("%.1f", ox + ml + aw - 96) + "\" y=\"" + fmt("%.1f", ly) + "\">" +
             escape(se.label) + "</text>\n";
      }
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace jpq
