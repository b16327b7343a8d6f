#pragma once

// Standalone log-log SVG figures: one polyline per series, a legend, and the
// fitted log-log slope of every series printed next to its label.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/slope_fit.hpp"

namespace polyak::io {

enum class PlotKind { RadiusVsN, ItersVsN, PopulationConvergence };

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::RadiusVsN: return "radius_vs_n";
    case PlotKind::ItersVsN: return "iters_vs_n";
    case PlotKind::PopulationConvergence: return "population_convergence";
  }
  return "unknown";
}

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "radius_vs_n") return PlotKind::RadiusVsN;
  if (s == "iters_vs_n") return PlotKind::ItersVsN;
  if (s == "population_convergence") return PlotKind::PopulationConvergence;
  throw ConfigError("unknown plot kind '" + s + "' (expected radius_vs_n, iters_vs_n or population_convergence)");
}

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  PlotKind kind = PlotKind::RadiusVsN;
  std::string title;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
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

inline std::pair<const char*, const char*> axis_labels(PlotKind k) {
  switch (k) {
    case PlotKind::RadiusVsN: return {"sample size n", "min_k |theta^k - theta*|"};
    case PlotKind::ItersVsN: return {"sample size n", "iterations to radius"};
    case PlotKind::PopulationConvergence: return {"iteration t", "|theta^t - theta*|"};
  }
  return {"x", "y"};
}

/// Power-of-ten superscript label, e.g. 1e-3 -> "10^-3".
inline std::string decade_label(int e) { return "10^" + std::to_string(e); }

}  // namespace detail

/// Fitted log-log slope of one series; DomainError if it cannot be drawn or fitted.
inline SlopeFit series_slope(const PlotSeries& s) {
  if (s.points.size() < 2) throw DomainError("series '" + s.label + "': need at least 2 points to fit a slope");
  for (const auto& [x, y] : s.points)
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw DomainError("series '" + s.label + "': log-log plot needs strictly positive finite points");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : s.points) {
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  if (lx.size() == 2) {  // exact line through two points
    if (lx[0] == lx[1]) throw DomainError("series '" + s.label + "': points share one x value");
    SlopeFit f;
    f.slope = (ly[1] - ly[0]) / (lx[1] - lx[0]);
    f.intercept = ly[0] - f.slope * lx[0];
    f.r_squared = 1.0;
    return f;
  }
  try {
    return fit_line(lx, ly);
  } catch (const FitError& e) {
    throw DomainError("series '" + s.label + "': " + e.what());
  }
}

inline std::string render_svg(const PlotSpec& spec) {
  if (spec.series.empty()) throw DomainError("plot: no series");
  std::vector<SlopeFit> fits;
  for (const auto& s : spec.series) fits.push_back(series_slope(s));

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : spec.series)
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, std::log10(x));
      x_hi = std::max(x_hi, std::log10(x));
      y_lo = std::min(y_lo, std::log10(y));
      y_hi = std::max(y_hi, std::log10(y));
    }
  auto pad = [](double& lo, double& hi) {
    if (hi - lo < 1e-9) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  };
  pad(x_lo, x_hi);
  pad(y_lo, y_hi);

  constexpr double W = 720, H = 480, L = 90, R = 230, T = 50, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double lx) { return L + (lx - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double ly) { return T + (y_hi - ly) / (y_hi - y_lo) * ph; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};
  const auto [xlab, ylab] = detail::axis_labels(spec.kind);
  const std::string title = spec.title.empty() ? to_string(spec.kind) : spec.title;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L + pw / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Decade ticks with light grid lines.
  for (int e = static_cast<int>(std::ceil(x_lo)); e <= static_cast<int>(std::floor(x_hi)); ++e) {
    const std::string X = detail::fmt("%.2f", px(e));
    o << "<line x1=\"" << X << "\" y1=\"" << T << "\" x2=\"" << X << "\" y2=\"" << T + ph
      << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << X << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">" << detail::decade_label(e)
      << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(y_lo)); e <= static_cast<int>(std::floor(y_hi)); ++e) {
    const std::string Y = detail::fmt("%.2f", py(e));
    o << "<line x1=\"" << L << "\" y1=\"" << Y << "\" x2=\"" << L + pw << "\" y2=\"" << Y
      << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << L - 8 << "\" y=\"" << Y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
      << detail::decade_label(e) << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << xlab << " (log)</text>\n";
  o << "<text transform=\"translate(24," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << ylab
    << " (log)</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    const char* color = kColors[i % (sizeof kColors / sizeof *kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k)
      o << (k ? " " : "") << detail::fmt("%.2f", px(std::log10(s.points[k].first))) << ','
        << detail::fmt("%.2f", py(std::log10(s.points[k].second)));
    o << "\"/>\n";
    for (const auto& [x, y] : s.points)
      o << "<circle cx=\"" << detail::fmt("%.2f", px(std::log10(x))) << "\" cy=\""
        << detail::fmt("%.2f", py(std::log10(y))) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 16 + 22.0 * static_cast<double>(i);
    const double lx = L + pw + 16;
    o << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << lx + 28 << "\" y=\"" << ly << "\" dominant-baseline=\"middle\">"
      << detail::xml_escape(s.label) << " (slope=" << detail::fmt("%.2f", fits[i].slope) << ")</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void emit_plot(const PlotSpec& spec, const std::string& path) {
  const std::string svg = render_svg(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace polyak::io
