#include "siclab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "siclab/dsp.hpp"

namespace siclab::plot {
namespace {

constexpr double kWidth = 760, kHeight = 460;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                               "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_svg(const Figure& fig) {
  auto ty = [&](double v) { return fig.log_y ? (v > 0 ? std::log10(v) : std::nan("")) : v; };
  Range xr, yr, y2r;
  bool any_secondary = false;
  for (const auto& s : fig.series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) (s.secondary_axis ? y2r : yr).add(s.secondary_axis ? y : ty(y));
    any_secondary |= s.secondary_axis;
  }
  for (double h : fig.hlines) yr.add(ty(h));
  if (fig.y_range) {
    yr.lo = ty(fig.y_range->first);
    yr.hi = ty(fig.y_range->second);
  }
  xr.finish();
  yr.finish();
  y2r.finish();
  if (fig.log_y) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::ceil(yr.hi);
    if (yr.hi - yr.lo < 1) yr.hi = yr.lo + 1;
  }

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y, const Range& r) { return kTop + ph - (y - r.lo) / (r.hi - r.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(fig.title) << "</text>\n";
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  // x ticks
  const double xs = nice_step(xr.hi - xr.lo);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
      << num(kTop) << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
      << label(std::abs(t) < 1e-12 ? 0.0 : t) << "</text>\n";
  }
  // y ticks
  const double ys = fig.log_y ? 1.0 : nice_step(yr.hi - yr.lo);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t, yr)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
      << num(py(t, yr)) << "\" stroke=\"#e0e0e0\"/>\n";
    const std::string text = fig.log_y ? "1e" + label(t) : label(std::abs(t) < 1e-12 ? 0.0 : t);
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t, yr) + 4) << "\" text-anchor=\"end\">" << text
      << "</text>\n";
  }
  if (any_secondary) {
    const double s2 = nice_step(y2r.hi - y2r.lo);
    for (double t = std::ceil(y2r.lo / s2) * s2; t <= y2r.hi + 1e-9 * s2; t += s2)
      o << "<text x=\"" << num(kLeft + pw + 6) << "\" y=\"" << num(py(t, y2r) + 4) << "\">"
        << label(std::abs(t) < 1e-12 ? 0.0 : t) << "</text>\n";
    o << "<text transform=\"translate(" << num(kLeft + pw + 48) << "," << num(kTop + ph / 2)
      << ") rotate(90)\" text-anchor=\"middle\">" << escape(fig.y2_label) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14) << "\" text-anchor=\"middle\">"
    << escape(fig.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(fig.y_label) << "</text>\n";

  for (double h : fig.hlines) {
    const double y = py(ty(h), yr);
    o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(y)
      << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  }

  o << "<g clip-path=\"none\">\n";
  for (std::size_t i = 0; i < fig.series.size(); ++i) {
    const auto& s = fig.series[i];
    const char* color = kColors[i % std::size(kColors)];
    const Range& r = s.secondary_axis ? y2r : yr;
    std::string points;
    auto flush = [&] {
      if (points.empty()) return;
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (s.dashed || s.secondary_axis ? " stroke-dasharray=\"4,3\"" : "") << " points=\"" << points << "\"/>\n";
      points.clear();
    };
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double yv = s.secondary_axis ? s.y[k] : ty(s.y[k]);
      if (!std::isfinite(s.x[k]) || !std::isfinite(yv)) {
        flush();
        continue;
      }
      const double yc = std::clamp(py(yv, r), kTop, kTop + ph);
      if (!points.empty()) points += ' ';
      points += num(px(s.x[k])) + "," + num(yc);
    }
    flush();
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    const double lx = kLeft + pw + (any_secondary ? 70 : 12);
    o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20) << "\" y2=\"" << num(ly)
      << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (s.dashed || s.secondary_axis ? " stroke-dasharray=\"4,3\"" : "") << "/>\n";
    o << "<text x=\"" << num(lx + 25) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const Figure& fig) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << render_svg(fig);
  if (!f) throw Error("write failed for " + path);
}

}  // namespace siclab::plot
