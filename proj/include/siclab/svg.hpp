#pragma once

// Minimal deterministic SVG line plots.

#include <optional>
#include <string>
#include <vector>

namespace siclab::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool secondary_axis = false;
  bool dashed = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string y2_label;
  bool log_y = false;
  std::vector<Series> series;
  /// Horizontal dashed reference lines on the primary axis.
  std::vector<double> hlines;
  std::optional<std::pair<double, double>> y_range;
};

std::string render_svg(const Figure& fig);
void write_svg(const std::string& path, const Figure& fig);

}  // namespace siclab::plot
