#pragma once
// Minimal standalone SVG line charts.

#include <string>
#include <vector>

namespace sfwm::io {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct FigureStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// One polyline per series, legend entry per labelled series. The root element
/// carries data-y-min / data-y-max with the axis limits actually drawn.
std::string render_figure(const std::vector<Series>& series, const FigureStyle& style);

}  // namespace sfwm::io
