#pragma once

#include <string>
#include <vector>

namespace osgcli {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Minimal standalone SVG line chart.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace osgcli
