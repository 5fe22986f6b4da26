#pragma once

#include <string>
#include <vector>

namespace tfdlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Log-log line plot with a legend. Points that are not finite and positive
/// break the line instead of being drawn.
std::string render_svg(const Plot& plot);

void write_svg(const std::string& path, const Plot& plot);

}  // namespace tfdlab
