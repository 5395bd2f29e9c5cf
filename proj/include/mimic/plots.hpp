#pragma once

#include <string>
#include <vector>

namespace mimic {

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool dashed = false;
};

// Dependency-free SVG line chart; output is deterministic for fixed input.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series);

void write_series_csv(const std::vector<PlotSeries>& series, const std::string& path);

}  // namespace mimic
