#pragma once

#include <string>
#include <vector>

namespace mnlrl {

/// One curve: per-run y values over a shared x grid. Drawn as the mean line
/// plus a min-max band.
struct PlotSeries {
  std::string name;
  std::vector<std::vector<double>> runs;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<PlotSeries> series;
};

/// Self-contained static SVG line chart.
std::string render_svg(const PlotSpec& spec);

}  // namespace mnlrl
