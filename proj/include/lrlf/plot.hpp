#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrlf {

/// One curve with an optional shaded band [lower, upper].
struct PlotSeries {
  std::string label;
  std::vector<double> x, y, lower, upper;
};

struct PlotPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Static SVG with the panels laid out in a grid of `columns` columns.
void write_svg(std::ostream& out, const std::string& title, const std::vector<PlotPanel>& panels, int columns = 1);

}  // namespace lrlf
