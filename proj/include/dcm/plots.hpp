#pragma once

#include "dcm/grid.hpp"

#include <string>
#include <vector>

namespace dcm {

struct Series {
  std::string label;
  Vector x;
  Vector y;
  /// Draw a circle at every point (in addition to the line when size > 1).
  bool markers = false;
};

/// Static SVG line chart (vector only) with axes, ticks and a legend naming
/// every series.
std::string svg_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

void write_svg(const std::string& path, const std::string& svg);

}  // namespace dcm
