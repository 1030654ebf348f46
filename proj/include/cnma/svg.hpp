#pragma once

#include <string>
#include <vector>

namespace cnma {

struct ForestRow {
  std::string label;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Fixed three-decimal rendering; negative zero prints as 0.000.
std::string format_3dp(double value);

/// Standalone SVG forest plot: one row per entry with a point, its
/// interval, a reference line at zero and the numbers printed alongside.
std::string forest_svg(const std::vector<ForestRow>& rows, const std::string& title,
                       const std::string& axis_label);

}  // namespace cnma
