#pragma once

#include <string>
#include <utility>
#include <vector>

namespace logeuc {

struct SvgSeries {
  std::string name;
  std::string color;  // e.g. "#1f77b4"
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // (x, y), plotted in order
};

/// Self-contained polyline chart, 860x520, legend on the right. With log_x
/// the x axis is log-scaled and ticks sit at the distinct data x values.
/// Output is a pure function of the inputs (fixed decimal formatting), so
/// identical calls give identical bytes.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              bool log_x);

}  // namespace logeuc
