#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "leoipac/harness.hpp"

namespace leoipac {

inline constexpr const char* kVersion = "0.1.0";

/// "# leo-ipac-sim v<version> schema=1"
std::string csv_header_comment();

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records);

/// One line plot per (axis, metric) with a series per scheme. Returns the
/// paths written.
std::vector<std::string> write_svg_plots(const std::string& dir,
                                         const std::vector<MetricsRecord>& records);

/// Minimal SVG line chart. log_y plots log10 of positive values.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                           bool log_y);

}  // namespace leoipac
