#pragma once

#include <string>
#include <utility>
#include <vector>

namespace pvwatch {

// Minimal SVG emitters for the report plots.
std::string svg_line_chart(const std::vector<std::pair<double, double>>& points,
                           const std::string& title, const std::string& x_label,
                           const std::string& y_label);

std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& series,
                          const std::vector<std::string>& series_names,
                          const std::string& title, const std::string& y_label);

} // namespace pvwatch
