#pragma once

#include <string>
#include <vector>

#include "lrbs/lattice.hpp"

namespace lrbs {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with linear axes.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

/// Grey-scale density map of a 1-d or 2-d field (1-d fields become a single strip;
/// for d = 3 the slice at the last coordinate 0 is drawn).
std::string svg_heatmap(const std::string& title, const RealField& field);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace lrbs
