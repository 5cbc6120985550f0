#pragma once

#include <string>
#include <vector>

#include "bookend/meta_core.hpp"
#include "bookend/models.hpp"

namespace bookend {

struct ForestStyle {
  std::string study_color = "#808080";
  std::string fe_color = "#1f4e9c";
  std::string re_color = "#2e8b57";
  std::string bookend_color = "#c0392b";
  int width = 720;
  int row_height = 28;
};

struct ForestRow {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string color;
  bool pooled = false;
};

/// Study rows (observed log OR +/- 1.96 SE) followed by one row per fit
/// (posterior mean and 95% credible interval).
std::vector<ForestRow> forest_rows(const Dataset& data, const std::vector<const FitResult*>& fits,
                                   const ForestStyle& style = {});

/// Static SVG document with a dashed null line at log OR = 0.
std::string render_forest_svg(const std::vector<ForestRow>& rows, const ForestStyle& style = {});

}  // namespace bookend
