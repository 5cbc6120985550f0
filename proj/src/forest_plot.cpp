#include "bookend/forest_plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace bookend {

std::vector<ForestRow> forest_rows(const Dataset& data, const std::vector<const FitResult*>& fits,
                                   const ForestStyle& style) {
  std::vector<ForestRow> rows;
  for (const auto& e : observed_effects(data)) {
    const auto ci = e.estimate.ci95();
    rows.push_back({"Study " + e.study_id, e.estimate.log_or, ci.lower, ci.upper, style.study_color, false});
  }
  for (const FitResult* f : fits) {
    if (!f) continue;
    const auto& d = f->effect();
    std::string label;
    std::string color;
    switch (f->model.kind) {
      case ModelKind::StandardFE:
        label = "Standard FE";
        color = style.fe_color;
        break;
      case ModelKind::StandardRE:
        label = "Standard RE";
        color = style.re_color;
        break;
      case ModelKind::Bookend:
        label = "Bookend";
        color = style.bookend_color;
        break;
    }
    rows.push_back({label, d.mean, d.q025, d.q975, color, true});
  }
  return rows;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_forest_svg(const std::vector<ForestRow>& rows, const ForestStyle& style) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.lower);
    hi = std::max(hi, r.upper);
  }
  const double pad = 0.05 * std::max(hi - lo, 0.1);
  lo = std::floor((lo - pad) * 10.0) / 10.0;
  hi = std::ceil((hi + pad) * 10.0) / 10.0;

  const double left = 170.0;
  const double right = static_cast<double>(style.width) - 170.0;
  const double top = 30.0;
  const double rh = style.row_height;
  const double plot_bottom = top + rh * static_cast<double>(rows.size());
  const double height = plot_bottom + 60.0;
  const auto xmap = [&](double v) { return left + (v - lo) / (hi - lo) * (right - left); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << height
      << "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"13\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  svg << "<line x1=\"" << xmap(0.0) << "\" y1=\"" << top - 10.0 << "\" x2=\"" << xmap(0.0) << "\" y2=\""
      << plot_bottom << "\" stroke=\"black\" stroke-dasharray=\"4,3\"/>\n";

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double y = top + rh * (static_cast<double>(i) + 0.5);
    svg << "<text x=\"10\" y=\"" << y + 4.0 << "\"" << (r.pooled ? " font-weight=\"bold\"" : "") << ">"
        << escape(r.label) << "</text>\n";
    svg << "<line x1=\"" << xmap(r.lower) << "\" y1=\"" << y << "\" x2=\"" << xmap(r.upper) << "\" y2=\"" << y
        << "\" stroke=\"" << r.color << "\" stroke-width=\"2\"/>\n";
    if (r.pooled)
      svg << "<polygon points=\"" << xmap(r.estimate) - 6.0 << ',' << y << ' ' << xmap(r.estimate) << ','
          << y - 6.0 << ' ' << xmap(r.estimate) + 6.0 << ',' << y << ' ' << xmap(r.estimate) << ',' << y + 6.0
          << "\" fill=\"" << r.color << "\"/>\n";
    else
      svg << "<rect x=\"" << xmap(r.estimate) - 4.0 << "\" y=\"" << y - 4.0 << "\" width=\"8\" height=\"8\" fill=\""
          << r.color << "\"/>\n";
    std::ostringstream label;
    label << std::fixed << std::setprecision(3) << r.estimate << " (" << r.lower << ", " << r.upper << ")";
    svg << "<text x=\"" << right + 12.0 << "\" y=\"" << y + 4.0 << "\">" << label.str() << "</text>\n";
  }

  svg << "<line x1=\"" << left << "\" y1=\"" << plot_bottom << "\" x2=\"" << right << "\" y2=\"" << plot_bottom
      << "\" stroke=\"black\"/>\n";
  const int first_tick = static_cast<int>(std::ceil(lo * 10.0 - 1e-9));
  const int last_tick = static_cast<int>(std::floor(hi * 10.0 + 1e-9));
  const int stride = std::max(1, (last_tick - first_tick) / 8);
  for (int t = first_tick; t <= last_tick; t += stride) {
    const double v = t / 10.0;
    svg << "<line x1=\"" << xmap(v) << "\" y1=\"" << plot_bottom << "\" x2=\"" << xmap(v) << "\" y2=\""
        << plot_bottom + 5.0 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << xmap(v) << "\" y=\"" << plot_bottom + 19.0 << "\" text-anchor=\"middle\">"
        << std::setprecision(1) << v << std::setprecision(2) << "</text>\n";
  }
  svg << "<text x=\"" << 0.5 * (left + right) << "\" y=\"" << plot_bottom + 42.0
      << "\" text-anchor=\"middle\">log odds ratio</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bookend
