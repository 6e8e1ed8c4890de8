#pragma once

#include "probelab/linalg.hpp"

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace probelab {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  int color = 0;  // 0 / 1, e.g. ground-truth label
  int shade = 0;  // 0 / 1, e.g. distractor id
};

/// Self-contained SVG scatter: hue from `color`, light/dark from `shade`.
inline std::string scatter_svg(const std::vector<ScatterPoint>& points, const std::string& title,
                               const std::string& x_label, const std::string& y_label) {
  constexpr double size = 480.0;
  constexpr double margin = 48.0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!points.empty()) {
    x0 = x1 = points.front().x;
    y0 = y1 = points.front().y;
    for (const auto& p : points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  auto sx = [&](double v) { return margin + (v - x0) / (x1 - x0) * (size - 2 * margin); };
  auto sy = [&](double v) { return size - margin - (v - y0) / (y1 - y0) * (size - 2 * margin); };
  // orange / blue, light and dark variants
  static const char* palette[2][2] = {{"#f5b971", "#d9730d"}, {"#8fb8e8", "#1f5fa8"}};

  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"" << size - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"14\" y=\"" << size / 2 << "\" transform=\"rotate(-90 14 " << size / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << y_label << "</text>\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size - 2 * margin << "\" height=\""
      << size - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (const auto& p : points) {
    const char* fill = palette[p.color != 0 ? 1 : 0][p.shade != 0 ? 1 : 0];
    out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"2.5\" fill=\"" << fill
        << "\" fill-opacity=\"0.8\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace probelab
