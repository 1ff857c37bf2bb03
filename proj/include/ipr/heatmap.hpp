/*
 * Copyright 2026 The IPR Toolkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// SVG heatmap of a ParMatrix. Colors run from white (0) to dark blue (1)
// over 256 steps; the red channel alone encodes the step, so a cell color
// decodes back to its value within 1/255.

#ifndef IPR_HEATMAP_HPP_
#define IPR_HEATMAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "ipr/error.hpp"
#include "ipr/metrics.hpp"
#include "ipr/text_util.hpp"

namespace ipr {

inline constexpr double kHeatmapLow = 0.0;
inline constexpr double kHeatmapHigh = 1.0;
inline constexpr const char* kHeatmapUndefinedColor = "#bdbdbd";

inline int heatmap_step(double v) {
  const double t = std::clamp((v - kHeatmapLow) / (kHeatmapHigh - kHeatmapLow), 0.0, 1.0);
  return static_cast<int>(std::lround(t * 255.0));
}

inline std::string heatmap_color(double v) {
  const int q = heatmap_step(v);
  const int r = 255 - q;
  const int g = 255 - static_cast<int>(std::lround(q * 140.0 / 255.0));
  const int b = 255 - static_cast<int>(std::lround(q * 60.0 / 255.0));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

inline double decode_heatmap_color(std::string_view hex) {
  if (hex.size() != 7 || hex[0] != '#') throw Error("bad color '" + std::string(hex) + "'");
  const int r = std::stoi(std::string(hex.substr(1, 2)), nullptr, 16);
  return kHeatmapLow + (kHeatmapHigh - kHeatmapLow) * static_cast<double>(255 - r) / 255.0;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string render_heatmap_svg(const ParMatrix& pm, std::string_view title) {
  constexpr int kCell = 28;
  constexpr int kLabel = 140;
  constexpr int kTop = 40;
  constexpr int kLegend = 90;
  const int n = static_cast<int>(pm.size());
  const int grid = n * kCell;
  const int width = kLabel + grid + kLegend;
  const int height = kTop + kLabel + grid + 20;
  const int gx = kLabel;
  const int gy = kTop + kLabel;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<title>" << xml_escape(title) << "</title>\n";
  os << "<text x=\"" << gx << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << " ("
     << to_string(pm.mode()) << ")</text>\n";

  for (int i = 0; i < n; ++i) {
    const auto& id = xml_escape(pm.ids()[static_cast<std::size_t>(i)]);
    os << "<text x=\"" << gx - 4 << "\" y=\"" << gy + i * kCell + kCell / 2 + 4
       << "\" text-anchor=\"end\">" << id << "</text>\n";
    const int cx = gx + i * kCell + kCell / 2 + 4;
    os << "<text x=\"" << cx << "\" y=\"" << gy - 4 << "\" transform=\"rotate(-60 " << cx << ' '
       << gy - 4 << ")\">" << id << "</text>\n";
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto& v = pm.value(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      os << "<rect x=\"" << gx + j * kCell << "\" y=\"" << gy + i * kCell << "\" width=\"" << kCell
         << "\" height=\"" << kCell << "\" fill=\"" << (v ? heatmap_color(*v) : kHeatmapUndefinedColor)
         << "\" data-i=\"" << i << "\" data-j=\"" << j << "\" data-value=\""
         << (v ? format_double(*v) : "NA") << "\"><title>"
         << xml_escape(pm.ids()[static_cast<std::size_t>(i)]) << " / "
         << xml_escape(pm.ids()[static_cast<std::size_t>(j)]) << ": "
         << (v ? format_double(*v) : "undefined") << "</title></rect>\n";
    }
  }

  // Legend: vertical ramp with explicit bounds.
  const int lx = gx + grid + 20;
  const int steps = 16;
  const int lh = std::max(grid, 160);
  for (int s = 0; s < steps; ++s) {
    const double v = kHeatmapHigh - (kHeatmapHigh - kHeatmapLow) * s / (steps - 1);
    os << "<rect class=\"legend\" x=\"" << lx << "\" y=\"" << gy + s * lh / steps << "\" width=\"14\" height=\""
       << lh / steps + 1 << "\" fill=\"" << heatmap_color(v) << "\"/>\n";
  }
  os << "<text x=\"" << lx + 18 << "\" y=\"" << gy + 10 << "\">" << format_double(kHeatmapHigh)
     << "</text>\n";
  os << "<text x=\"" << lx + 18 << "\" y=\"" << gy + lh << "\">" << format_double(kHeatmapLow)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace ipr

#endif  // IPR_HEATMAP_HPP_
