// Copyright 2026 The tablecut Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "tablecut/image_io.hpp"
#include "tablecut/pipeline.hpp"

namespace tablecut {

struct Rgb {
  std::uint8_t r, g, b;
};

inline constexpr Rgb kRealColor{0, 0, 255};
inline constexpr Rgb kInferredColor{255, 200, 0};
inline constexpr Rgb kFinalColor{0, 170, 0};
inline constexpr Rgb kMergedColor{220, 0, 0};

namespace detail {

inline void vline(ColorImage& img, int x, Rgb c) {
  for (int y = 0; y < img.height; ++y) img.set(x, y, c.r, c.g, c.b);
}
inline void hline(ColorImage& img, int y, Rgb c) {
  for (int x = 0; x < img.width; ++x) img.set(x, y, c.r, c.g, c.b);
}
inline void outline(ColorImage& img, const Box& b, Rgb c) {
  for (int x = b.x_min; x <= b.x_max; ++x) {
    img.set(x, b.y_min, c.r, c.g, c.b);
    img.set(x, b.y_max, c.r, c.g, c.b);
  }
  for (int y = b.y_min; y <= b.y_max; ++y) {
    img.set(b.x_min, y, c.r, c.g, c.b);
    img.set(b.x_max, y, c.r, c.g, c.b);
  }
}

}  // namespace detail

// Working crop with valid inferred coordinates (yellow), real lines (blue),
// final lines (green) and merged components (red, inset by one pixel).
inline ColorImage structure_overlay(const TableStructure& t) {
  ColorImage img(t.working);
  for (const AxisStructure* s : {&t.vertical, &t.horizontal}) {
    const bool vertical = s->final_lines.axis == Orientation::vertical;
    for (std::size_t i = 0; i < s->inferred.valid.size(); ++i)
      if (s->inferred.valid[i]) {
        if (vertical) detail::vline(img, static_cast<int>(i), kInferredColor);
        else detail::hline(img, static_cast<int>(i), kInferredColor);
      }
  }
  for (const AxisStructure* s : {&t.vertical, &t.horizontal}) {
    const bool vertical = s->final_lines.axis == Orientation::vertical;
    for (const auto& r : s->real) {
      if (vertical) detail::vline(img, r.coordinate, kRealColor);
      else detail::hline(img, r.coordinate, kRealColor);
    }
    for (int c : s->final_lines.coordinates) {
      if (vertical) detail::vline(img, c, kFinalColor);
      else detail::hline(img, c, kFinalColor);
    }
  }
  if (t.grid.rows() > 0 && t.grid.cols() > 0)
    for (const auto& comp : t.resolution.components) {
      if (comp.cell_count() < 2) continue;
      Box b = t.grid.span_box(comp.row0, comp.col0, comp.row1, comp.col1);
      b = {b.x_min + 1, b.y_min + 1, b.x_max - 1, b.y_max - 1};
      if (b.valid()) detail::outline(img, b, kMergedColor);
    }
  return img;
}

// Page with detected regions outlined in red and ensembled regions in green.
inline ColorImage regions_overlay(const GrayImage& page, const std::vector<Region>& detected,
                                  const std::vector<Region>& final_regions) {
  ColorImage img(page);
  for (const auto& r : detected) detail::outline(img, r, kMergedColor);
  for (const auto& r : final_regions) {
    detail::outline(img, r, kFinalColor);
    detail::outline(img, {r.x_min + 1, r.y_min + 1, r.x_max - 1, r.y_max - 1}, kFinalColor);
  }
  return img;
}

}  // namespace tablecut
