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

#include <algorithm>
#include <cmath>
#include <vector>

#include "tablecut/image.hpp"

namespace tablecut {

enum class Orientation { vertical, horizontal };

// |second difference| along x and y, same dimensions as the source.
struct GradientField {
  Field d2x;
  Field d2y;
};

inline GradientField second_derivatives(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) throw DegenerateInput("second derivatives need at least a 3x3 crop");
  GradientField g{Field(img.width(), img.height()), Field(img.width(), img.height())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int c = 2 * img(x, y);
      g.d2x(x, y) = static_cast<float>(std::abs(img.clamped(x - 1, y) + img.clamped(x + 1, y) - c));
      g.d2y(x, y) = static_cast<float>(std::abs(img.clamped(x, y - 1) + img.clamped(x, y + 1) - c));
    }
  return g;
}

// 3x3 max filter, stride 1, replicated edges.
inline Field maxpool_3x3(const Field& f) {
  Field rows(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      rows(x, y) = std::max({f.clamped(x - 1, y), f(x, y), f.clamped(x + 1, y)});
  Field out(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x)
      out(x, y) = std::max({rows.clamped(x, y - 1), rows(x, y), rows.clamped(x, y + 1)});
  return out;
}

inline GradientField maxpool_3x3(const GradientField& g) { return {maxpool_3x3(g.d2x), maxpool_3x3(g.d2y)}; }

// Value at quantile q (nearest rank, lower) of all entries.
inline float field_quantile(const Field& f, double q) {
  if (f.empty()) return 0.f;
  std::vector<float> v = f.data();
  const auto k = static_cast<std::size_t>(std::floor(std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

struct RealLine {
  Orientation orientation = Orientation::vertical;
  int coordinate = 0;     // x for vertical lines, y for horizontal lines
  Interval source_span;   // detected extent along the line, before extension
  int half_width = 0;     // half the width of the accepted cluster

  bool operator==(const RealLine&) const = default;
};

struct LineParams {
  double high_quantile = 0.99;  // "high" = at least this quantile of the pooled field
  double sim_cv = 0.5;          // max coefficient of variation of the parallel field
  double seg_frac = 0.2;        // min segment length as a fraction of the span
  int dedupe_px = 2;            // accepted columns this close collapse to one line
  int ink_threshold = 128;      // source pixels this dark continue a segment
};

namespace detail {

// Coefficient of variation of the perpendicular field along a segment, with
// the mean floored at `floor` so that a near-zero field stays well defined.
// Pixels where the perpendicular field is itself high are crossings with
// perpendicular lines and are left out; at least half must remain.
inline bool segment_is_uniform(const std::vector<float>& perp, float perp_high, double max_cv, double floor = 0.0) {
  double sum = 0;
  double sq = 0;
  std::size_t n = 0;
  for (float v : perp) {
    if (perp_high > 0.f && v >= perp_high) continue;
    sum += v;
    sq += static_cast<double>(v) * v;
    ++n;
  }
  if (n * 2 < perp.size()) return false;
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
  const double denom = std::max(mean, floor);
  if (denom <= 1e-9) return var <= 1e-9;
  return std::sqrt(var) / denom <= max_cv;
}

}  // namespace detail

// Searches a pooled gradient field for ruling lines of one orientation. Each
// accepted line is extended to the full span of the crop. With `source`, dark
// pixels also count toward a segment, which carries it through the flat
// interior of thick lines and across perpendicular crossings; accepted columns
// joined by dark pixels belong to one thick line.
inline std::vector<RealLine> find_real_lines(const GradientField& pooled, Orientation orientation,
                                             const LineParams& p = {}, const GrayImage* source = nullptr) {
  const bool vertical = orientation == Orientation::vertical;
  const Field& primary = vertical ? pooled.d2x : pooled.d2y;
  const Field& perpendicular = vertical ? pooled.d2y : pooled.d2x;
  const int lines = vertical ? primary.width() : primary.height();  // candidate coordinates
  const int along = vertical ? primary.height() : primary.width();  // span of each candidate
  if (lines == 0 || along == 0) return {};

  const float high = field_quantile(primary, p.high_quantile);
  const float perp_high = field_quantile(perpendicular, p.high_quantile);
  const int min_len = std::max(2, round_px(p.seg_frac * along));
  auto at = [&](const Field& f, int c, int t) { return vertical ? f(c, t) : f(t, c); };
  auto is_high = [&](int c, int t) {
    const float v = at(primary, c, t);
    return v >= high && v > 0.f;
  };
  auto is_dark = [&](int c, int t) {
    return source && (vertical ? (*source)(c, t) : (*source)(t, c)) < p.ink_threshold;
  };

  struct Hit {
    int coord;
    Interval span;
  };
  std::vector<Hit> hits;
  std::vector<float> perp;
  for (int c = 0; c < lines; ++c) {
    int t = 0;
    while (t < along) {
      if (!is_high(c, t) && !is_dark(c, t)) {
        ++t;
        continue;
      }
      int e = t;
      while (e + 1 < along && (is_high(c, e + 1) || is_dark(c, e + 1))) ++e;
      if (e - t + 1 >= min_len) {
        perp.clear();
        for (int k = t; k <= e; ++k) perp.push_back(at(perpendicular, c, k));
        if (detail::segment_is_uniform(perp, perp_high, p.sim_cv, high)) hits.push_back({c, {t, e}});
      }
      t = e + 1;
    }
  }

  // Two hits belong to one line when close, or when every coordinate between
  // them is dark over most of their common extent.
  auto joined = [&](const Hit& a, const Hit& b) {
    if (b.coord - a.coord <= p.dedupe_px) return true;
    if (!source) return false;
    const int t0 = std::max(a.span.first, b.span.first);
    const int t1 = std::min(a.span.last, b.span.last);
    if (t1 - t0 + 1 < min_len) return false;
    for (int c = a.coord + 1; c < b.coord; ++c) {
      int dark = 0;
      for (int t = t0; t <= t1; ++t) dark += is_dark(c, t);
      if (dark * 10 < (t1 - t0 + 1) * 9) return false;
    }
    return true;
  };

  std::vector<RealLine> out;
  std::size_t i = 0;
  while (i < hits.size()) {
    std::size_t j = i;
    while (j + 1 < hits.size() && joined(hits[j], hits[j + 1])) ++j;
    // Centroid over distinct coordinates of the cluster.
    long long sum = 0;
    int count = 0;
    Interval span = hits[i].span;
    for (std::size_t k = i; k <= j; ++k) {
      if (k == i || hits[k].coord != hits[k - 1].coord) {
        sum += hits[k].coord;
        ++count;
      }
      span.first = std::min(span.first, hits[k].span.first);
      span.last = std::max(span.last, hits[k].span.last);
    }
    RealLine line;
    line.orientation = orientation;
    line.coordinate = round_px(static_cast<double>(sum) / count);
    line.source_span = span;
    line.half_width = (hits[j].coord - hits[i].coord + 1) / 2;
    out.push_back(line);
    i = j + 1;
  }
  return out;
}

// A real line extended to the full crop span.
inline Box extended_extent(const RealLine& line, int width, int height) {
  if (line.orientation == Orientation::vertical) return {line.coordinate, 0, line.coordinate, height - 1};
  return {0, line.coordinate, width - 1, line.coordinate};
}

struct MaskParams {
  int ink_threshold = 128;
  int line_excl = 2;
};

// Pixels darker than the ink threshold that are not part of any real line.
// Each line excludes a band of at least `line_excl` around its coordinate,
// widened over neighbours that are dark along most of the detected span.
inline Mask build_data_mask(const GrayImage& img, const std::vector<RealLine>& lines, const MaskParams& p = {}) {
  Mask mask(img.width(), img.height(), 0);
  std::vector<std::uint8_t> excl_x(static_cast<std::size_t>(img.width()), 0);
  std::vector<std::uint8_t> excl_y(static_cast<std::size_t>(img.height()), 0);
  for (const auto& l : lines) {
    const bool vertical = l.orientation == Orientation::vertical;
    auto& band = vertical ? excl_x : excl_y;
    const int n = static_cast<int>(band.size());
    const int along = vertical ? img.height() : img.width();
    const int t0 = std::clamp(l.source_span.first, 0, along - 1);
    const int t1 = std::clamp(l.source_span.last, t0, along - 1);
    auto mostly_dark = [&](int k) {
      if (k < 0 || k >= n) return false;
      int dark = 0;
      for (int t = t0; t <= t1; ++t) dark += (vertical ? img(k, t) : img(t, k)) < p.ink_threshold;
      return dark * 2 > t1 - t0 + 1;
    };
    int lo = l.coordinate - std::max(p.line_excl, l.half_width + 1);
    int hi = l.coordinate + std::max(p.line_excl, l.half_width + 1);
    while (mostly_dark(lo - 1)) --lo;
    while (mostly_dark(hi + 1)) ++hi;
    for (int k = std::max(0, lo); k <= std::min(n - 1, hi); ++k) band[static_cast<std::size_t>(k)] = 1;
  }
  for (int y = 0; y < img.height(); ++y) {
    if (excl_y[static_cast<std::size_t>(y)]) continue;
    for (int x = 0; x < img.width(); ++x)
      if (!excl_x[static_cast<std::size_t>(x)] && img(x, y) < p.ink_threshold) mask(x, y) = 1;
  }
  return mask;
}

}  // namespace tablecut
