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
#include <functional>
#include <string>
#include <vector>

#include "tablecut/image_prep.hpp"

namespace tablecut {

// Table bounding box in original-image pixels (inclusive bounds).
using Region = Box;

inline constexpr int kColumnStageSize = 400;

// Given one 64-row strip, returns 4 flags; flag i covers strip rows [16+8i, 16+8i+7].
using BandScorer = std::function<std::vector<bool>(const Strip&)>;
// Given a 400x400 row-group image, returns one flag per column.
using ColumnScorer = std::function<std::vector<bool>(const GrayImage&)>;

struct ScorerConfig {
  int ink_level = 128;             // pixels strictly below are ink
  double band_density = 0.004;     // band flagged when ink fraction exceeds this
  double column_density = 0.005;   // column flagged when ink fraction exceeds this
  double line_min_frac = 0.1;      // horizontal dark run, as a fraction of width
  double column_line_frac = 0.5;   // vertical dark run, as a fraction of the 400 rows
};

namespace detail {

inline int longest_dark_run_in_row(const GrayImage& img, int y, int x0, int x1, int ink) {
  int best = 0;
  int cur = 0;
  for (int x = x0; x < x1; ++x) {
    cur = img(x, y) < ink ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}

inline int longest_dark_run_in_column(const GrayImage& img, int x, int y0, int y1, int ink) {
  int best = 0;
  int cur = 0;
  for (int y = y0; y < y1; ++y) {
    cur = img(x, y) < ink ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}

}  // namespace detail

// Deterministic band scorer: ink density over the band, or a dark line
// crossing it (a column dark across all 8 rows, or a long horizontal run).
class DefaultBandScorer {
 public:
  explicit DefaultBandScorer(ScorerConfig cfg = {}) : cfg_(cfg) {}

  std::vector<bool> operator()(const Strip& strip) const {
    const GrayImage& img = strip.pixels;
    std::vector<bool> out(kBandsPerStrip, false);
    const int min_run = std::max(1, round_px(cfg_.line_min_frac * img.width()));
    for (int i = 0; i < kBandsPerStrip; ++i) {
      const int y0 = kStripContext + kBandHeight * i;
      const int y1 = y0 + kBandHeight;
      long long ink = 0;
      for (int y = y0; y < y1; ++y)
        for (auto v : img.row(y)) ink += v < cfg_.ink_level;
      const double density = static_cast<double>(ink) / (static_cast<double>(img.width()) * kBandHeight);
      bool flag = density > cfg_.band_density;
      for (int y = y0; !flag && y < y1; ++y)
        flag = detail::longest_dark_run_in_row(img, y, 0, img.width(), cfg_.ink_level) >= min_run;
      for (int x = 0; !flag && x < img.width(); ++x)
        flag = detail::longest_dark_run_in_column(img, x, y0, y1, cfg_.ink_level) >= kBandHeight;
      out[static_cast<std::size_t>(i)] = flag;
    }
    return out;
  }

 private:
  ScorerConfig cfg_;
};

// Deterministic column scorer: ink density per column, or a column crossing a
// long vertical or horizontal dark line.
class DefaultColumnScorer {
 public:
  explicit DefaultColumnScorer(ScorerConfig cfg = {}) : cfg_(cfg) {}

  std::vector<bool> operator()(const GrayImage& img) const {
    std::vector<bool> out(static_cast<std::size_t>(img.width()), false);
    const int v_run = std::max(1, round_px(cfg_.column_line_frac * img.height()));
    const int h_run = std::max(1, round_px(cfg_.line_min_frac * img.width()));
    // Columns covered by a long horizontal run.
    std::vector<bool> under_hline(static_cast<std::size_t>(img.width()), false);
    for (int y = 0; y < img.height(); ++y) {
      int start = 0;
      for (int x = 0; x <= img.width(); ++x) {
        const bool ink = x < img.width() && img(x, y) < cfg_.ink_level;
        if (!ink) {
          if (x - start >= h_run)
            for (int k = start; k < x; ++k) under_hline[static_cast<std::size_t>(k)] = true;
          start = x + 1;
        }
      }
    }
    for (int x = 0; x < img.width(); ++x) {
      long long ink = 0;
      for (int y = 0; y < img.height(); ++y) ink += img(x, y) < cfg_.ink_level;
      const double density = static_cast<double>(ink) / img.height();
      out[static_cast<std::size_t>(x)] =
          density > cfg_.column_density || under_hline[static_cast<std::size_t>(x)] ||
          detail::longest_dark_run_in_column(img, x, 0, img.height(), cfg_.ink_level) >= v_run;
    }
    return out;
  }

 private:
  ScorerConfig cfg_;
};

// Concatenates per-strip band flags. `content_begin`/`content_end` bound the
// original (unpadded) rows in padded coordinates; flags outside are forced false.
inline std::vector<bool> detect_row_bands(const std::vector<Strip>& strips, const BandScorer& scorer,
                                          int content_begin, int content_end) {
  std::vector<bool> flags;
  flags.reserve(strips.size() * kBandsPerStrip);
  for (const auto& strip : strips) {
    const auto out = scorer(strip);
    if (out.size() != kBandsPerStrip)
      throw ContractViolation("band scorer returned " + std::to_string(out.size()) + " flags, expected 4");
    for (int i = 0; i < kBandsPerStrip; ++i) {
      const int y0 = strip.inner_begin() + kBandHeight * i;
      const int y1 = y0 + kBandHeight - 1;
      const bool inside = y1 >= content_begin && y0 < content_end;
      flags.push_back(inside && out[static_cast<std::size_t>(i)]);
    }
  }
  return flags;
}

// Maximal runs of true flags; runs separated by at most `merge_gap` false
// flags are joined.
inline std::vector<Interval> group_runs(const std::vector<bool>& flags, int merge_gap) {
  std::vector<Interval> runs;
  const int n = static_cast<int>(flags.size());
  for (int i = 0; i < n;) {
    if (!flags[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && flags[static_cast<std::size_t>(j + 1)]) ++j;
    if (!runs.empty() && i - runs.back().last - 1 <= merge_gap)
      runs.back().last = j;
    else
      runs.push_back({i, j});
    i = j + 1;
  }
  return runs;
}

// Row groups as inclusive padded-row intervals.
inline std::vector<Interval> group_rows(const std::vector<bool>& flags, int merge_gap = 2,
                                        int band_height = kBandHeight) {
  std::vector<Interval> rows;
  for (const auto& run : group_runs(flags, merge_gap))
    rows.push_back({kStripContext + band_height * run.first, kStripContext + band_height * run.last + band_height - 1});
  return rows;
}

inline std::vector<Interval> detect_columns(const GrayImage& group_image, const ColumnScorer& scorer,
                                            int merge_gap = 10) {
  const auto flags = scorer(group_image);
  if (static_cast<int>(flags.size()) != group_image.width())
    throw ContractViolation("column scorer returned " + std::to_string(flags.size()) + " flags, expected " +
                            std::to_string(group_image.width()));
  return group_runs(flags, merge_gap);
}

// One row group and the column intervals found for it. The column intervals
// are in 400-wide resampled coordinates of the crop [crop_x0, crop_x0+crop_width).
struct RowGroup {
  Interval rows;  // padded working rows
  int crop_x0 = 0;
  int crop_width = kWorkingWidth;
  std::vector<Interval> columns;
};

// Maps row x column intervals back to original-image regions. Regions that are
// empty after clamping are dropped and reported through `dropped`.
inline std::vector<Region> to_regions(const std::vector<RowGroup>& groups, const ScaleMap& scale,
                                      int original_width, int original_height,
                                      std::vector<std::string>* dropped = nullptr) {
  std::vector<Region> out;
  for (const auto& g : groups) {
    for (const auto& col : g.columns) {
      const int wx0 = g.crop_x0 + col.first * g.crop_width / kColumnStageSize;
      const int wx1 = g.crop_x0 + ((col.last + 1) * g.crop_width + kColumnStageSize - 1) / kColumnStageSize - 1;
      Region r;
      r.x_min = scale.to_original_x(wx0);
      r.x_max = scale.to_original_x(wx1 + 1) - 1;
      r.y_min = scale.to_original_y(g.rows.first);
      r.y_max = scale.to_original_y(g.rows.last + 1) - 1;
      r.x_min = std::max(r.x_min, 0);
      r.y_min = std::max(r.y_min, 0);
      r.x_max = std::min(r.x_max, original_width - 1);
      r.y_max = std::min(r.y_max, original_height - 1);
      if (!r.valid()) {
        if (dropped) dropped->push_back("degenerate region dropped after clamping");
        continue;
      }
      out.push_back(r);
    }
  }
  return out;
}

// Fixed-point bounding-box union of two proposal sets. Regions from different
// sources that share pixels are replaced by their union; merged regions count
// as both sources. Regions that overlap nothing are kept. Output is sorted.
inline std::vector<Region> ensemble_union(const std::vector<Region>& primary, const std::vector<Region>& proposals) {
  struct Item {
    Region box;
    unsigned sources;
  };
  std::vector<Item> items;
  for (const auto& r : primary) items.push_back({r, 1u});
  for (const auto& r : proposals) items.push_back({r, 2u});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.box < b.box; });
  auto mergeable = [](const Item& a, const Item& b) {
    return a.box.overlaps(b.box) && !(a.sources == b.sources && a.sources != 3u);
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size();) {
        if (mergeable(items[i], items[j])) {
          items[i].box = items[i].box.united(items[j].box);
          items[i].sources |= items[j].sources;
          items.erase(items.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          j = i + 1;  // the grown box may now reach earlier-skipped items
        } else {
          ++j;
        }
      }
    }
  }
  std::vector<Region> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.box);
  std::sort(out.begin(), out.end());
  return out;
}

struct RegionConfig {
  int working_width = kWorkingWidth;
  int pad = kStripContext;
  int row_merge_gap = 2;      // bands
  int column_merge_gap = 10;  // resampled columns
  ScorerConfig scorer;
};

struct RegionDetection {
  std::vector<Region> regions;
  PreparedImage working;  // resized + padded page
  std::vector<bool> row_flags;
  std::vector<RowGroup> groups;
  std::vector<std::string> warnings;
};

// Full two-stage region search on one grayscale page.
inline RegionDetection detect_regions(const GrayImage& page, const RegionConfig& cfg = {},
                                      const BandScorer& band_scorer = {}, const ColumnScorer& column_scorer = {}) {
  const BandScorer bands = band_scorer ? band_scorer : BandScorer(DefaultBandScorer(cfg.scorer));
  const ColumnScorer columns = column_scorer ? column_scorer : ColumnScorer(DefaultColumnScorer(cfg.scorer));
  RegionDetection det;
  auto resized = resize_to_width(page, cfg.working_width);
  det.working = pad_vertical(resized.image, cfg.pad, resized.scale);
  const auto strips = slice_strips(det.working.image);
  const int content_begin = cfg.pad;
  const int content_end = cfg.pad + resized.image.height();
  det.row_flags = detect_row_bands(strips, bands, content_begin, content_end);
  for (const auto& rows : group_rows(det.row_flags, cfg.row_merge_gap)) {
    RowGroup g;
    g.rows = {std::max(rows.first, content_begin), std::min(rows.last, content_end - 1)};
    if (g.rows.last < g.rows.first) continue;
    g.crop_x0 = 0;
    g.crop_width = det.working.image.width();
    const GrayImage band = crop(det.working.image, {0, g.rows.first, g.crop_width - 1, g.rows.last});
    const GrayImage square = resample(band, kColumnStageSize, kColumnStageSize);
    g.columns = detect_columns(square, columns, cfg.column_merge_gap);
    det.groups.push_back(std::move(g));
  }
  det.regions = to_regions(det.groups, det.working.scale, page.width(), page.height(), &det.warnings);
  return det;
}

}  // namespace tablecut
