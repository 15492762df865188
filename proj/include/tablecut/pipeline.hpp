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
#include <string>
#include <utility>
#include <vector>

#include "tablecut/config.hpp"
#include "tablecut/image_prep.hpp"
#include "tablecut/ocr_output.hpp"
#include "tablecut/region_detect.hpp"

namespace tablecut {

inline LineParams line_params(const PipelineConfig& c) { return {c.high_quantile, c.sim_cv, c.seg_frac, 2, 128}; }

inline StructureParams structure_params(const PipelineConfig& c) {
  return {c.threshold_start, c.delta, c.join_gap, c.proximity, c.min_cell};
}

inline RegionConfig region_config(const PipelineConfig& c) {
  RegionConfig r;
  r.working_width = c.working_width;
  r.pad = c.pad;
  r.row_merge_gap = c.row_merge_gap;
  r.column_merge_gap = c.column_merge_gap;
  return r;
}

// Everything computed for one table region, in working-crop coordinates
// unless noted.
struct TableStructure {
  Box region;       // page pixels, after trimming to ink
  ScaleMap scale;   // working crop -> region-relative page pixels
  GrayImage working;
  Mask mask;
  Mask footprint;       // text-line blocks of the mask, used for quality scores
  GrayImage data_only;  // working crop with non-data pixels whitened
  AxisStructure vertical;
  AxisStructure horizontal;
  CellGrid grid;
  std::vector<std::pair<Orientation, int>> dropped;  // inferred lines no cell depended on
  PairDecisions decisions;
  MergeResolution resolution;
  std::vector<Box> cell_boxes;  // page pixels, one per component
};

// Shrinks a region to its ink plus `margin`. Returns an invalid box when the
// region holds no ink.
inline Box trim_to_ink(const GrayImage& page, const Box& region, int margin) {
  const Box r = region.clamped_to(page.width(), page.height());
  const Box ink = ink_bounds(crop(page, r));
  if (!ink.valid()) return {0, 0, -1, -1};
  return Box{r.x_min + ink.x_min - margin, r.y_min + ink.y_min - margin, r.x_min + ink.x_max + margin,
             r.y_min + ink.y_max + margin}
      .intersected(r);
}

// Folds a thin, data-free lane between a crop edge and a real line into its
// neighbour by dropping the real line. Trim margins leave such slivers
// outside ruled borders; `max_lane` is their widest expected extent in
// working pixels.
inline void fold_edge_slivers(AxisStructure& s, const Mask& mask, int max_lane) {
  const bool vertical = s.final_lines.axis == Orientation::vertical;
  auto is_real = [&](int c) {
    return std::any_of(s.real.begin(), s.real.end(), [&](const RealLine& r) { return r.coordinate == c; });
  };
  auto blank = [&](int lo, int hi) {
    const int other = vertical ? mask.height() : mask.width();
    for (int a = lo; a <= hi; ++a)
      for (int b = 0; b < other; ++b)
        if (vertical ? mask(a, b) : mask(b, a)) return false;
    return true;
  };
  auto& c = s.final_lines.coordinates;
  if (c.size() >= 3 && c[1] - c[0] <= max_lane && is_real(c[1]) && blank(c[0], c[1])) c.erase(c.begin() + 1);
  const std::size_t n = c.size();
  if (n >= 3 && c[n - 1] - c[n - 2] <= max_lane && is_real(c[n - 2]) && blank(c[n - 2], c[n - 1]))
    c.erase(c.begin() + static_cast<std::ptrdiff_t>(n - 2));
}

// Resize, line detection and fusion for one table crop; no classification.
inline TableStructure analyze_structure(const GrayImage& page, const Box& region, const PipelineConfig& cfg) {
  TableStructure t;
  t.region = trim_to_ink(page, region, cfg.trim_margin);
  if (!t.region.valid()) throw DegenerateInput("table region holds no ink");
  auto prepared = resize_to_width(crop(page, t.region), cfg.working_width);
  t.working = std::move(prepared.image);
  t.scale = prepared.scale;
  const auto pooled = maxpool_3x3(second_derivatives(t.working));
  const auto lp = line_params(cfg);
  auto real_v = find_real_lines(pooled, Orientation::vertical, lp, &t.working);
  auto real_h = find_real_lines(pooled, Orientation::horizontal, lp, &t.working);
  std::vector<RealLine> all = real_v;
  all.insert(all.end(), real_h.begin(), real_h.end());
  t.mask = build_data_mask(t.working, all);
  const auto sp = structure_params(cfg);
  t.footprint = content_footprint(t.mask, {cfg.word_gap_frac, 2});
  t.vertical = structure_axis(t.footprint, real_v, Orientation::vertical, sp);
  t.horizontal = structure_axis(t.footprint, real_h, Orientation::horizontal, sp);
  // Margin plus two pixels of ruling and rounding, mapped to working pixels.
  auto lane = [&](double scale) {
    return std::max(2 * cfg.min_cell - 1, static_cast<int>(std::ceil((cfg.trim_margin + 2) / scale)));
  };
  fold_edge_slivers(t.vertical, t.mask, lane(t.scale.scale_x));
  fold_edge_slivers(t.horizontal, t.mask, lane(t.scale.scale_y));
  t.grid = build_grid(t.vertical.final_lines, t.horizontal.final_lines);
  t.data_only = GrayImage(t.working.width(), t.working.height(), kWhite);
  for (std::size_t i = 0; i < t.working.size(); ++i)
    if (t.mask.data()[i]) t.data_only.data()[i] = t.working.data()[i];
  return t;
}

// Full structure recovery: analysis, pair classification, merge resolution
// and mapping of the component boxes back to page pixels.
inline TableStructure analyze_table(const GrayImage& page, const Box& region, const PipelineConfig& cfg,
                                    const MergeClassifier& classifier) {
  TableStructure t = analyze_structure(page, region, cfg);
  auto removable = [](const AxisStructure& s) {
    std::vector<bool> flags;
    for (int c : s.final_lines.coordinates) {
      const bool inferred = std::find(s.selected.begin(), s.selected.end(), c) != s.selected.end();
      const bool real = std::any_of(s.real.begin(), s.real.end(), [&](const RealLine& r) { return r.coordinate == c; });
      flags.push_back(inferred && !real);
    }
    return flags;
  };
  for (;;) {
    t.decisions = classify_pairs(t.data_only, t.grid, classifier);
    bool changed = false;
    for (AxisStructure* s : {&t.vertical, &t.horizontal}) {
      const int k = redundant_boundary(t.grid, t.decisions, s->final_lines.axis, removable(*s), cfg.merge_threshold);
      if (k < 0) continue;
      auto& coords = s->final_lines.coordinates;
      t.dropped.push_back({s->final_lines.axis, coords[static_cast<std::size_t>(k)]});
      coords.erase(coords.begin() + k);
      t.grid = build_grid(t.vertical.final_lines, t.horizontal.final_lines);
      changed = true;
      break;
    }
    if (!changed) break;
  }
  t.resolution = resolve_merges(t.grid, t.decisions, cfg.merge_threshold);
  t.cell_boxes = scale_cells_to_original(t.resolution, t.grid, t.scale, t.region);
  return t;
}

struct TableResult {
  Box region;
  TableStructure structure;
  TableModel model;
};

struct PageResult {
  RegionDetection detection;
  std::vector<Region> regions;  // after the ensemble
  std::vector<TableResult> tables;
  std::vector<std::string> warnings;
  int ocr_calls = 0;
  int ocr_failures = 0;
};

struct PageHooks {
  BandScorer band_scorer;
  ColumnScorer column_scorer;
  MergeClassifier classifier;
};

// One page end to end. With `fixed_regions` the detector is bypassed; with
// `proposals` its regions are ensembled with the detector's.
inline PageResult process_page(const GrayImage& page, const PipelineConfig& cfg, const OcrClient& ocr,
                               const PageHooks& hooks = {}, const std::vector<Region>* fixed_regions = nullptr,
                               const std::vector<Region>& proposals = {}) {
  PageResult out;
  if (fixed_regions) {
    out.regions = *fixed_regions;
  } else {
    out.detection = detect_regions(page, region_config(cfg), hooks.band_scorer, hooks.column_scorer);
    out.warnings = out.detection.warnings;
    out.regions = ensemble_union(out.detection.regions, proposals);
  }
  ClassifierConfig ccfg;
  ccfg.empty_eps = cfg.empty_eps;
  const MergeClassifier classifier = hooks.classifier ? hooks.classifier : MergeClassifier(DefaultMergeClassifier(ccfg));
  for (std::size_t k = 0; k < out.regions.size(); ++k) {
    const Region& region = out.regions[k];
    try {
      TableResult tr;
      tr.region = region;
      tr.structure = analyze_table(page, region, cfg, classifier);
      for (const auto& w : tr.structure.resolution.warnings) out.warnings.push_back("table " + std::to_string(k) + ": " + w);
      ExtractionStats stats;
      tr.model = extract_text(ocr, page, tr.structure.resolution, tr.structure.cell_boxes, &stats);
      if (cfg.merge_multiline) tr.model = merge_multiline_rows(tr.model);
      out.ocr_calls += stats.ocr_calls;
      out.ocr_failures += stats.failed_calls;
      for (const auto& w : stats.warnings) out.warnings.push_back("table " + std::to_string(k) + ": " + w);
      out.tables.push_back(std::move(tr));
    } catch (const DegenerateInput& e) {
      out.warnings.push_back("table " + std::to_string(k) + " skipped: " + e.what());
    }
  }
  return out;
}

}  // namespace tablecut
