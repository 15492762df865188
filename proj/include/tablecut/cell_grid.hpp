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
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "tablecut/image_prep.hpp"
#include "tablecut/region_detect.hpp"
#include "tablecut/structure_lines.hpp"

namespace tablecut {

struct CellRef {
  int row = 0;
  int col = 0;
  bool operator==(const CellRef&) const = default;
};

// Rectangular lattice over a working crop. Cell (r, c) spans
// [col_bounds[c], col_bounds[c+1]] x [row_bounds[r], row_bounds[r+1]].
struct CellGrid {
  std::vector<int> row_bounds;
  std::vector<int> col_bounds;

  int rows() const noexcept { return static_cast<int>(row_bounds.size()) - 1; }
  int cols() const noexcept { return static_cast<int>(col_bounds.size()) - 1; }
  int index(int r, int c) const noexcept { return r * cols() + c; }
  Box cell_box(int r, int c) const {
    return {col_bounds[static_cast<std::size_t>(c)], row_bounds[static_cast<std::size_t>(r)],
            col_bounds[static_cast<std::size_t>(c) + 1], row_bounds[static_cast<std::size_t>(r) + 1]};
  }
  // Box covering the cell rectangle [r0..r1] x [c0..c1].
  Box span_box(int r0, int c0, int r1, int c1) const {
    return {col_bounds[static_cast<std::size_t>(c0)], row_bounds[static_cast<std::size_t>(r0)],
            col_bounds[static_cast<std::size_t>(c1) + 1], row_bounds[static_cast<std::size_t>(r1) + 1]};
  }
};

inline CellGrid build_grid(const FinalLines& vertical, const FinalLines& horizontal) {
  if (vertical.coordinates.size() < 2 || horizontal.coordinates.size() < 2)
    throw DegenerateInput("a table needs at least two final lines on each axis");
  auto strictly_increasing = [](const std::vector<int>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!strictly_increasing(vertical.coordinates) || !strictly_increasing(horizontal.coordinates))
    throw DegenerateInput("final lines must be strictly increasing");
  return {horizontal.coordinates, vertical.coordinates};
}

inline constexpr int kCellView = 100;
inline constexpr int kPairViewWidth = 2 * kCellView;
inline constexpr int kPairViewHeight = kCellView;

// Two adjacent cells, each resampled to 100x100 on its own, side by side in a
// 200x100 view with the shared boundary at x = 100. Vertically adjacent cells
// are stacked and turned a quarter so the upper cell lands on the left.
inline GrayImage prepare_pair(const GrayImage& crop, const CellGrid& grid, CellRef a, CellRef b) {
  if (b.row * grid.cols() + b.col < a.row * grid.cols() + a.col) std::swap(a, b);
  const bool horizontal = a.row == b.row && b.col == a.col + 1;
  const bool vertical = a.col == b.col && b.row == a.row + 1;
  if (!horizontal && !vertical) throw ContractViolation("prepare_pair needs adjacent cells");
  const GrayImage first = resample(tablecut::crop(crop, grid.cell_box(a.row, a.col)), kCellView, kCellView);
  const GrayImage second = resample(tablecut::crop(crop, grid.cell_box(b.row, b.col)), kCellView, kCellView);
  GrayImage view(kPairViewWidth, kPairViewHeight);
  if (horizontal) {
    for (int y = 0; y < kCellView; ++y)
      for (int x = 0; x < kCellView; ++x) {
        view(x, y) = first(x, y);
        view(x + kCellView, y) = second(x, y);
      }
    return view;
  }
  GrayImage stacked(kCellView, 2 * kCellView);
  for (int y = 0; y < kCellView; ++y)
    for (int x = 0; x < kCellView; ++x) {
      stacked(x, y) = first(x, y);
      stacked(x, y + kCellView) = second(x, y);
    }
  return rotate_ccw(stacked);
}

// Classifier output: left-has-data, right-has-data, should-merge, each in [0, 1].
struct PairDecision {
  double left_data = 0.0;
  double right_data = 0.0;
  double merge = 0.0;
  bool operator==(const PairDecision&) const = default;
};

using MergeClassifier = std::function<PairDecision(const GrayImage&)>;

struct ClassifierConfig {
  double empty_eps = 0.002;  // ink fraction above which a half holds data
  int ink_level = 200;       // view pixels strictly below are ink
  int band_half = 20;        // centre band is [100 - band_half, 100 + band_half)
  int bridge_gap = 14;       // max blank pixels between ink on both sides of the seam
};

// Deterministic stand-in for a learned pair classifier. A half has data when
// its ink fraction exceeds empty_eps. The pair merges when some row of the
// centre band carries ink on both sides of the seam with at most bridge_gap
// blank pixels between them.
class DefaultMergeClassifier {
 public:
  explicit DefaultMergeClassifier(ClassifierConfig cfg = {}) : cfg_(cfg) {}

  PairDecision operator()(const GrayImage& view) const {
    if (view.width() != kPairViewWidth || view.height() != kPairViewHeight)
      throw ContractViolation("merge classifier expects a 200x100 view, got " + std::to_string(view.width()) + "x" +
                              std::to_string(view.height()));
    PairDecision d;
    d.left_data = ink_fraction(view, {0, 0, kCellView - 1, kCellView - 1}, cfg_.ink_level) > cfg_.empty_eps ? 1.0 : 0.0;
    d.right_data =
        ink_fraction(view, {kCellView, 0, kPairViewWidth - 1, kCellView - 1}, cfg_.ink_level) > cfg_.empty_eps ? 1.0 : 0.0;
    const int lo = kCellView - cfg_.band_half;
    const int hi = kCellView + cfg_.band_half;
    for (int y = 0; y < kPairViewHeight && d.merge == 0.0; ++y) {
      int left = -1;
      for (int x = kCellView - 1; x >= lo; --x)
        if (view(x, y) < cfg_.ink_level) {
          left = x;
          break;
        }
      int right = -1;
      for (int x = kCellView; x < hi; ++x)
        if (view(x, y) < cfg_.ink_level) {
          right = x;
          break;
        }
      if (left >= 0 && right >= 0 && right - left - 1 <= cfg_.bridge_gap) d.merge = 1.0;
    }
    return d;
  }

 private:
  ClassifierConfig cfg_;
};

// Classifier outputs for every adjacent pair: horizontal[r][c] is the pair
// (r,c)|(r,c+1), vertical[r][c] the pair (r,c)/(r+1,c).
struct PairDecisions {
  std::vector<std::vector<PairDecision>> horizontal;
  std::vector<std::vector<PairDecision>> vertical;
  // Standalone occupancy for grids without any adjacent pair.
  std::vector<bool> single;
};

// All horizontal pairs, then all vertical pairs.
inline PairDecisions classify_pairs(const GrayImage& crop, const CellGrid& grid, const MergeClassifier& classifier) {
  PairDecisions d;
  d.horizontal.assign(static_cast<std::size_t>(grid.rows()),
                      std::vector<PairDecision>(static_cast<std::size_t>(std::max(0, grid.cols() - 1))));
  d.vertical.assign(static_cast<std::size_t>(std::max(0, grid.rows() - 1)),
                    std::vector<PairDecision>(static_cast<std::size_t>(grid.cols())));
  for (int r = 0; r < grid.rows(); ++r)
    for (int c = 0; c + 1 < grid.cols(); ++c)
      d.horizontal[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          classifier(prepare_pair(crop, grid, {r, c}, {r, c + 1}));
  for (int r = 0; r + 1 < grid.rows(); ++r)
    for (int c = 0; c < grid.cols(); ++c)
      d.vertical[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          classifier(prepare_pair(crop, grid, {r, c}, {r + 1, c}));
  if (grid.rows() == 1 && grid.cols() == 1) {
    // Lone cell next to a blank half; only the left-half vote is used.
    const GrayImage cell = resample(tablecut::crop(crop, grid.cell_box(0, 0)), kCellView, kCellView);
    GrayImage view(kPairViewWidth, kPairViewHeight, kWhite);
    for (int y = 0; y < kCellView; ++y)
      for (int x = 0; x < kCellView; ++x) view(x, y) = cell(x, y);
    d.single = {classifier(view).left_data >= 0.5};
  }
  return d;
}

// Bound index of an inferred boundary that no cell depends on, or -1. A grid
// column is dependent when none of its cells holds data on its own: every
// cell is empty or merged with a horizontal neighbour, and at least one is
// merged. Its left bound is returned when removable, else its right bound.
// The horizontal axis treats rows alike through the vertical pairs.
// `removable` has one flag per bound of the chosen axis.
inline int redundant_boundary(const CellGrid& grid, const PairDecisions& d, Orientation axis,
                              const std::vector<bool>& removable, double merge_threshold = 0.5) {
  const bool columns = axis == Orientation::vertical;
  const int lanes = columns ? grid.cols() : grid.rows();
  const int across = columns ? grid.rows() : grid.cols();
  if (lanes < 2 || removable.size() != static_cast<std::size_t>(lanes + 1)) return -1;
  // Pair between lane k and lane k + 1 at position i of the other axis.
  auto pair = [&](int k, int i) -> const PairDecision& {
    return columns ? d.horizontal[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]
                   : d.vertical[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  };
  for (int k = 0; k < lanes; ++k) {
    bool dependent = true;
    bool any_merge = false;
    for (int i = 0; i < across && dependent; ++i) {
      const bool has_data = k > 0 ? pair(k - 1, i).right_data >= 0.5 : pair(k, i).left_data >= 0.5;
      const bool merged = (k > 0 && pair(k - 1, i).merge >= merge_threshold) ||
                          (k + 1 < lanes && pair(k, i).merge >= merge_threshold);
      any_merge = any_merge || merged;
      dependent = !has_data || merged;
    }
    if (!dependent || !any_merge) continue;
    if (k > 0 && removable[static_cast<std::size_t>(k)]) return k;
    if (k + 1 < lanes && removable[static_cast<std::size_t>(k + 1)]) return k + 1;
  }
  return -1;
}

// Rectangle of grid cells, inclusive.
struct Component {
  int row0 = 0;
  int col0 = 0;
  int row1 = 0;
  int col1 = 0;
  bool occupied = false;

  CellRef anchor() const noexcept { return {row0, col0}; }
  int cell_count() const noexcept { return (row1 - row0 + 1) * (col1 - col0 + 1); }
  bool contains(int r, int c) const noexcept { return r >= row0 && r <= row1 && c >= col0 && c <= col1; }
  bool intersects(const Component& o) const noexcept {
    return std::max(row0, o.row0) <= std::min(row1, o.row1) && std::max(col0, o.col0) <= std::min(col1, o.col1);
  }
  bool operator==(const Component& o) const noexcept {
    return row0 == o.row0 && col0 == o.col0 && row1 == o.row1 && col1 == o.col1;
  }
};

struct MergeResolution {
  int rows = 0;
  int cols = 0;
  std::vector<bool> occupancy;    // per cell, row-major
  std::vector<bool> merge_right;  // per cell; false in the last column
  std::vector<bool> merge_down;   // per cell; false in the last row
  std::vector<Component> components;  // sorted by anchor in reading order
  std::vector<int> component_of;      // per cell
  std::vector<std::string> warnings;

  const Component& component_at(int r, int c) const {
    return components[static_cast<std::size_t>(component_of[static_cast<std::size_t>(r * cols + c)])];
  }
};

namespace detail {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace detail

// Turns pairwise decisions into merged rectangular components. Components
// that are not rectangles are expanded to their bounding rectangle, and
// rectangles that then overlap are fused, until the partition is stable.
inline MergeResolution resolve_merges(const CellGrid& grid, const PairDecisions& d, double merge_threshold = 0.5) {
  MergeResolution m;
  m.rows = grid.rows();
  m.cols = grid.cols();
  const int n = m.rows * m.cols;
  m.occupancy.assign(static_cast<std::size_t>(n), false);
  m.merge_right.assign(static_cast<std::size_t>(n), false);
  m.merge_down.assign(static_cast<std::size_t>(n), false);
  auto at = [&](int r, int c) { return static_cast<std::size_t>(r * m.cols + c); };

  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c + 1 < m.cols; ++c) {
      const auto& p = d.horizontal.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
      if (p.left_data >= 0.5) m.occupancy[at(r, c)] = true;
      if (p.right_data >= 0.5) m.occupancy[at(r, c + 1)] = true;
      m.merge_right[at(r, c)] = p.merge >= merge_threshold;
    }
  for (int r = 0; r + 1 < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const auto& p = d.vertical.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
      if (p.left_data >= 0.5) m.occupancy[at(r, c)] = true;
      if (p.right_data >= 0.5) m.occupancy[at(r + 1, c)] = true;
      m.merge_down[at(r, c)] = p.merge >= merge_threshold;
    }
  if (n == 1 && !d.single.empty()) m.occupancy[0] = d.single[0];

  detail::DisjointSets sets(n);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      if (m.merge_right[at(r, c)]) sets.unite(r * m.cols + c, r * m.cols + c + 1);
      if (m.merge_down[at(r, c)]) sets.unite(r * m.cols + c, (r + 1) * m.cols + c);
    }
  std::vector<Component> comps;
  std::vector<int> root_to_comp(static_cast<std::size_t>(n), -1);
  std::vector<int> members(static_cast<std::size_t>(n), 0);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const int root = sets.find(r * m.cols + c);
      auto& slot = root_to_comp[static_cast<std::size_t>(root)];
      if (slot < 0) {
        slot = static_cast<int>(comps.size());
        comps.push_back({r, c, r, c, false});
      }
      auto& comp = comps[static_cast<std::size_t>(slot)];
      comp.row0 = std::min(comp.row0, r);
      comp.col0 = std::min(comp.col0, c);
      comp.row1 = std::max(comp.row1, r);
      comp.col1 = std::max(comp.col1, c);
      ++members[static_cast<std::size_t>(slot)];
    }
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (comps[i].cell_count() != members[i])
      m.warnings.push_back("merge component anchored at (" + std::to_string(comps[i].row0) + "," +
                           std::to_string(comps[i].col0) + ") expanded to its bounding rectangle");

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < comps.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < comps.size(); ++j)
        if (comps[i].intersects(comps[j])) {
          comps[i].row0 = std::min(comps[i].row0, comps[j].row0);
          comps[i].col0 = std::min(comps[i].col0, comps[j].col0);
          comps[i].row1 = std::max(comps[i].row1, comps[j].row1);
          comps[i].col1 = std::max(comps[i].col1, comps[j].col1);
          comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          break;
        }
  }
  std::sort(comps.begin(), comps.end(),
            [](const Component& a, const Component& b) { return std::tie(a.row0, a.col0) < std::tie(b.row0, b.col0); });
  m.component_of.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    auto& comp = comps[i];
    for (int r = comp.row0; r <= comp.row1; ++r)
      for (int c = comp.col0; c <= comp.col1; ++c) {
        m.component_of[at(r, c)] = static_cast<int>(i);
        comp.occupied = comp.occupied || m.occupancy[at(r, c)];
      }
  }
  m.components = std::move(comps);
  return m;
}

// Component boxes in original-image pixels: the working-crop box is scaled by
// the crop's ScaleMap, offset by the region origin and clamped to the region.
inline std::vector<Box> scale_cells_to_original(const MergeResolution& res, const CellGrid& grid, const ScaleMap& scale,
                                                const Region& region) {
  std::vector<Box> out;
  out.reserve(res.components.size());
  for (const auto& comp : res.components) {
    const Box w = grid.span_box(comp.row0, comp.col0, comp.row1, comp.col1);
    Box b{region.x_min + scale.to_original_x(w.x_min), region.y_min + round_px(w.y_min * scale.scale_y),
          region.x_min + scale.to_original_x(w.x_max), region.y_min + round_px(w.y_max * scale.scale_y)};
    b.x_min = std::clamp(b.x_min, region.x_min, region.x_max);
    b.x_max = std::clamp(b.x_max, region.x_min, region.x_max);
    b.y_min = std::clamp(b.y_min, region.y_min, region.y_max);
    b.y_max = std::clamp(b.y_max, region.y_min, region.y_max);
    out.push_back(b);
  }
  return out;
}

}  // namespace tablecut
