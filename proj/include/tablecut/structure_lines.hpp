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

#include "tablecut/line_detect.hpp"

namespace tablecut {

struct FootprintParams {
  double word_gap_frac = 0.8;  // horizontal gaps up to this fraction of the line height are closed
  int line_gap = 2;            // rows gaps up to this size stay inside one text line
};

// Text-line blocks of a data mask. Rows holding data form text lines; inside
// each line, columns holding data form runs joined across word-sized gaps,
// and each run is filled over the full line height.
inline Mask content_footprint(const Mask& data, const FootprintParams& p = {}) {
  const int w = data.width();
  const int h = data.height();
  Mask out(w, h, 0);
  std::vector<Interval> lines;
  for (int y = 0; y < h; ++y) {
    const auto row = data.row(y);
    if (std::none_of(row.begin(), row.end(), [](std::uint8_t v) { return v != 0; })) continue;
    if (!lines.empty() && y - lines.back().last - 1 <= p.line_gap)
      lines.back().last = y;
    else
      lines.push_back({y, y});
  }
  if (lines.empty()) return out;
  // Slivers no taller than line_gap are residue, not text, and stay out of
  // the median.
  std::vector<int> heights;
  for (const auto& l : lines)
    if (l.length() > p.line_gap) heights.push_back(l.length());
  if (heights.empty())
    for (const auto& l : lines) heights.push_back(l.length());
  std::nth_element(heights.begin(), heights.begin() + static_cast<std::ptrdiff_t>((heights.size() - 1) / 2), heights.end());
  const int gap = std::max(1, round_px(p.word_gap_frac * heights[(heights.size() - 1) / 2]));
  std::vector<std::uint8_t> any(static_cast<std::size_t>(w));
  for (const auto& l : lines) {
    std::fill(any.begin(), any.end(), 0);
    for (int y = l.first; y <= l.last; ++y) {
      const auto row = data.row(y);
      for (int x = 0; x < w; ++x) any[static_cast<std::size_t>(x)] |= row[static_cast<std::size_t>(x)];
    }
    int run_start = -1;
    int run_end = -1;
    auto flush = [&] {
      if (run_start < 0) return;
      for (int y = l.first; y <= l.last; ++y) {
        auto row = out.row(y);
        std::fill(row.begin() + run_start, row.begin() + run_end + 1, std::uint8_t{1});
      }
    };
    for (int x = 0; x < w; ++x) {
      if (!any[static_cast<std::size_t>(x)]) continue;
      if (run_start >= 0 && x - run_end - 1 <= gap) {
        run_end = x;
      } else {
        flush();
        run_start = run_end = x;
      }
    }
    flush();
  }
  return out;
}

// Per-coordinate fraction of the perpendicular span that is free of data.
struct QualityProfile {
  Orientation axis = Orientation::vertical;
  std::vector<double> scores;
};

// Vertical axis scores columns, horizontal axis scores rows.
inline QualityProfile quality_profile(const Mask& mask, Orientation axis) {
  if (mask.width() < 1 || mask.height() < 1) throw DegenerateInput("quality profile needs a non-empty mask");
  QualityProfile p{axis, {}};
  if (axis == Orientation::vertical) {
    std::vector<int> data(static_cast<std::size_t>(mask.width()), 0);
    for (int y = 0; y < mask.height(); ++y) {
      const auto row = mask.row(y);
      for (int x = 0; x < mask.width(); ++x) data[static_cast<std::size_t>(x)] += row[static_cast<std::size_t>(x)] != 0;
    }
    p.scores.reserve(data.size());
    for (int d : data) p.scores.push_back(static_cast<double>(mask.height() - d) / mask.height());
  } else {
    p.scores.reserve(static_cast<std::size_t>(mask.height()));
    for (int y = 0; y < mask.height(); ++y) {
      const auto row = mask.row(y);
      const auto d = std::count_if(row.begin(), row.end(), [](std::uint8_t v) { return v != 0; });
      p.scores.push_back(static_cast<double>(mask.width() - d) / mask.width());
    }
  }
  return p;
}

struct InferredLineSet {
  Orientation axis = Orientation::vertical;
  std::vector<bool> valid;
  double threshold_final = 0.0;
  int group_count = 0;
  int iterations = 0;
};

inline constexpr double kThresholdEps = 1e-9;

inline std::vector<bool> valid_at(const std::vector<double>& scores, double threshold) {
  std::vector<bool> v(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) v[i] = scores[i] >= threshold - kThresholdEps;
  return v;
}

// Maximal runs of true entries.
inline int count_runs(const std::vector<bool>& v) {
  int runs = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] && (i == 0 || !v[i - 1])) ++runs;
  return runs;
}

// Adaptive threshold distance. Starting at `t0`, the threshold rises by
// `delta` for as long as the number of separable line groups does not drop;
// the line set of the last accepted threshold is returned. Thresholds above
// 1.0 are never tested.
inline InferredLineSet adaptive_inferred_lines(const QualityProfile& profile, double t0 = 0.6, double delta = 0.02) {
  if (!(delta > 0.0 && delta <= 0.1)) throw ContractViolation("delta must lie in (0, 0.1]");
  if (!(t0 > 0.0 && t0 < 1.0)) throw ContractViolation("starting threshold must lie in (0, 1)");
  InferredLineSet out;
  out.axis = profile.axis;
  out.threshold_final = t0;
  out.valid.assign(profile.scores.size(), false);
  int best = 0;
  for (int step = 0;; ++step) {
    const double t = t0 + step * delta;
    if (t > 1.0 + kThresholdEps) break;
    ++out.iterations;
    auto candidate = valid_at(profile.scores, t);
    const int groups = count_runs(candidate);
    if (groups < best) break;
    best = groups;
    out.valid = std::move(candidate);
    out.threshold_final = t;
    out.group_count = groups;
  }
  return out;
}

// Contiguous inclusive interval of inferred-line coordinates.
struct LineGroup {
  int first = 0;
  int last = 0;
  bool operator==(const LineGroup&) const = default;
};

// Runs of valid coordinates, joining runs separated by at most `join_gap`.
inline std::vector<LineGroup> group_inferred(const InferredLineSet& lines, int join_gap = 2) {
  std::vector<LineGroup> groups;
  const int n = static_cast<int>(lines.valid.size());
  for (int i = 0; i < n;) {
    if (!lines.valid[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && lines.valid[static_cast<std::size_t>(j + 1)]) ++j;
    if (!groups.empty() && i - groups.back().last - 1 <= join_gap)
      groups.back().last = j;
    else
      groups.push_back({i, j});
    i = j + 1;
  }
  return groups;
}

// Drops groups that contain a real line or lie within `proximity` of one.
inline std::vector<LineGroup> suppress_near_real(const std::vector<LineGroup>& groups,
                                                 const std::vector<RealLine>& real, int proximity = 5) {
  std::vector<LineGroup> kept;
  for (const auto& g : groups) {
    const bool near = std::any_of(real.begin(), real.end(), [&](const RealLine& r) {
      return r.coordinate >= g.first - proximity && r.coordinate <= g.last + proximity;
    });
    if (!near) kept.push_back(g);
  }
  return kept;
}

// Groups touching the crop edge are represented by the implicit border line.
inline std::vector<LineGroup> drop_border_groups(const std::vector<LineGroup>& groups, int span) {
  std::vector<LineGroup> kept;
  for (const auto& g : groups)
    if (g.first > 0 && g.last < span - 1) kept.push_back(g);
  return kept;
}

inline constexpr int kSmaRadius = 2;
inline constexpr double kSmaTieEps = 1e-12;

// Five-wide moving average of quality scores over the group. Coordinates
// outside the group, or not valid, contribute zero.
inline double sma_at(const LineGroup& g, const QualityProfile& profile, const std::vector<bool>& valid, int c) {
  double sum = 0;
  const int n = static_cast<int>(profile.scores.size());
  for (int k = c - kSmaRadius; k <= c + kSmaRadius; ++k) {
    if (k < g.first || k > g.last || k < 0 || k >= n) continue;
    if (!valid.empty() && !valid[static_cast<std::size_t>(k)]) continue;
    sum += profile.scores[static_cast<std::size_t>(k)];
  }
  return sum / (2 * kSmaRadius + 1);
}

// The coordinate of maximum SMA; ties go to the coordinate nearest the group
// centre, then to the smaller coordinate.
inline int sma_select(const LineGroup& g, const QualityProfile& profile, const std::vector<bool>& valid = {}) {
  if (g.last < g.first) throw ContractViolation("sma_select needs a non-empty group");
  const int twice_centre = g.first + g.last;
  int best = g.first;
  double best_sma = -1.0;
  for (int c = g.first; c <= g.last; ++c) {
    const double s = sma_at(g, profile, valid, c);
    if (s > best_sma + kSmaTieEps) {
      best = c;
      best_sma = s;
    } else if (std::abs(s - best_sma) <= kSmaTieEps && std::abs(2 * c - twice_centre) < std::abs(2 * best - twice_centre)) {
      best = c;
    }
  }
  return best;
}

// Sorted structural coordinates of one axis, borders included.
struct FinalLines {
  Orientation axis = Orientation::vertical;
  std::vector<int> coordinates;
};

// Borders first, then real lines, then inferred lines; within a class the
// smaller coordinate wins. A candidate closer than `min_cell` to an accepted
// coordinate is dropped.
inline FinalLines finalize_lines(const std::vector<int>& real, const std::vector<int>& inferred, Orientation axis,
                                 int span, int min_cell = 8) {
  if (span < 2) throw DegenerateInput("final lines need a span of at least 2 pixels");
  std::vector<int> accepted{0, span - 1};
  auto offer = [&](std::vector<int> candidates) {
    std::sort(candidates.begin(), candidates.end());
    for (int c : candidates) {
      if (c < 0 || c > span - 1) continue;
      const bool clear = std::all_of(accepted.begin(), accepted.end(), [&](int a) { return std::abs(a - c) >= min_cell; });
      if (clear) accepted.push_back(c);
    }
  };
  offer(real);
  offer(inferred);
  std::sort(accepted.begin(), accepted.end());
  accepted.erase(std::unique(accepted.begin(), accepted.end()), accepted.end());
  return {axis, accepted};
}

// Same, taking detected real lines: a ruling whose band reaches a crop edge
// is that edge's border and adds no coordinate of its own.
inline FinalLines finalize_detected_lines(const std::vector<RealLine>& real, const std::vector<int>& inferred, Orientation axis,
                                          int span, int min_cell = 8) {
  std::vector<int> coords;
  for (const auto& r : real)
    if (r.coordinate - r.half_width > 0 && r.coordinate + r.half_width < span - 1) coords.push_back(r.coordinate);
  return finalize_lines(coords, inferred, axis, span, min_cell);
}

struct StructureParams {
  double t0 = 0.6;
  double delta = 0.02;
  int join_gap = 2;
  int proximity = 5;
  int min_cell = 8;
};

struct AxisStructure {
  std::vector<RealLine> real;
  QualityProfile profile;
  InferredLineSet inferred;
  std::vector<LineGroup> groups;     // after suppression
  std::vector<int> selected;         // SMA picks
  FinalLines final_lines;
};

// Full per-axis fusion of real and inferred lines.
inline AxisStructure structure_axis(const Mask& mask, const std::vector<RealLine>& real, Orientation axis,
                                    const StructureParams& p = {}) {
  AxisStructure s;
  s.real = real;
  s.profile = quality_profile(mask, axis);
  s.inferred = adaptive_inferred_lines(s.profile, p.t0, p.delta);
  const int span = static_cast<int>(s.profile.scores.size());
  s.groups = drop_border_groups(suppress_near_real(group_inferred(s.inferred, p.join_gap), real, p.proximity), span);
  for (const auto& g : s.groups) s.selected.push_back(sma_select(g, s.profile, s.inferred.valid));
  s.final_lines = finalize_detected_lines(real, s.selected, axis, span, p.min_cell);
  return s;
}

}  // namespace tablecut
