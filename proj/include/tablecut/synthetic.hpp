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
#include <array>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <opencv2/imgproc.hpp>

#include "tablecut/evaluation.hpp"

namespace tablecut {

struct SynthSpec {
  int rows = 4;
  int cols = 4;
  bool ruled = false;
  double density = 1.0;        // probability that a cell holds text
  bool spans = false;          // one header cell spanning two columns
  bool sparse_column = false;  // one interior column with a single text cell
  int thickness = 1;           // ruling line thickness, 1..3
  int page_width = 0;          // minimum page width; the table sits at a random offset
};

struct SyntheticTable {
  GrayImage image;
  GroundTruthDocument truth;
  std::vector<WordBox> words;
  // Boundary centres in page pixels, borders included.
  std::vector<int> col_edges;
  std::vector<int> row_edges;
  int sparse_col = -1;
  Box sparse_ink{0, 0, -1, -1};  // ink box of the sparse column's lone word; invalid if none
};

namespace detail {

inline constexpr std::array<const char*, 40> kLexicon = {
    "alpha",  "beta",   "gamma", "delta", "total",  "region", "north", "south", "east",  "west",
    "price",  "units",  "rate",  "year",  "grade",  "score",  "value", "mean",  "count", "item",
    "12",     "407",    "3.14",  "96.5",  "1,200",  "-7",     "0.05",  "88",    "2019",  "51%",
    "Apple",  "Orange", "Kiwi",  "Mango", "Salt",   "Iron",   "Zinc",  "Lead",  "Gold",  "Tin"};

inline constexpr std::array<const char*, 6> kLongLexicon = {"Quarterly", "Population", "Measurement",
                                                            "Annual-sum", "Headcount", "Temperature"};

inline constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;
inline constexpr double kFontScale = 0.5;
inline constexpr int kStroke = 2;
inline constexpr int kCellPad = 12;

struct TextExtent {
  int width;
  int ascent;
  int descent;
};

inline TextExtent measure(const std::string& s) {
  int base = 0;
  const cv::Size sz = cv::getTextSize(s, kFont, kFontScale, kStroke, &base);
  return {sz.width, sz.height, base};
}

}  // namespace detail

// Renders one table on a white page. Deterministic in (seed, spec).
inline SyntheticTable generate_synthetic(std::uint64_t seed, const SynthSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ContractViolation("synthetic tables need at least one row and column");
  if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw ContractViolation("density must lie in [0, 1]");
  if (spec.thickness < 1 || spec.thickness > 3) throw ContractViolation("ruling thickness must lie in [1, 3]");
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  const int rows = spec.rows;
  const int cols = spec.cols;
  std::vector<std::string> text(static_cast<std::size_t>(rows * cols));
  auto cell_text = [&](int r, int c) -> std::string& { return text[static_cast<std::size_t>(r * cols + c)]; };

  SyntheticTable out;
  if (spec.sparse_column && cols >= 3) out.sparse_col = uniform(1, cols - 2);
  const int sparse_row = out.sparse_col >= 0 ? uniform(0, rows - 1) : -1;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const bool fill = c == out.sparse_col ? r == sparse_row : (spec.density > 0.0 && chance(spec.density));
      if (fill) cell_text(r, c) = detail::kLexicon[static_cast<std::size_t>(uniform(0, 39))];
    }
  // Keep every row and column populated so the structure is observable.
  if (spec.density > 0.0) {
    for (int r = 0; r < rows; ++r) {
      bool any = false;
      for (int c = 0; c < cols; ++c) any = any || !cell_text(r, c).empty();
      if (!any) cell_text(r, 0) = detail::kLexicon[static_cast<std::size_t>(uniform(0, 39))];
    }
    for (int c = 0; c < cols; ++c) {
      if (c == out.sparse_col) continue;
      bool any = false;
      for (int r = 0; r < rows; ++r) any = any || !cell_text(r, c).empty();
      if (!any) cell_text(0, c) = detail::kLexicon[static_cast<std::size_t>(uniform(0, 39))];
    }
  }

  // Spanning header cell over columns (span_col, span_col + 1) in row 0.
  int span_col = -1;
  std::string span_text;
  if (spec.spans && cols >= 2 && spec.density > 0.0) {
    span_col = uniform(0, cols - 2);
    if (span_col == out.sparse_col || span_col + 1 == out.sparse_col) span_col = -1;
    if (span_col >= 0) {
      span_text = detail::kLongLexicon[static_cast<std::size_t>(uniform(0, 5))];
      cell_text(0, span_col).clear();
      cell_text(0, span_col + 1).clear();
    }
  }

  // Column widths fit the widest text; the span text must cross the seam.
  const int t = spec.ruled ? spec.thickness : 0;
  std::vector<int> width(static_cast<std::size_t>(cols), 0);
  int max_ascent = 0;
  int max_descent = 0;
  for (int c = 0; c < cols; ++c) {
    int w = detail::measure("00").width;
    for (int r = 0; r < rows; ++r)
      if (!cell_text(r, c).empty()) {
        const auto e = detail::measure(cell_text(r, c));
        w = std::max(w, e.width);
      }
    width[static_cast<std::size_t>(c)] = w + 2 * detail::kCellPad + t;
  }
  for (const auto* s : detail::kLexicon) {
    const auto e = detail::measure(s);
    max_ascent = std::max(max_ascent, e.ascent);
    max_descent = std::max(max_descent, e.descent);
  }
  if (span_col >= 0) {
    const int need = detail::measure(span_text).width + 2 * detail::kCellPad + 2 * t;
    auto& a = width[static_cast<std::size_t>(span_col)];
    auto& b = width[static_cast<std::size_t>(span_col + 1)];
    if (a + b < need) {
      const int extra = need - (a + b);
      a += extra / 2;
      b += extra - extra / 2;
    }
  }
  const int text_h = max_ascent + max_descent;
  const int row_h = static_cast<int>(text_h * 2.2) + uniform(0, 4) + t;

  const int table_w = std::accumulate(width.begin(), width.end(), 0);
  int margin_l = uniform(20, 60);
  const int margin_t = uniform(20, 60);
  int margin_r = uniform(20, 60);
  if (spec.page_width > table_w + margin_l + margin_r + 1) {
    const int slack = spec.page_width - table_w - 1;
    margin_l = uniform(20, slack - 20);
    margin_r = slack - margin_l;
  }
  const int margin_b = uniform(20, 60);
  out.col_edges.push_back(margin_l);
  for (int c = 0; c < cols; ++c) out.col_edges.push_back(out.col_edges.back() + width[static_cast<std::size_t>(c)]);
  out.row_edges.push_back(margin_t);
  for (int r = 0; r < rows; ++r) out.row_edges.push_back(out.row_edges.back() + row_h);
  const int page_w = out.col_edges.back() + margin_r + 1;
  const int page_h = out.row_edges.back() + margin_b + 1;

  cv::Mat page(page_h, page_w, CV_8UC1, cv::Scalar(255));
  const int lo = (t - 1) / 2;
  if (spec.ruled) {
    for (int x : out.col_edges) {
      const bool seam = span_col >= 0 && x == out.col_edges[static_cast<std::size_t>(span_col + 1)];
      const int y0 = seam ? out.row_edges[1] : out.row_edges.front();
      cv::rectangle(page, cv::Point(x - lo, y0 - lo), cv::Point(x - lo + t - 1, out.row_edges.back() - lo + t - 1),
                    cv::Scalar(0), cv::FILLED);
      if (seam)
        cv::rectangle(page, cv::Point(x - lo, out.row_edges.front() - lo), cv::Point(x - lo + t - 1, out.row_edges.front() - lo + t - 1),
                      cv::Scalar(0), cv::FILLED);
    }
    for (int y : out.row_edges)
      cv::rectangle(page, cv::Point(out.col_edges.front() - lo, y - lo), cv::Point(out.col_edges.back() - lo + t - 1, y - lo + t - 1),
                    cv::Scalar(0), cv::FILLED);
  }

  auto baseline_of = [&](int r) {
    const int top = out.row_edges[static_cast<std::size_t>(r)];
    return top + (row_h - text_h) / 2 + max_ascent;
  };
  auto draw = [&](const std::string& s, int x, int r) {
    const auto e = detail::measure(s);
    const int base = baseline_of(r);
    cv::putText(page, s, cv::Point(x, base), detail::kFont, detail::kFontScale, cv::Scalar(0), detail::kStroke,
                cv::LINE_8);
    const Box box{x, base - e.ascent, x + e.width - 1, base + e.descent};
    out.words.push_back({box, s});
    return box;
  };

  GroundTruthTable table;
  const int half_hi = t - 1 - lo;
  table.region = {out.col_edges.front() - lo, out.row_edges.front() - lo, out.col_edges.back() + half_hi,
                  out.row_edges.back() + half_hi};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (r == 0 && span_col >= 0 && c == span_col + 1) continue;
      GroundTruthCell cell{r, c, 1, 1, {}};
      if (r == 0 && c == span_col) {
        cell.col_span = 2;
        cell.text = span_text;
        const int seam = out.col_edges[static_cast<std::size_t>(c + 1)];
        draw(span_text, seam - detail::measure(span_text).width / 2, r);
      } else if (!cell_text(r, c).empty()) {
        cell.text = cell_text(r, c);
        const Box b = draw(cell.text, out.col_edges[static_cast<std::size_t>(c)] + detail::kCellPad + t, r);
        if (c == out.sparse_col) out.sparse_ink = b;
      }
      table.cells.push_back(std::move(cell));
    }
  out.truth.tables.push_back(std::move(table));

  std::vector<std::uint8_t> px(static_cast<std::size_t>(page_w) * static_cast<std::size_t>(page_h));
  for (int y = 0; y < page_h; ++y) std::copy_n(page.ptr<std::uint8_t>(y), page_w, px.begin() + static_cast<std::ptrdiff_t>(y) * page_w);
  out.image = GrayImage(page_w, page_h, std::move(px));
  return out;
}

}  // namespace tablecut
