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

#include <gtest/gtest.h>

#include <random>

#include <opencv2/imgproc.hpp>

#include "oracles.hpp"
#include "tablecut/pipeline.hpp"
#include "tablecut/synthetic.hpp"

using namespace tablecut;

namespace {

FinalLines lines(Orientation o, std::vector<int> c) { return {o, std::move(c)}; }

CellGrid grid_of(std::vector<int> cols, std::vector<int> rows) {
  return build_grid(lines(Orientation::vertical, std::move(cols)), lines(Orientation::horizontal, std::move(rows)));
}

GrayImage with_text(GrayImage img, const std::string& text, int centre_x, int baseline) {
  cv::Mat m(img.height(), img.width(), CV_8UC1, img.data().data());
  int base = 0;
  const auto size = cv::getTextSize(text, cv::FONT_HERSHEY_SIMPLEX, 1.0, 2, &base);
  cv::putText(m, text, {centre_x - size.width / 2, baseline}, cv::FONT_HERSHEY_SIMPLEX, 1.0, cv::Scalar(0), 2, cv::LINE_8);
  return img;
}

PairDecisions blank_decisions(int rows, int cols) {
  PairDecisions d;
  d.horizontal.assign(static_cast<std::size_t>(rows), std::vector<PairDecision>(static_cast<std::size_t>(std::max(0, cols - 1))));
  d.vertical.assign(static_cast<std::size_t>(std::max(0, rows - 1)), std::vector<PairDecision>(static_cast<std::size_t>(cols)));
  return d;
}

std::vector<oracle::Rect> rects_of(const MergeResolution& m) {
  std::vector<oracle::Rect> out;
  for (const auto& c : m.components) out.push_back({c.row0, c.col0, c.row1, c.col1});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(BuildGrid, Examples) {
  const auto g = grid_of({0, 100, 200}, {0, 50});
  EXPECT_EQ(g.cols(), 2);
  EXPECT_EQ(g.rows(), 1);
  EXPECT_EQ(g.cell_box(0, 1), (Box{100, 0, 200, 50}));
  const auto single = grid_of({0, 99}, {0, 49});
  EXPECT_EQ(single.rows() * single.cols(), 1);
}

TEST(BuildGrid, NeedsTwoCoordinatesPerAxis) {
  EXPECT_THROW(grid_of({0}, {0, 10}), DegenerateInput);
  EXPECT_THROW(grid_of({0, 10}, {}), DegenerateInput);
  EXPECT_THROW(grid_of({0, 10, 10}, {0, 10}), DegenerateInput);
}

TEST(PreparePair, HorizontalPairSeamAtCentre) {
  GrayImage crop(100, 20, 255);
  fill_box<std::uint8_t>(crop, {0, 0, 49, 19}, 0);  // left cell black, right cell white
  const auto g = grid_of({0, 49, 99}, {0, 19});
  const auto v = prepare_pair(crop, g, {0, 0}, {0, 1});
  EXPECT_EQ(v.width(), 200);
  EXPECT_EQ(v.height(), 100);
  EXPECT_LT(v(50, 50), 128);
  EXPECT_GT(v(150, 50), 128);
}

TEST(PreparePair, VerticalPairIsRotatedUpperToLeft) {
  GrayImage crop(40, 100, 255);
  fill_box<std::uint8_t>(crop, {0, 0, 39, 49}, 0);  // upper cell black
  const auto g = grid_of({0, 39}, {0, 49, 99});
  const auto v = prepare_pair(crop, g, {1, 0}, {0, 0});  // order does not matter
  EXPECT_EQ(v.width(), 200);
  EXPECT_EQ(v.height(), 100);
  EXPECT_LT(v(50, 50), 128);
  EXPECT_GT(v(150, 50), 128);
}

TEST(PreparePair, AsymmetricCellsBothFill100) {
  GrayImage crop(120, 40, 0);
  const auto g = grid_of({0, 29, 119}, {0, 9});
  const auto v = prepare_pair(crop, g, {0, 0}, {0, 1});
  EXPECT_EQ(v.width(), 200);
  EXPECT_EQ(v.height(), 100);
  for (auto p : v.data()) EXPECT_EQ(p, 0);
}

TEST(PreparePair, AlwaysTwoHundredByHundred) {
  std::mt19937 rng(2);
  for (int i = 0; i < 100; ++i) {
    const int w1 = 1 + static_cast<int>(rng() % 150);
    const int w2 = 1 + static_cast<int>(rng() % 150);
    const int h = 1 + static_cast<int>(rng() % 150);
    GrayImage crop(w1 + w2 + 1, h + 1, 200);
    const auto v = prepare_pair(crop, grid_of({0, w1, w1 + w2}, {0, h}), {0, 0}, {0, 1});
    EXPECT_EQ(v.width(), 200);
    EXPECT_EQ(v.height(), 100);
  }
}

TEST(PreparePair, NonAdjacentIsContractViolation) {
  const auto g = grid_of({0, 10, 20, 30}, {0, 10, 20});
  GrayImage crop(31, 21, 255);
  EXPECT_THROW(prepare_pair(crop, g, {0, 0}, {0, 2}), ContractViolation);
  EXPECT_THROW(prepare_pair(crop, g, {0, 0}, {1, 1}), ContractViolation);
}

TEST(DefaultClassifier, WhiteViewIsAllZero) {
  EXPECT_EQ(DefaultMergeClassifier{}(GrayImage(200, 100, 255)), (PairDecision{0, 0, 0}));
}

TEST(DefaultClassifier, LeftTextOnly) {
  const auto v = with_text(GrayImage(200, 100, 255), "Grade", 50, 60);
  EXPECT_EQ(DefaultMergeClassifier{}(v), (PairDecision{1, 0, 0}));
}

TEST(DefaultClassifier, WordAcrossSeamMerges) {
  const auto v = with_text(GrayImage(200, 100, 255), "Grade", 100, 60);
  EXPECT_EQ(DefaultMergeClassifier{}(v), (PairDecision{1, 1, 1}));
}

TEST(DefaultClassifier, SeparateWordsDoNotMerge) {
  auto v = with_text(GrayImage(200, 100, 255), "ab", 45, 60);
  v = with_text(std::move(v), "cd", 155, 60);
  EXPECT_EQ(DefaultMergeClassifier{}(v), (PairDecision{1, 1, 0}));
}

TEST(DefaultClassifier, WrongViewSizeIsContractViolation) {
  EXPECT_THROW(DefaultMergeClassifier{}(GrayImage(100, 100, 255)), ContractViolation);
}

TEST(DefaultClassifier, Deterministic) {
  const auto v = with_text(GrayImage(200, 100, 255), "Grade", 100, 60);
  const DefaultMergeClassifier c;
  EXPECT_EQ(c(v), c(v));
}

TEST(ResolveMerges, NoFlagsKeepsEveryCell) {
  const auto g = grid_of({0, 10, 20, 30}, {0, 10, 20});
  const auto m = resolve_merges(g, blank_decisions(2, 3));
  EXPECT_EQ(m.components.size(), 6u);
  for (const auto& c : m.components) EXPECT_EQ(c.cell_count(), 1);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(ResolveMerges, RowChainIsOneComponent) {
  const auto g = grid_of({0, 10, 20, 30}, {0, 10, 20});
  auto d = blank_decisions(2, 3);
  d.horizontal[0][0].merge = 1;
  d.horizontal[0][1].merge = 1;
  const auto m = resolve_merges(g, d);
  ASSERT_EQ(m.components.size(), 4u);
  EXPECT_EQ(m.components[0], (Component{0, 0, 0, 2, false}));
  EXPECT_EQ(m.component_at(0, 2).anchor(), (CellRef{0, 0}));
}

TEST(ResolveMerges, LShapeBecomesTwoByTwo) {
  const auto g = grid_of({0, 10, 20}, {0, 10, 20});
  auto d = blank_decisions(2, 2);
  d.horizontal[0][0].merge = 1;
  d.vertical[0][0].merge = 1;
  const auto m = resolve_merges(g, d);
  ASSERT_EQ(m.components.size(), 1u);
  EXPECT_EQ(m.components[0], (Component{0, 0, 1, 1, false}));
  EXPECT_EQ(m.warnings.size(), 1u);
}

TEST(ResolveMerges, ThresholdIsInclusive) {
  const auto g = grid_of({0, 10, 20}, {0, 10});
  auto d = blank_decisions(1, 2);
  d.horizontal[0][0].merge = 0.5;
  EXPECT_EQ(resolve_merges(g, d, 0.5).components.size(), 1u);
  EXPECT_EQ(resolve_merges(g, d, 0.51).components.size(), 2u);
}

TEST(ResolveMerges, OccupancyFromEitherHalf) {
  const auto g = grid_of({0, 10, 20}, {0, 10, 20});
  auto d = blank_decisions(2, 2);
  d.horizontal[1][0].right_data = 1;
  d.vertical[0][0].left_data = 1;
  const auto m = resolve_merges(g, d);
  EXPECT_EQ(m.occupancy, (std::vector<bool>{true, false, false, true}));
  EXPECT_TRUE(m.component_at(0, 0).occupied);
  EXPECT_FALSE(m.component_at(0, 1).occupied);
}

TEST(ResolveMerges, PartitionsAndMatchesOracle) {
  std::mt19937 rng(13);
  for (int i = 0; i < 300; ++i) {
    const int rows = 1 + static_cast<int>(rng() % 6);
    const int cols = 1 + static_cast<int>(rng() % 6);
    std::vector<int> cb(static_cast<std::size_t>(cols + 1));
    std::vector<int> rb(static_cast<std::size_t>(rows + 1));
    for (int k = 0; k <= cols; ++k) cb[static_cast<std::size_t>(k)] = 10 * k;
    for (int k = 0; k <= rows; ++k) rb[static_cast<std::size_t>(k)] = 10 * k;
    auto d = blank_decisions(rows, cols);
    std::vector<std::vector<bool>> right(static_cast<std::size_t>(rows), std::vector<bool>(static_cast<std::size_t>(cols), false));
    std::vector<std::vector<bool>> down(static_cast<std::size_t>(rows), std::vector<bool>(static_cast<std::size_t>(cols), false));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c + 1 < cols; ++c)
        if (rng() % 4 == 0) {
          d.horizontal[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].merge = 1;
          right[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = true;
        }
    for (int r = 0; r + 1 < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (rng() % 4 == 0) {
          d.vertical[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].merge = 1;
          down[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = true;
        }
    const auto m = resolve_merges(grid_of(cb, rb), d);
    EXPECT_EQ(rects_of(m), oracle::merge_components(rows, cols, right, down));
    int total = 0;
    for (const auto& c : m.components) total += c.cell_count();
    EXPECT_EQ(total, rows * cols);
    for (std::size_t a = 0; a < m.components.size(); ++a)
      for (std::size_t b = a + 1; b < m.components.size(); ++b) EXPECT_FALSE(m.components[a].intersects(m.components[b]));
  }
}

TEST(ScaleCells, UnitScaleIsIdentity) {
  const auto g = grid_of({10, 20}, {30, 40});
  const auto m = resolve_merges(g, blank_decisions(1, 1));
  EXPECT_EQ(scale_cells_to_original(m, g, ScaleMap{}, Region{0, 0, 999, 999}), (std::vector<Box>{{10, 30, 20, 40}}));
}

TEST(ScaleCells, ScaleAndOffset) {
  const auto g = grid_of({10, 20}, {30, 40});
  const auto m = resolve_merges(g, blank_decisions(1, 1));
  const auto boxes = scale_cells_to_original(m, g, ScaleMap{2.0, 2.0, 0, 0}, Region{100, 50, 999, 999});
  EXPECT_EQ(boxes, (std::vector<Box>{{120, 110, 140, 130}}));
}

TEST(ScaleCells, ClampsToRegion) {
  const auto g = grid_of({0, 60}, {0, 60});
  const auto m = resolve_merges(g, blank_decisions(1, 1));
  const auto boxes = scale_cells_to_original(m, g, ScaleMap{1.0, 1.0, 0, 0}, Region{100, 50, 149, 99});
  EXPECT_EQ(boxes, (std::vector<Box>{{100, 50, 149, 99}}));
}

TEST(CellGridPipeline, SpanningHeaderYieldsOneTwoCellComponent) {
  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec;
    spec.rows = 4;
    spec.cols = 4;
    spec.ruled = seed % 2 == 0;
    spec.spans = true;
    const auto t = generate_synthetic(seed, spec);
    const auto s = analyze_table(t.image, t.truth.tables[0].region, PipelineConfig{}, DefaultMergeClassifier{});
    int doubles = 0;
    int others = 0;
    for (const auto& c : s.resolution.components) {
      if (c.cell_count() == 2 && c.row0 == c.row1) ++doubles;
      else if (c.cell_count() != 1) ++others;
    }
    matched += doubles == 1 && others == 0 && s.grid.rows() == 4 && s.grid.cols() == 4;
  }
  EXPECT_GE(matched, 9);
}

TEST(CellGridPipeline, ClassifierSwapKeepsGeometry) {
  const auto t = generate_synthetic(3, SynthSpec{});
  const Region r = t.truth.tables[0].region;
  const auto a = analyze_structure(t.image, r, PipelineConfig{});
  const MergeClassifier never = [](const GrayImage&) { return PairDecision{1, 1, 0}; };
  const MergeClassifier always = [](const GrayImage&) { return PairDecision{1, 1, 1}; };
  const auto d1 = classify_pairs(a.data_only, a.grid, never);
  const auto d2 = classify_pairs(a.data_only, a.grid, always);
  const auto m1 = resolve_merges(a.grid, d1);
  const auto m2 = resolve_merges(a.grid, d2);
  EXPECT_EQ(m1.rows, m2.rows);
  EXPECT_EQ(m1.cols, m2.cols);
  EXPECT_EQ(m1.components.size(), static_cast<std::size_t>(m1.rows * m1.cols));
  EXPECT_EQ(m2.components.size(), 1u);
}
