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

#include "oracles.hpp"
#include "tablecut/synthetic.hpp"

using namespace tablecut;

namespace {

TableModel text_grid(std::vector<std::vector<std::string>> rows) {
  TableModel m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const auto& s = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      m.at(r, c) = s.empty() ? TableCell::make_empty() : TableCell::make_text(s);
    }
  return m;
}

using H = std::vector<AdjacencyRelation>;
constexpr auto kH = RelationDirection::horizontal;
constexpr auto kV = RelationDirection::vertical;

const char* kSpanningTruth = R"(<?xml version="1.0" encoding="UTF-8"?>
<document image="grades.png">
  <table x0="10" y0="20" x1="610" y1="220">
    <cell row="0" col="0" rowspan="2" colspan="1">Typ</cell>
    <cell row="0" col="1" rowspan="1" colspan="2">A Grade</cell>
    <cell row="0" col="3" rowspan="1" colspan="2">B Grade</cell>
    <cell row="1" col="1" rowspan="1" colspan="1">min</cell>
    <cell row="1" col="2" rowspan="1" colspan="1">max</cell>
    <cell row="1" col="3" rowspan="1" colspan="1">min</cell>
    <cell row="1" col="4" rowspan="1" colspan="1">max</cell>
  </table>
</document>
)";

}  // namespace

TEST(AreaMetrics, IdenticalIsPerfect) {
  const std::vector<Region> r{{0, 0, 9, 9}, {20, 20, 29, 39}};
  const auto m = area_precision_recall(r, r);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(AreaMetrics, DisjointIsZero) {
  const auto m = area_precision_recall({{0, 0, 9, 9}}, {{10, 10, 19, 19}});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
}

TEST(AreaMetrics, QuarterAndHalf) {
  const auto m = area_precision_recall({{0, 0, 9, 9}}, {{5, 5, 14, 9}});
  EXPECT_DOUBLE_EQ(m.precision, 0.25);
  EXPECT_DOUBLE_EQ(m.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 0.25 * 0.5 / 0.75);
}

TEST(AreaMetrics, EmptySetConventions) {
  EXPECT_EQ(area_precision_recall({}, {}).precision, 1.0);
  EXPECT_EQ(area_precision_recall({}, {}).recall, 1.0);
  EXPECT_EQ(area_precision_recall({}, {{0, 0, 1, 1}}).precision, 0.0);
  EXPECT_EQ(area_precision_recall({{0, 0, 1, 1}}, {}).recall, 1.0);
}

TEST(AreaMetrics, OverlappingPredictionsCountOnce) {
  const auto m = area_precision_recall({{0, 0, 9, 9}, {0, 0, 9, 9}, {5, 0, 14, 9}}, {{0, 0, 14, 9}});
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
}

TEST(AreaMetrics, MatchesRasterOracle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto a = oracle::random_boxes(rng, 5, 60);
    const auto b = oracle::random_boxes(rng, 5, 60);
    const auto m = area_precision_recall(a, b);
    const auto o = oracle::area_raster(a, b);
    EXPECT_NEAR(m.precision, o.precision, 1e-9);
    EXPECT_NEAR(m.recall, o.recall, 1e-9);
    EXPECT_NEAR(m.f1, o.f1, 1e-9);
  }
}

TEST(AreaMetrics, SwappingSidesSwapsPrecisionAndRecall) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    auto a = oracle::random_boxes(rng, 4, 50);
    auto b = oracle::random_boxes(rng, 4, 50);
    if (a.empty() || b.empty()) continue;
    const auto ab = area_precision_recall(a, b);
    const auto ba = area_precision_recall(b, a);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
  }
}

TEST(AdjacencyRelations, SingleRow) {
  EXPECT_EQ(adjacency_relations(text_grid({{"a", "b"}})), (H{make_relation("a", "b", kH)}));
}

TEST(AdjacencyRelations, TwoByTwoHasFour) {
  const auto rel = adjacency_relations(text_grid({{"a", "b"}, {"c", "d"}}));
  H expected{make_relation("a", "b", kH), make_relation("c", "d", kH), make_relation("a", "c", kV),
             make_relation("b", "d", kV)};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(rel, expected);
}

TEST(AdjacencyRelations, EmptyCellsAreSkipped) {
  EXPECT_EQ(adjacency_relations(text_grid({{"a", "", "b"}})), (H{make_relation("a", "b", kH)}));
}

TEST(AdjacencyRelations, SpansAreCrossed) {
  TableModel m(2, 3);
  m.at(0, 0) = TableCell::make_text("head");
  m.at(0, 1) = TableCell::make_extend(ExtendDirection::left);
  m.at(0, 2) = TableCell::make_text("tail");
  m.at(1, 0) = TableCell::make_text("x");
  m.at(1, 1) = TableCell::make_text("y");
  m.at(1, 2) = TableCell::make_text("z");
  const auto rel = adjacency_relations(m);
  EXPECT_EQ(std::count(rel.begin(), rel.end(), make_relation("head", "tail", kH)), 1);
  EXPECT_EQ(std::count(rel.begin(), rel.end(), make_relation("head", "x", kV)), 1);
  EXPECT_EQ(rel.size(), 5u);
}

TEST(AdjacencyRelations, TextIsNormalized) {
  EXPECT_EQ(adjacency_relations(text_grid({{"A  Grade", "B , C"}})), (H{make_relation("a grade", "b,c", kH)}));
  EXPECT_EQ(adjacency_relations(text_grid({{"A  Grade", "b"}}), true), (H{make_relation("A  Grade", "b", kH)}));
}

TEST(AdjacencyRelations, MatchesQuadraticOracle) {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const auto t = oracle::random_table(rng, 4);
    EXPECT_EQ(adjacency_relations(t.model), oracle::relations_quadratic(t.cells));
  }
}

TEST(AdjacencyRelations, ModelAndGroundTruthAgree) {
  const auto doc = parse_groundtruth(kSpanningTruth);
  TableModel m(2, 5);
  m.at(0, 0) = TableCell::make_text("Typ");
  m.at(1, 0) = TableCell::make_extend(ExtendDirection::up);
  m.at(0, 1) = TableCell::make_text("A Grade");
  m.at(0, 2) = TableCell::make_extend(ExtendDirection::left);
  m.at(0, 3) = TableCell::make_text("B Grade");
  m.at(0, 4) = TableCell::make_extend(ExtendDirection::left);
  for (int c = 1; c < 5; ++c) m.at(1, c) = TableCell::make_text(c % 2 ? "min" : "max");
  EXPECT_EQ(adjacency_relations(m), adjacency_relations(doc.tables[0]));
}

TEST(IcdarScore, PerfectExtraction) {
  const auto doc = parse_groundtruth(kSpanningTruth);
  TableModel m(2, 5);
  m.at(0, 0) = TableCell::make_text("Typ");
  m.at(1, 0) = TableCell::make_extend(ExtendDirection::up);
  m.at(0, 1) = TableCell::make_text("A Grade");
  m.at(0, 2) = TableCell::make_extend(ExtendDirection::left);
  m.at(0, 3) = TableCell::make_text("B Grade");
  m.at(0, 4) = TableCell::make_extend(ExtendDirection::left);
  for (int c = 1; c < 5; ++c) m.at(1, c) = TableCell::make_text(c % 2 ? "min" : "max");
  const auto rep = icdar_score({{"grades", {m}}}, {{"grades", doc}});
  ASSERT_EQ(rep.per_document.size(), 1u);
  EXPECT_EQ(rep.average.precision, 1.0);
  EXPECT_EQ(rep.average.recall, 1.0);
  EXPECT_EQ(rep.average.f1, 1.0);
}

TEST(IcdarScore, MissingRelationGivesRecallThreeQuarters) {
  GroundTruthDocument truth;
  truth.tables.push_back({{0, 0, 10, 10}, {{0, 0, 1, 1, "a"}, {0, 1, 1, 1, "b"}, {1, 0, 1, 1, "c"}, {1, 1, 1, 1, "d"}}});
  // Moving d one column right keeps (c,d,H) and loses (b,d,V).
  TableModel pred = text_grid({{"a", "b"}, {"c", "d"}});
  pred.at(1, 1) = TableCell::make_empty();
  TableModel pred2(2, 3);
  pred2.at(0, 0) = TableCell::make_text("a");
  pred2.at(0, 1) = TableCell::make_text("b");
  pred2.at(1, 0) = TableCell::make_text("c");
  pred2.at(1, 2) = TableCell::make_text("d");
  pred2.at(0, 2) = TableCell::make_empty();
  pred2.at(1, 1) = TableCell::make_empty();
  const auto rep = icdar_score({{"doc", {pred2}}}, {{"doc", truth}});
  EXPECT_DOUBLE_EQ(rep.average.recall, 0.75);
  EXPECT_DOUBLE_EQ(rep.average.precision, 1.0);
  const auto rep2 = icdar_score({{"doc", {pred}}}, {{"doc", truth}});
  EXPECT_DOUBLE_EQ(rep2.average.recall, 0.5);
}

TEST(IcdarScore, MismatchedIdsAreWarnedAndExcluded) {
  GroundTruthDocument truth;
  truth.tables.push_back({{0, 0, 10, 10}, {{0, 0, 1, 1, "a"}, {0, 1, 1, 1, "b"}}});
  const auto rep = icdar_score({{"other", {text_grid({{"a", "b"}})}}}, {{"doc", truth}});
  EXPECT_TRUE(rep.per_document.empty());
  EXPECT_EQ(rep.warnings.size(), 2u);
}

TEST(IcdarScore, SelfScoreIsPerfectOnRandomTables) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto t = oracle::random_table(rng, 5);
    if (adjacency_relations(t.model).empty()) continue;
    GroundTruthDocument doc;
    GroundTruthTable g;
    for (const auto& c : t.cells) g.cells.push_back({c.r0, c.c0, c.r1 - c.r0 + 1, c.c1 - c.c0 + 1, c.text});
    doc.tables.push_back(g);
    const auto rep = icdar_score({{"d", {t.model}}}, {{"d", doc}});
    EXPECT_EQ(rep.average.f1, 1.0);
  }
}

TEST(IcdarScore, SwappingSidesSwapsPrecisionAndRecall) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 200; ++i) {
    const auto a = adjacency_relations(oracle::random_table(rng, 4).model);
    const auto b = adjacency_relations(oracle::random_table(rng, 4).model);
    if (a.empty() || b.empty()) continue;
    const auto ab = relation_metrics(a, b);
    const auto ba = relation_metrics(b, a);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
  }
}

TEST(GroundTruth, MinimalDocument) {
  const auto doc = parse_groundtruth(
      "<document image=\"p.png\"><table x0=\"1\" y0=\"2\" x1=\"30\" y1=\"40\">"
      "<cell row=\"0\" col=\"0\" rowspan=\"1\" colspan=\"1\">only</cell></table></document>");
  EXPECT_EQ(doc.image, "p.png");
  ASSERT_EQ(doc.tables.size(), 1u);
  EXPECT_EQ(doc.tables[0].region, (Region{1, 2, 30, 40}));
  EXPECT_EQ(doc.tables[0].rows(), 1);
  EXPECT_EQ(doc.tables[0].cols(), 1);
  EXPECT_EQ(doc.tables[0].cells[0].text, "only");
}

TEST(GroundTruth, MultiRowAndColumnSpans) {
  const auto doc = parse_groundtruth(kSpanningTruth);
  const auto& cells = doc.tables[0].cells;
  EXPECT_EQ(std::count_if(cells.begin(), cells.end(), [](const GroundTruthCell& c) { return c.col_span == 2; }), 2);
  EXPECT_EQ(doc.tables[0].cols(), 5);
  EXPECT_EQ(doc.tables[0].rows(), 2);
}

TEST(GroundTruth, OverlapNamesBothCells) {
  const std::string xml =
      "<document image=\"x\">\n<table x0=\"0\" y0=\"0\" x1=\"9\" y1=\"9\">\n"
      "<cell row=\"0\" col=\"0\" rowspan=\"1\" colspan=\"2\">a</cell>\n"
      "<cell row=\"0\" col=\"1\" rowspan=\"1\" colspan=\"1\">b</cell>\n</table>\n</document>\n";
  try {
    parse_groundtruth(xml);
    FAIL() << "overlap accepted";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(0,1)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0,0)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4"), std::string::npos) << msg;
  }
}

TEST(GroundTruth, RejectsMalformedInput) {
  EXPECT_THROW(parse_groundtruth("<document><table x0=\"0\" y0=\"0\" x1=\"9\">"), ParseError);
  EXPECT_THROW(parse_groundtruth("<doc/>"), ParseError);
  EXPECT_THROW(parse_groundtruth("<document><table x0=\"5\" y0=\"0\" x1=\"1\" y1=\"9\"/></document>"), ParseError);
  EXPECT_THROW(parse_groundtruth("<document><table x0=\"-1\" y0=\"0\" x1=\"1\" y1=\"9\"/></document>"), ParseError);
  EXPECT_THROW(parse_groundtruth("<document><table x0=\"0\" y0=\"0\" x1=\"1\" y1=\"9\">"
                                 "<cell row=\"0\" col=\"0\" rowspan=\"0\" colspan=\"1\">a</cell></table></document>"),
               ParseError);
}

TEST(GroundTruth, WriteParseRoundTrip) {
  auto doc = parse_groundtruth(kSpanningTruth);
  doc.tables[0].cells[1].text = "A & <B>";
  const auto back = parse_groundtruth(write_groundtruth(doc));
  EXPECT_EQ(back.image, doc.image);
  ASSERT_EQ(back.tables.size(), 1u);
  EXPECT_EQ(back.tables[0].region, doc.tables[0].region);
  EXPECT_EQ(back.tables[0].cells[1].text, "A & <B>");
  EXPECT_EQ(adjacency_relations(back.tables[0]), adjacency_relations(doc.tables[0]));
}

TEST(Synthetic, DeterministicForSeed) {
  SynthSpec spec;
  spec.ruled = true;
  const auto a = generate_synthetic(42, spec);
  const auto b = generate_synthetic(42, spec);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(write_groundtruth(a.truth), write_groundtruth(b.truth));
  EXPECT_NE(generate_synthetic(43, spec).image, a.image);
}

TEST(Synthetic, DensityZeroHasNoText) {
  SynthSpec spec;
  spec.density = 0.0;
  const auto t = generate_synthetic(5, spec);
  for (const auto& c : t.truth.tables[0].cells) EXPECT_TRUE(c.text.empty());
  EXPECT_TRUE(t.words.empty());
}

TEST(Synthetic, SpansProduceColSpanTwo) {
  SynthSpec spec;
  spec.spans = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = generate_synthetic(seed, spec);
    const auto& cells = t.truth.tables[0].cells;
    EXPECT_TRUE(std::any_of(cells.begin(), cells.end(), [](const GroundTruthCell& c) { return c.col_span == 2; }));
  }
}

TEST(Synthetic, GridMatchesSpec) {
  SynthSpec spec;
  spec.rows = 5;
  spec.cols = 3;
  const auto t = generate_synthetic(8, spec);
  EXPECT_EQ(t.truth.tables[0].rows(), 5);
  EXPECT_EQ(t.truth.tables[0].cols(), 3);
  EXPECT_EQ(t.col_edges.size(), 4u);
  EXPECT_EQ(t.row_edges.size(), 6u);
  const Region& r = t.truth.tables[0].region;
  EXPECT_TRUE(Box({0, 0, t.image.width() - 1, t.image.height() - 1}).contains(r));
}
