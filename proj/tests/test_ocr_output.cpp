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

#include <atomic>
#include <random>

#include "oracles.hpp"
#include "tablecut/ocr_output.hpp"

using namespace tablecut;

namespace {

class CountingClient final : public OcrClient {
 public:
  explicit CountingClient(std::string text, bool fail = false) : text_(std::move(text)), fail_(fail) {}
  OcrResult recognize(const GrayImage&, const Box&) const override {
    ++calls;
    if (fail_) return {false, "", "engine crashed"};
    return {true, text_, ""};
  }
  mutable std::atomic<int> calls{0};

 private:
  std::string text_;
  bool fail_;
};

MergeResolution resolution(int rows, int cols, std::vector<Component> merged, std::vector<bool> occupancy) {
  MergeResolution m;
  m.rows = rows;
  m.cols = cols;
  m.occupancy = std::move(occupancy);
  std::vector<bool> covered(static_cast<std::size_t>(rows * cols), false);
  for (const auto& c : merged)
    for (int r = c.row0; r <= c.row1; ++r)
      for (int k = c.col0; k <= c.col1; ++k) covered[static_cast<std::size_t>(r * cols + k)] = true;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (!covered[static_cast<std::size_t>(r * cols + c)]) merged.push_back({r, c, r, c, false});
  std::sort(merged.begin(), merged.end(), [](const Component& a, const Component& b) {
    return std::tie(a.row0, a.col0) < std::tie(b.row0, b.col0);
  });
  for (auto& c : merged)
    for (int r = c.row0; r <= c.row1; ++r)
      for (int k = c.col0; k <= c.col1; ++k) c.occupied = c.occupied || m.occupancy[static_cast<std::size_t>(r * cols + k)];
  m.components = std::move(merged);
  return m;
}

std::vector<Box> boxes_for(const MergeResolution& m) {
  std::vector<Box> out;
  for (const auto& c : m.components) out.push_back({c.col0 * 10, c.row0 * 10, c.col1 * 10 + 9, c.row1 * 10 + 9});
  return out;
}

TableModel row_model(std::vector<TableCell> cells) {
  TableModel m(1, static_cast<int>(cells.size()));
  m.cells = std::move(cells);
  return m;
}

}  // namespace

TEST(ExtractText, AllEmptyTableMakesNoCalls) {
  const auto res = resolution(2, 3, {}, std::vector<bool>(6, false));
  CountingClient client("never");
  ExtractionStats stats;
  const auto model = extract_text(client, GrayImage(30, 20, 255), res, boxes_for(res), &stats);
  EXPECT_EQ(client.calls.load(), 0);
  EXPECT_EQ(stats.ocr_calls, 0);
  for (const auto& c : model.cells) EXPECT_EQ(c.kind, CellKind::empty);
}

TEST(ExtractText, MergedHeaderExtendsLeft) {
  const auto res = resolution(1, 3, {{0, 0, 0, 1, false}}, {true, false, false});
  StubOcrClient ocr({{{2, 2, 12, 7}, "A"}, {{14, 2, 18, 7}, "Grade"}});
  const auto model = extract_text(ocr, GrayImage(30, 10, 255), res, boxes_for(res));
  EXPECT_EQ(model.at(0, 0), TableCell::make_text("A Grade"));
  EXPECT_EQ(model.at(0, 1), TableCell::make_extend(ExtendDirection::left));
  EXPECT_EQ(model.at(0, 2), TableCell::make_empty());
  EXPECT_EQ(emit_csv(model), "A Grade,EXTEND<-,\n");
}

TEST(ExtractText, VerticalComponentExtendsUp) {
  const auto res = resolution(2, 1, {{0, 0, 1, 0, false}}, {true, false});
  CountingClient client("x");
  const auto model = extract_text(client, GrayImage(10, 20, 255), res, boxes_for(res));
  EXPECT_EQ(model.at(1, 0), TableCell::make_extend(ExtendDirection::up));
  EXPECT_EQ(emit_csv(model), "x\nEXTEND^\n");
}

TEST(ExtractText, BlockComponentUsesLeftInAnchorRowUpBelow) {
  const auto res = resolution(2, 2, {{0, 0, 1, 1, false}}, {true, false, false, false});
  CountingClient client("big");
  const auto model = extract_text(client, GrayImage(20, 20, 255), res, boxes_for(res));
  EXPECT_EQ(model.at(0, 1).direction, ExtendDirection::left);
  EXPECT_EQ(model.at(1, 0).direction, ExtendDirection::up);
  EXPECT_EQ(model.at(1, 1).direction, ExtendDirection::up);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_EQ(model.anchor_of(r, c), (CellRef{0, 0}));
}

TEST(ExtractText, CallCountEqualsOccupiedAnchors) {
  std::mt19937 rng(4);
  for (int i = 0; i < 100; ++i) {
    const int rows = 1 + static_cast<int>(rng() % 5);
    const int cols = 1 + static_cast<int>(rng() % 5);
    std::vector<bool> occ(static_cast<std::size_t>(rows * cols));
    for (auto&& o : occ) o = rng() % 2 == 0;
    std::vector<Component> merged;
    if (cols >= 2 && rng() % 2 == 0) merged.push_back({0, 0, 0, 1, false});
    const auto res = resolution(rows, cols, merged, occ);
    int expected = 0;
    for (const auto& c : res.components) expected += c.occupied;
    CountingClient client("t");
    ExtractionStats stats;
    extract_text(client, GrayImage(cols * 10, rows * 10, 255), res, boxes_for(res), &stats);
    EXPECT_EQ(client.calls.load(), expected);
    EXPECT_EQ(stats.ocr_calls, expected);
  }
}

TEST(ExtractText, FailureIsLocalToTheCell) {
  const auto res = resolution(1, 2, {}, {true, true});
  CountingClient client("", true);
  ExtractionStats stats;
  const auto model = extract_text(client, GrayImage(20, 10, 255), res, boxes_for(res), &stats);
  EXPECT_EQ(stats.failed_calls, 2);
  EXPECT_EQ(stats.warnings.size(), 2u);
  EXPECT_EQ(model.at(0, 0), TableCell::make_text(""));
  EXPECT_EQ(model.at(0, 1), TableCell::make_text(""));
}

TEST(ExtractText, BoxCountMustMatch) {
  const auto res = resolution(1, 2, {}, {true, true});
  CountingClient client("x");
  EXPECT_THROW(extract_text(client, GrayImage(20, 10, 255), res, {}), ContractViolation);
}

TEST(NormalizeOcrText, TrimsAndJoinsLines) {
  EXPECT_EQ(normalize_ocr_text("  A\nGrade \n"), "A Grade");
  EXPECT_EQ(normalize_ocr_text("a\r\n\r\nb"), "a b");
  EXPECT_EQ(normalize_ocr_text("a  b"), "a  b");
  EXPECT_EQ(normalize_ocr_text("\n\t \n"), "");
}

TEST(EmitCsv, SingleCell) { EXPECT_EQ(emit_csv(row_model({TableCell::make_text("x")})), "x\n"); }

TEST(EmitCsv, AnchoredMergeRow) {
  const auto m = row_model({TableCell::make_text("A Grade"), TableCell::make_extend(ExtendDirection::left),
                            TableCell::make_text("7")});
  EXPECT_EQ(emit_csv(m), "A Grade,EXTEND<-,7\n");
}

TEST(EmitCsv, QuotesDelimitersQuotesAndNewlines) {
  const auto m = row_model({TableCell::make_text("a,b"), TableCell::make_text("say \"hi\""),
                            TableCell::make_text("two\nlines"), TableCell::make_empty()});
  EXPECT_EQ(emit_csv(m), "\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\",\n");
}

TEST(EmitCsv, Utf8Arrows) {
  TableModel m(2, 2);
  m.at(0, 0) = TableCell::make_text("h");
  m.at(0, 1) = TableCell::make_extend(ExtendDirection::left);
  m.at(1, 0) = TableCell::make_extend(ExtendDirection::up);
  m.at(1, 1) = TableCell::make_extend(ExtendDirection::up);
  EXPECT_EQ(emit_csv(m, CsvOptions::utf8_arrows()), "h,EXTEND\xE2\x86\x90\nEXTEND\xE2\x86\x91,EXTEND\xE2\x86\x91\n");
  EXPECT_EQ(parse_csv(emit_csv(m, CsvOptions::utf8_arrows())), m);
}

TEST(EmitCsv, WriteFailureIsAnError) {
  std::ostringstream os;
  os.setstate(std::ios::badbit);
  EXPECT_THROW(emit_csv(row_model({TableCell::make_text("x")}), os), Error);
}

TEST(ParseCsv, RoundTripsRandomTables) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> awkward = {"a,b", "q\"uote", "multi\nline", "plain", " padded ", "EXTEND"};
  for (int i = 0; i < 500; ++i) {
    auto t = oracle::random_table(rng, 5);
    for (auto& c : t.model.cells)
      if (c.kind == CellKind::text && rng() % 3 == 0) c.text = awkward[rng() % awkward.size()];
    const auto text = emit_csv(t.model);
    const auto back = parse_csv(text);
    EXPECT_EQ(back, t.model) << text;
    const auto records = parse_csv_records(text);
    ASSERT_EQ(records.size(), static_cast<std::size_t>(t.model.rows));
    for (const auto& r : records) EXPECT_EQ(r.size(), static_cast<std::size_t>(t.model.cols));
  }
}

TEST(ParseCsv, UnterminatedQuoteIsRejected) { EXPECT_THROW(parse_csv_records("\"open,1\n"), InputFormatError); }

TEST(ParseCsv, CrLfRecords) {
  const auto r = parse_csv_records("a,b\r\nc,d\r\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1][1], "d");
}

TEST(ExtendTokens, NeverPointOutsideTheGrid) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const auto t = oracle::random_table(rng, 6);
    for (int c = 0; c < t.model.cols; ++c) {
      const auto& top = t.model.at(0, c);
      if (top.kind == CellKind::extend) {
        EXPECT_EQ(top.direction, ExtendDirection::left);
      }
    }
    for (int r = 0; r < t.model.rows; ++r) {
      const auto& first = t.model.at(r, 0);
      if (first.kind == CellKind::extend) {
        EXPECT_EQ(first.direction, ExtendDirection::up);
      }
    }
  }
}

TEST(MergeMultiline, FoldsContinuationRows) {
  TableModel m(3, 2);
  m.at(0, 0) = TableCell::make_text("Quarterly");
  m.at(0, 1) = TableCell::make_text("12");
  m.at(1, 0) = TableCell::make_empty();
  m.at(1, 1) = TableCell::make_text("units");
  m.at(2, 0) = TableCell::make_text("Annual");
  m.at(2, 1) = TableCell::make_text("40");
  const auto out = merge_multiline_rows(m);
  ASSERT_EQ(out.rows, 2);
  EXPECT_EQ(out.at(0, 1).text, "12 units");
  EXPECT_EQ(out.at(1, 0).text, "Annual");
}

TEST(MergeMultiline, LeavesOrdinaryTablesAlone) {
  TableModel m(2, 2);
  m.at(0, 0) = TableCell::make_text("a");
  m.at(0, 1) = TableCell::make_text("b");
  m.at(1, 0) = TableCell::make_text("c");
  m.at(1, 1) = TableCell::make_empty();
  EXPECT_EQ(merge_multiline_rows(m), m);
}
