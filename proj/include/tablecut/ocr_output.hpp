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
#include <atomic>
#include <cctype>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tablecut/cell_grid.hpp"

namespace tablecut {

struct OcrResult {
  bool ok = true;
  std::string text;
  std::string error;
};

// Recognizes the text of one cell crop. `box` locates the crop in the
// original page. Implementations must be safe to call from several threads.
class OcrClient {
 public:
  virtual ~OcrClient() = default;
  virtual OcrResult recognize(const GrayImage& crop, const Box& box) const = 0;
};

// A word with its box on the original page.
struct WordBox {
  Box box;
  std::string text;
};

// Test-mode client: returns the known words whose centre lies inside the box,
// in reading order.
class StubOcrClient final : public OcrClient {
 public:
  explicit StubOcrClient(std::vector<WordBox> words) : words_(std::move(words)) {}

  OcrResult recognize(const GrayImage&, const Box& box) const override {
    std::vector<const WordBox*> hits;
    for (const auto& w : words_) {
      const int cx = (w.box.x_min + w.box.x_max) / 2;
      const int cy = (w.box.y_min + w.box.y_max) / 2;
      if (box.contains(cx, cy)) hits.push_back(&w);
    }
    std::sort(hits.begin(), hits.end(), [](const WordBox* a, const WordBox* b) {
      return std::tie(a->box.y_min, a->box.x_min) < std::tie(b->box.y_min, b->box.x_min);
    });
    OcrResult r;
    for (const auto* w : hits) {
      if (!r.text.empty()) r.text += ' ';
      r.text += w->text;
    }
    return r;
  }

 private:
  std::vector<WordBox> words_;
};

enum class CellKind { text, empty, extend };
enum class ExtendDirection { left, up };

struct TableCell {
  CellKind kind = CellKind::empty;
  std::string text;
  ExtendDirection direction = ExtendDirection::left;

  static TableCell make_text(std::string t) { return {CellKind::text, std::move(t), ExtendDirection::left}; }
  static TableCell make_empty() { return {}; }
  static TableCell make_extend(ExtendDirection d) { return {CellKind::extend, {}, d}; }
  bool operator==(const TableCell&) const = default;
};

struct TableModel {
  int rows = 0;
  int cols = 0;
  std::vector<TableCell> cells;  // row-major

  TableModel() = default;
  TableModel(int r, int c) : rows(r), cols(c), cells(static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {}

  TableCell& at(int r, int c) { return cells[static_cast<std::size_t>(r * cols + c)]; }
  const TableCell& at(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }

  // Follows Extend pointers to the anchor cell.
  CellRef anchor_of(int r, int c) const {
    while (at(r, c).kind == CellKind::extend) {
      if (at(r, c).direction == ExtendDirection::left) {
        if (c == 0) break;
        --c;
      } else {
        if (r == 0) break;
        --r;
      }
    }
    return {r, c};
  }

  bool operator==(const TableModel&) const = default;
};

// Trims and replaces every run of whitespace containing a line break with a
// single space.
inline std::string normalize_ocr_text(std::string_view in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    if (std::isspace(static_cast<unsigned char>(in[i]))) {
      std::size_t j = i;
      bool newline = false;
      while (j < in.size() && std::isspace(static_cast<unsigned char>(in[j]))) {
        newline = newline || in[j] == '\n' || in[j] == '\r';
        ++j;
      }
      if (newline)
        out += ' ';
      else
        out.append(in.substr(i, j - i));
      i = j;
    } else {
      out += in[i++];
    }
  }
  const auto b = out.find_first_not_of(" \t\f\v");
  if (b == std::string::npos) return {};
  const auto e = out.find_last_not_of(" \t\f\v");
  return out.substr(b, e - b + 1);
}

struct ExtractionStats {
  int ocr_calls = 0;
  int failed_calls = 0;
  std::vector<std::string> warnings;
};

// OCR on every occupied component anchor; non-anchor cells point back to the
// anchor (left within the anchor row, up otherwise). `boxes` holds one
// original-image box per component of `res`.
inline TableModel extract_text(const OcrClient& client, const GrayImage& original, const MergeResolution& res,
                               const std::vector<Box>& boxes, ExtractionStats* stats = nullptr) {
  if (boxes.size() != res.components.size()) throw ContractViolation("one box per merge component is required");
  TableModel model(res.rows, res.cols);
  for (std::size_t i = 0; i < res.components.size(); ++i) {
    const auto& comp = res.components[i];
    for (int r = comp.row0; r <= comp.row1; ++r)
      for (int c = comp.col0; c <= comp.col1; ++c)
        if (r != comp.row0 || c != comp.col0)
          model.at(r, c) = TableCell::make_extend(r == comp.row0 ? ExtendDirection::left : ExtendDirection::up);
    if (!comp.occupied) {
      model.at(comp.row0, comp.col0) = TableCell::make_empty();
      continue;
    }
    const Box b = boxes[i].clamped_to(original.width(), original.height());
    OcrResult r = client.recognize(crop(original, b), b);
    if (stats) ++stats->ocr_calls;
    if (!r.ok) {
      if (stats) ++stats->failed_calls;
      if (stats)
        stats->warnings.push_back("OCR failed on cell (" + std::to_string(comp.row0) + "," +
                                  std::to_string(comp.col0) + "): " + r.error);
      r.text.clear();
    }
    model.at(comp.row0, comp.col0) = TableCell::make_text(normalize_ocr_text(r.text));
  }
  return model;
}

struct CsvOptions {
  std::string extend_left = "EXTEND<-";
  std::string extend_up = "EXTEND^";

  static CsvOptions utf8_arrows() { return {"EXTEND\xE2\x86\x90", "EXTEND\xE2\x86\x91"}; }
};

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

// One record per grid row, `cols` fields per record, '\n' line endings.
inline void emit_csv(const TableModel& model, std::ostream& sink, const CsvOptions& opt = {}) {
  for (int r = 0; r < model.rows; ++r) {
    for (int c = 0; c < model.cols; ++c) {
      if (c > 0) sink << ',';
      const auto& cell = model.at(r, c);
      switch (cell.kind) {
        case CellKind::text: sink << csv_field(cell.text); break;
        case CellKind::empty: break;
        case CellKind::extend:
          sink << (cell.direction == ExtendDirection::left ? opt.extend_left : opt.extend_up);
          break;
      }
    }
    sink << '\n';
  }
  if (!sink) throw Error("CSV write failed");
}

inline std::string emit_csv(const TableModel& model, const CsvOptions& opt = {}) {
  std::ostringstream os;
  emit_csv(model, os, opt);
  return os.str();
}

// RFC 4180 reader. Returns records of fields.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      records.push_back(std::move(rec));
      rec.clear();
      field.clear();
      field_started = false;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) throw InputFormatError("unterminated quoted CSV field");
  if (field_started || !rec.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

// Reads a table written by emit_csv back into a TableModel.
inline TableModel parse_csv(std::string_view text, const CsvOptions& opt = {}) {
  const auto records = parse_csv_records(text);
  std::size_t cols = 0;
  for (const auto& r : records) cols = std::max(cols, r.size());
  TableModel m(static_cast<int>(records.size()), static_cast<int>(cols));
  const auto utf8 = CsvOptions::utf8_arrows();
  for (std::size_t r = 0; r < records.size(); ++r)
    for (std::size_t c = 0; c < records[r].size(); ++c) {
      const auto& f = records[r][c];
      auto& cell = m.at(static_cast<int>(r), static_cast<int>(c));
      if (f.empty())
        cell = TableCell::make_empty();
      else if (f == opt.extend_left || f == utf8.extend_left)
        cell = TableCell::make_extend(ExtendDirection::left);
      else if (f == opt.extend_up || f == utf8.extend_up)
        cell = TableCell::make_extend(ExtendDirection::up);
      else
        cell = TableCell::make_text(f);
    }
  return m;
}

// Folds continuation rows into the row above. A continuation row has an empty
// first cell below a text first cell, holds some text, and anchors no
// multi-row component. Its text is appended to the anchors above it.
inline TableModel merge_multiline_rows(const TableModel& in) {
  if (in.rows < 2 || in.cols < 1) return in;
  std::vector<std::vector<TableCell>> rows;
  std::vector<int> source_row;
  for (int r = 0; r < in.rows; ++r) {
    std::vector<TableCell> row(in.cells.begin() + r * in.cols, in.cells.begin() + (r + 1) * in.cols);
    bool continuation = r > 0 && !rows.empty() && row[0].kind == CellKind::empty &&
                        rows.back()[0].kind == CellKind::text;
    bool has_text = false;
    for (int c = 0; c < in.cols; ++c) {
      has_text = has_text || row[static_cast<std::size_t>(c)].kind == CellKind::text;
      if (r + 1 < in.rows && row[static_cast<std::size_t>(c)].kind != CellKind::extend &&
          in.at(r + 1, c).kind == CellKind::extend && in.at(r + 1, c).direction == ExtendDirection::up)
        continuation = false;
    }
    if (continuation && has_text) {
      auto& above = rows.back();
      for (int c = 0; c < in.cols; ++c) {
        const auto& cell = row[static_cast<std::size_t>(c)];
        if (cell.kind != CellKind::text || cell.text.empty()) continue;
        int ac = c;
        while (ac > 0 && above[static_cast<std::size_t>(ac)].kind == CellKind::extend &&
               above[static_cast<std::size_t>(ac)].direction == ExtendDirection::left)
          --ac;
        auto& target = above[static_cast<std::size_t>(ac)];
        if (target.kind == CellKind::text) {
          target.text += (target.text.empty() ? "" : " ") + cell.text;
        } else if (target.kind == CellKind::empty) {
          target = cell;
        }
      }
      continue;
    }
    rows.push_back(std::move(row));
    source_row.push_back(r);
  }
  TableModel out(static_cast<int>(rows.size()), in.cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int c = 0; c < in.cols; ++c) out.at(static_cast<int>(r), c) = rows[r][static_cast<std::size_t>(c)];
  return out;
}

}  // namespace tablecut
