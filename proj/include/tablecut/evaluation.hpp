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
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tablecut/ocr_output.hpp"
#include "tablecut/region_detect.hpp"

namespace tablecut {

// ---------------------------------------------------------------------------
// Area precision / recall for table identification.

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double f1_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

namespace detail {

// Areas of union(a), union(b) and union(a) ∩ union(b), exact, by coordinate
// compression over the inclusive pixel boxes.
struct UnionAreas {
  long long a = 0;
  long long b = 0;
  long long both = 0;
};

inline UnionAreas union_areas(const std::vector<Box>& a, const std::vector<Box>& b) {
  std::vector<int> xs;
  std::vector<int> ys;
  for (const auto* set : {&a, &b})
    for (const auto& r : *set) {
      if (!r.valid()) continue;
      xs.push_back(r.x_min);
      xs.push_back(r.x_max + 1);
      ys.push_back(r.y_min);
      ys.push_back(r.y_max + 1);
    }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  UnionAreas out;
  auto covered = [](const std::vector<Box>& set, int x, int y) {
    return std::any_of(set.begin(), set.end(), [&](const Box& r) { return r.valid() && r.contains(x, y); });
  };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const long long cell = static_cast<long long>(xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
      const bool in_a = covered(a, xs[i], ys[j]);
      const bool in_b = covered(b, xs[i], ys[j]);
      if (in_a) out.a += cell;
      if (in_b) out.b += cell;
      if (in_a && in_b) out.both += cell;
    }
  return out;
}

}  // namespace detail

// precision = |AP ∩ AL| / |AP|, recall = |AP ∩ AL| / |AL| over the unions of
// predicted (AP) and true (AL) regions. Empty AP: precision 1 when AL is also
// empty, else 0. Empty AL: recall 1.
inline Metrics area_precision_recall(const std::vector<Region>& predicted, const std::vector<Region>& truth) {
  const auto u = detail::union_areas(predicted, truth);
  Metrics m;
  m.precision = u.a == 0 ? (u.b == 0 ? 1.0 : 0.0) : static_cast<double>(u.both) / static_cast<double>(u.a);
  m.recall = u.b == 0 ? 1.0 : static_cast<double>(u.both) / static_cast<double>(u.b);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

// ---------------------------------------------------------------------------
// Ground truth.

struct GroundTruthCell {
  int row = 0;
  int col = 0;
  int row_span = 1;
  int col_span = 1;
  std::string text;
};

struct GroundTruthTable {
  Region region;
  std::vector<GroundTruthCell> cells;

  int rows() const {
    int n = 0;
    for (const auto& c : cells) n = std::max(n, c.row + c.row_span);
    return n;
  }
  int cols() const {
    int n = 0;
    for (const auto& c : cells) n = std::max(n, c.col + c.col_span);
    return n;
  }
};

struct GroundTruthDocument {
  std::string image;
  std::vector<GroundTruthTable> tables;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

namespace detail {

// Minimal XML reader for the ground-truth schema: elements, attributes,
// character data, comments, declarations and the five predefined entities
// plus numeric references.
class XmlReader {
 public:
  struct Element {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::string text;
    std::vector<Element> children;
    int line = 1;
  };

  explicit XmlReader(std::string_view src) : src_(src) {}

  Element parse_document() {
    skip_misc();
    if (eof() || peek() != '<') fail("expected a root element");
    Element root = parse_element();
    skip_misc();
    if (!eof()) fail("unexpected content after the root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }
  bool eof() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }
  char get() {
    const char c = src_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) get();
  }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }
  void skip_until(std::string_view end) {
    while (!eof() && !starts_with(end)) get();
    if (eof()) fail("unterminated markup, expected '" + std::string(end) + "'");
    advance(end.size());
  }
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<?"))
        skip_until("?>");
      else if (starts_with("<!--"))
        skip_until("-->");
      else if (starts_with("<!"))
        skip_until(">");
      else
        return;
    }
  }
  std::string parse_name() {
    std::string n;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.')
        n += get();
      else
        break;
    }
    if (n.empty()) fail("expected a name");
    return n;
  }
  std::string decode(std::string_view raw) const {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      const auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity reference");
      const auto ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        unsigned long cp = 0;
        try {
          cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X') ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                                                  : std::stoul(std::string(ent.substr(1)));
        } catch (const std::exception&) {
          fail("bad character reference &" + std::string(ent) + ";");
        }
        append_utf8(out, cp);
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }
  static void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  Element parse_element() {
    Element e;
    e.line = line_;
    get();  // '<'
    e.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag <" + e.name + ">");
      if (starts_with("/>")) {
        advance(2);
        return e;
      }
      if (peek() == '>') {
        get();
        break;
      }
      const std::string attr = parse_name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '=' after attribute " + attr);
      get();
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) fail("expected a quoted value for attribute " + attr);
      const char q = get();
      std::string raw;
      while (!eof() && peek() != q) raw += get();
      if (eof()) fail("unterminated value for attribute " + attr);
      get();
      if (e.attrs.count(attr)) fail("duplicate attribute " + attr);
      e.attrs[attr] = decode(raw);
    }
    std::string raw_text;
    for (;;) {
      if (eof()) fail("missing end tag </" + e.name + ">");
      if (starts_with("<!--")) {
        skip_until("-->");
      } else if (starts_with("</")) {
        advance(2);
        const std::string closing = parse_name();
        if (closing != e.name) fail("mismatched end tag </" + closing + ">, expected </" + e.name + ">");
        skip_ws();
        if (eof() || peek() != '>') fail("malformed end tag </" + closing);
        get();
        break;
      } else if (peek() == '<') {
        e.children.push_back(parse_element());
      } else {
        raw_text += get();
      }
    }
    e.text = decode(raw_text);
    return e;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

inline int int_attr(const XmlReader::Element& e, const char* name) {
  const auto it = e.attrs.find(name);
  if (it == e.attrs.end()) throw ParseError(e.line, "<" + e.name + "> is missing attribute " + name);
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(e.line, "attribute " + std::string(name) + " of <" + e.name + "> is not an integer");
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Parses `<document image=".."><table x0 y0 x1 y1><cell row col rowspan
// colspan>text</cell>...</table>...</document>` and validates it.
inline GroundTruthDocument parse_groundtruth(std::string_view xml) {
  const auto root = detail::XmlReader(xml).parse_document();
  if (root.name != "document") throw ParseError(root.line, "root element must be <document>, found <" + root.name + ">");
  GroundTruthDocument doc;
  if (auto it = root.attrs.find("image"); it != root.attrs.end()) doc.image = it->second;
  for (const auto& t : root.children) {
    if (t.name != "table") throw ParseError(t.line, "unexpected <" + t.name + "> inside <document>");
    GroundTruthTable table;
    table.region = {detail::int_attr(t, "x0"), detail::int_attr(t, "y0"), detail::int_attr(t, "x1"),
                    detail::int_attr(t, "y1")};
    if (table.region.x_min < 0 || table.region.y_min < 0 || !table.region.valid())
      throw ParseError(t.line, "table region is out of bounds or inverted");
    std::vector<int> cell_lines;
    for (const auto& c : t.children) {
      if (c.name != "cell") throw ParseError(c.line, "unexpected <" + c.name + "> inside <table>");
      GroundTruthCell cell{detail::int_attr(c, "row"), detail::int_attr(c, "col"), detail::int_attr(c, "rowspan"),
                           detail::int_attr(c, "colspan"), detail::trim(c.text)};
      if (cell.row < 0 || cell.col < 0) throw ParseError(c.line, "cell position must be non-negative");
      if (cell.row_span < 1 || cell.col_span < 1) throw ParseError(c.line, "cell spans must be at least 1");
      for (std::size_t k = 0; k < table.cells.size(); ++k) {
        const auto& o = table.cells[k];
        const bool overlap = std::max(cell.row, o.row) < std::min(cell.row + cell.row_span, o.row + o.row_span) &&
                             std::max(cell.col, o.col) < std::min(cell.col + cell.col_span, o.col + o.col_span);
        if (overlap)
          throw ParseError(c.line, "cell (" + std::to_string(cell.row) + "," + std::to_string(cell.col) +
                                       ") overlaps cell (" + std::to_string(o.row) + "," + std::to_string(o.col) +
                                       ") declared on line " + std::to_string(cell_lines[k]));
      }
      table.cells.push_back(std::move(cell));
      cell_lines.push_back(c.line);
    }
    doc.tables.push_back(std::move(table));
  }
  return doc;
}

inline std::string write_groundtruth(const GroundTruthDocument& doc) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<document image=\"" << detail::xml_escape(doc.image) << "\">\n";
  for (const auto& t : doc.tables) {
    os << "  <table x0=\"" << t.region.x_min << "\" y0=\"" << t.region.y_min << "\" x1=\"" << t.region.x_max
       << "\" y1=\"" << t.region.y_max << "\">\n";
    for (const auto& c : t.cells)
      os << "    <cell row=\"" << c.row << "\" col=\"" << c.col << "\" rowspan=\"" << c.row_span << "\" colspan=\""
         << c.col_span << "\">" << detail::xml_escape(c.text) << "</cell>\n";
    os << "  </table>\n";
  }
  os << "</document>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Adjacency relations.

enum class RelationDirection { horizontal, vertical };

struct AdjacencyRelation {
  std::string a;
  std::string b;
  RelationDirection direction = RelationDirection::horizontal;

  auto operator<=>(const AdjacencyRelation&) const = default;
  bool operator==(const AdjacencyRelation&) const = default;
};

inline AdjacencyRelation make_relation(std::string a, std::string b, RelationDirection d) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b), d};
}

// Lowercase, collapse whitespace, drop spaces next to punctuation.
inline std::string normalize_relation_text(std::string_view s, bool strict = false) {
  if (strict) return std::string(s);
  std::string collapsed;
  bool pending_space = false;
  for (char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) {
      const bool punct_here = std::ispunct(u);
      const bool punct_prev = std::ispunct(static_cast<unsigned char>(collapsed.back()));
      if (!punct_here && !punct_prev) collapsed += ' ';
      pending_space = false;
    }
    collapsed += static_cast<char>(std::tolower(u));
  }
  return collapsed;
}

// Logical cells laid over grid positions.
struct LogicalTable {
  int rows = 0;
  int cols = 0;
  std::vector<int> owner;  // per grid position; -1 when uncovered
  struct Cell {
    int row0, col0, row1, col1;
    std::string text;
  };
  std::vector<Cell> cells;

  int owner_at(int r, int c) const { return owner[static_cast<std::size_t>(r * cols + c)]; }
};

inline LogicalTable logical_table(const TableModel& m) {
  LogicalTable t;
  t.rows = m.rows;
  t.cols = m.cols;
  t.owner.assign(static_cast<std::size_t>(m.rows * m.cols), -1);
  std::map<std::pair<int, int>, int> by_anchor;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const CellRef a = m.anchor_of(r, c);
      auto [it, fresh] = by_anchor.try_emplace({a.row, a.col}, static_cast<int>(t.cells.size()));
      if (fresh) {
        const auto& anchor = m.at(a.row, a.col);
        t.cells.push_back({a.row, a.col, r, c, anchor.kind == CellKind::text ? anchor.text : std::string{}});
      }
      auto& cell = t.cells[static_cast<std::size_t>(it->second)];
      cell.row1 = std::max(cell.row1, r);
      cell.col1 = std::max(cell.col1, c);
      t.owner[static_cast<std::size_t>(r * m.cols + c)] = it->second;
    }
  return t;
}

inline LogicalTable logical_table(const GroundTruthTable& g) {
  LogicalTable t;
  t.rows = g.rows();
  t.cols = g.cols();
  t.owner.assign(static_cast<std::size_t>(t.rows * t.cols), -1);
  for (const auto& c : g.cells) {
    const int id = static_cast<int>(t.cells.size());
    t.cells.push_back({c.row, c.col, c.row + c.row_span - 1, c.col + c.col_span - 1, c.text});
    for (int r = c.row; r < c.row + c.row_span; ++r)
      for (int k = c.col; k < c.col + c.col_span; ++k) t.owner[static_cast<std::size_t>(r * t.cols + k)] = id;
  }
  return t;
}

// For each non-empty logical cell: the nearest non-empty logical cell to the
// right along its top row, and the nearest below along its left column.
// Returned sorted (a multiset).
inline std::vector<AdjacencyRelation> adjacency_relations(const LogicalTable& t, bool strict_text = false) {
  std::vector<std::string> norm;
  norm.reserve(t.cells.size());
  for (const auto& c : t.cells) norm.push_back(normalize_relation_text(c.text, strict_text));
  std::vector<AdjacencyRelation> out;
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    if (norm[i].empty()) continue;
    const auto& cell = t.cells[i];
    for (int c = cell.col1 + 1; c < t.cols; ++c) {
      const int o = t.owner_at(cell.row0, c);
      if (o < 0 || o == static_cast<int>(i) || norm[static_cast<std::size_t>(o)].empty()) continue;
      out.push_back(make_relation(norm[i], norm[static_cast<std::size_t>(o)], RelationDirection::horizontal));
      break;
    }
    for (int r = cell.row1 + 1; r < t.rows; ++r) {
      const int o = t.owner_at(r, cell.col0);
      if (o < 0 || o == static_cast<int>(i) || norm[static_cast<std::size_t>(o)].empty()) continue;
      out.push_back(make_relation(norm[i], norm[static_cast<std::size_t>(o)], RelationDirection::vertical));
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<AdjacencyRelation> adjacency_relations(const TableModel& m, bool strict_text = false) {
  return adjacency_relations(logical_table(m), strict_text);
}

inline std::vector<AdjacencyRelation> adjacency_relations(const GroundTruthTable& g, bool strict_text = false) {
  return adjacency_relations(logical_table(g), strict_text);
}

inline std::size_t multiset_intersection(const std::vector<AdjacencyRelation>& a,
                                         const std::vector<AdjacencyRelation>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

// Relation-set precision/recall with the same empty-set conventions as the
// area metric.
inline Metrics relation_metrics(const std::vector<AdjacencyRelation>& predicted,
                                const std::vector<AdjacencyRelation>& truth) {
  const auto hit = static_cast<double>(multiset_intersection(predicted, truth));
  Metrics m;
  m.precision = predicted.empty() ? (truth.empty() ? 1.0 : 0.0) : hit / static_cast<double>(predicted.size());
  m.recall = truth.empty() ? 1.0 : hit / static_cast<double>(truth.size());
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

struct DocumentScore {
  std::string id;
  Metrics metrics;
  std::size_t predicted = 0;
  std::size_t truth = 0;
  std::size_t matched = 0;
};

struct ScoreReport {
  std::vector<DocumentScore> per_document;
  Metrics average;  // macro: mean P and mean R, F1 from those
  Metrics micro;    // pooled counts, diagnostics only
  std::vector<std::string> warnings;
};

// Per-document relation scoring, macro-averaged. Documents present on only
// one side are reported and excluded.
inline ScoreReport icdar_score(const std::map<std::string, std::vector<TableModel>>& predicted,
                               const std::map<std::string, GroundTruthDocument>& truth, bool strict_text = false) {
  ScoreReport rep;
  std::size_t pooled_pred = 0;
  std::size_t pooled_truth = 0;
  std::size_t pooled_hit = 0;
  for (const auto& [id, doc] : truth) {
    const auto it = predicted.find(id);
    if (it == predicted.end()) {
      rep.warnings.push_back("no prediction for document '" + id + "'; excluded");
      continue;
    }
    std::vector<AdjacencyRelation> p;
    std::vector<AdjacencyRelation> g;
    for (const auto& m : it->second) {
      auto rel = adjacency_relations(m, strict_text);
      p.insert(p.end(), rel.begin(), rel.end());
    }
    for (const auto& t : doc.tables) {
      auto rel = adjacency_relations(t, strict_text);
      g.insert(g.end(), rel.begin(), rel.end());
    }
    std::sort(p.begin(), p.end());
    std::sort(g.begin(), g.end());
    DocumentScore s;
    s.id = id;
    s.metrics = relation_metrics(p, g);
    s.predicted = p.size();
    s.truth = g.size();
    s.matched = multiset_intersection(p, g);
    pooled_pred += s.predicted;
    pooled_truth += s.truth;
    pooled_hit += s.matched;
    rep.per_document.push_back(std::move(s));
  }
  for (const auto& [id, _] : predicted)
    if (!truth.count(id)) rep.warnings.push_back("no ground truth for document '" + id + "'; excluded");
  if (!rep.per_document.empty()) {
    double p = 0;
    double r = 0;
    for (const auto& s : rep.per_document) {
      p += s.metrics.precision;
      r += s.metrics.recall;
    }
    rep.average.precision = p / static_cast<double>(rep.per_document.size());
    rep.average.recall = r / static_cast<double>(rep.per_document.size());
    rep.average.f1 = f1_score(rep.average.precision, rep.average.recall);
  }
  rep.micro.precision = pooled_pred == 0 ? (pooled_truth == 0 ? 1.0 : 0.0)
                                         : static_cast<double>(pooled_hit) / static_cast<double>(pooled_pred);
  rep.micro.recall = pooled_truth == 0 ? 1.0 : static_cast<double>(pooled_hit) / static_cast<double>(pooled_truth);
  rep.micro.f1 = f1_score(rep.micro.precision, rep.micro.recall);
  return rep;
}

}  // namespace tablecut
