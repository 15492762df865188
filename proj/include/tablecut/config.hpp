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

#include <charconv>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablecut/image.hpp"

namespace tablecut {

struct PipelineConfig {
  int working_width = 800;
  int pad = 16;
  int row_merge_gap = 2;
  int column_merge_gap = 10;
  int trim_margin = 4;
  double threshold_start = 0.6;
  double delta = 0.02;
  double high_quantile = 0.99;
  double sim_cv = 0.5;
  double seg_frac = 0.2;
  double word_gap_frac = 0.8;
  int proximity = 5;
  int join_gap = 2;
  int min_cell = 8;
  double merge_threshold = 0.5;
  double empty_eps = 0.002;
  std::string ocr_command = "tesseract {input} stdout --psm 6";
  std::string classifier_command;  // empty: built-in classifier
  int parallelism = 2;
  bool debug_images = false;
  bool merge_multiline = false;
  bool strict_text = false;
  std::string emit_regions;  // file for all detected regions; empty: off
  bool timings = false;
  std::string output_dir = "out";

  bool operator==(const PipelineConfig&) const = default;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct ConfigField {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;  // throws on bad syntax or range
};

inline int parse_int(std::string_view s, const char* key, int lo, int hi) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw InputFormatError(std::string(key) + ": expected an integer, got '" + std::string(s) + "'");
  if (v < lo || v > hi)
    throw InputFormatError(std::string(key) + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  return v;
}

// Range is [lo, hi], or (lo, hi] / [lo, hi) / (lo, hi) per the open flags.
inline double parse_real(std::string_view s, const char* key, double lo, double hi, bool lo_open, bool hi_open) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw InputFormatError(std::string(key) + ": expected a number, got '" + std::string(s) + "'");
  const bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
  if (!ok)
    throw InputFormatError(std::string(key) + ": " + std::string(s) + " outside " + (lo_open ? "(" : "[") +
                           format_double(lo) + ", " + format_double(hi) + (hi_open ? ")" : "]"));
  return v;
}

inline bool parse_bool(std::string_view s, const char* key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw InputFormatError(std::string(key) + ": expected true or false, got '" + std::string(s) + "'");
}

inline std::string parse_string(std::string_view s, const char* key) {
  if (s.empty() || s.front() != '"') return std::string(s);
  try {
    return nlohmann::json::parse(s).get<std::string>();
  } catch (const std::exception&) {
    throw InputFormatError(std::string(key) + ": malformed quoted string");
  }
}

#define TABLECUT_INT_FIELD(name, lo, hi)                                                        \
  ConfigField {                                                                                 \
    #name, [](const PipelineConfig& c) { return std::to_string(c.name); },                      \
        [](PipelineConfig& c, std::string_view s) { c.name = parse_int(s, #name, lo, hi); }     \
  }
#define TABLECUT_REAL_FIELD(name, lo, hi, lo_open, hi_open)                                               \
  ConfigField {                                                                                           \
    #name, [](const PipelineConfig& c) { return format_double(c.name); },                                 \
        [](PipelineConfig& c, std::string_view s) { c.name = parse_real(s, #name, lo, hi, lo_open, hi_open); } \
  }
#define TABLECUT_BOOL_FIELD(name)                                                                      \
  ConfigField {                                                                                        \
    #name, [](const PipelineConfig& c) { return std::string(c.name ? "true" : "false"); },             \
        [](PipelineConfig& c, std::string_view s) { c.name = parse_bool(s, #name); }                   \
  }
#define TABLECUT_STRING_FIELD(name)                                                                    \
  ConfigField {                                                                                        \
    #name, [](const PipelineConfig& c) { return nlohmann::json(c.name).dump(); },                      \
        [](PipelineConfig& c, std::string_view s) { c.name = parse_string(s, #name); }                 \
  }

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      TABLECUT_INT_FIELD(working_width, 64, 8000),
      TABLECUT_INT_FIELD(pad, 0, 256),
      TABLECUT_INT_FIELD(row_merge_gap, 0, 64),
      TABLECUT_INT_FIELD(column_merge_gap, 0, 400),
      TABLECUT_INT_FIELD(trim_margin, 0, 100),
      TABLECUT_REAL_FIELD(threshold_start, 0.0, 1.0, true, true),
      TABLECUT_REAL_FIELD(delta, 0.0, 0.1, true, false),
      TABLECUT_REAL_FIELD(high_quantile, 0.0, 1.0, true, true),
      TABLECUT_REAL_FIELD(sim_cv, 0.0, 10.0, true, false),
      TABLECUT_REAL_FIELD(seg_frac, 0.0, 1.0, true, false),
      TABLECUT_REAL_FIELD(word_gap_frac, 0.0, 10.0, false, false),
      TABLECUT_INT_FIELD(proximity, 0, 100),
      TABLECUT_INT_FIELD(join_gap, 0, 50),
      TABLECUT_INT_FIELD(min_cell, 1, 400),
      TABLECUT_REAL_FIELD(merge_threshold, 0.0, 1.0, false, false),
      TABLECUT_REAL_FIELD(empty_eps, 0.0, 1.0, false, true),
      TABLECUT_STRING_FIELD(ocr_command),
      TABLECUT_STRING_FIELD(classifier_command),
      TABLECUT_INT_FIELD(parallelism, 1, 256),
      TABLECUT_BOOL_FIELD(debug_images),
      TABLECUT_BOOL_FIELD(merge_multiline),
      TABLECUT_BOOL_FIELD(strict_text),
      TABLECUT_STRING_FIELD(emit_regions),
      TABLECUT_BOOL_FIELD(timings),
      TABLECUT_STRING_FIELD(output_dir),
  };
  return fields;
}

#undef TABLECUT_INT_FIELD
#undef TABLECUT_REAL_FIELD
#undef TABLECUT_BOOL_FIELD
#undef TABLECUT_STRING_FIELD

inline std::string_view trim_view(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Sets one field by key. Unknown keys and out-of-range values throw.
inline void set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& f : detail::config_fields())
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  throw InputFormatError("unknown configuration key '" + std::string(key) + "'");
}

// Checks every field against its range by writing and re-reading it.
inline void validate_config(const PipelineConfig& cfg) {
  PipelineConfig scratch;
  for (const auto& f : detail::config_fields()) f.set(scratch, f.get(cfg));
}

// Flat `key = value` text. Blank lines and lines starting with '#' are
// ignored; strings may be JSON-quoted.
inline PipelineConfig parse_config(std::string_view text, PipelineConfig base = {}) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = detail::trim_view(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InputFormatError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(base, detail::trim_view(line.substr(0, eq)), detail::trim_view(line.substr(eq + 1)));
    } catch (const InputFormatError& e) {
      throw InputFormatError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline std::string write_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : detail::config_fields()) os << f.key << " = " << f.get(cfg) << '\n';
  return os.str();
}

}  // namespace tablecut
