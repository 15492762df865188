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
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablecut/debug.hpp"
#include "tablecut/evaluation.hpp"
#include "tablecut/ocr_command.hpp"
#include "tablecut/pipeline.hpp"
#include "tablecut/synthetic.hpp"

namespace tablecut {

namespace fs = std::filesystem;

inline const std::set<std::string>& image_extensions() {
  static const std::set<std::string> ext = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp", ".pgm", ".ppm", ".webp"};
  return ext;
}

inline std::string lower_extension(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

// Files are taken as given; directories contribute their image files, sorted.
inline std::vector<fs::path> collect_inputs(const std::vector<fs::path>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a))
        if (e.is_regular_file() && image_extensions().count(lower_extension(e.path()))) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(a);
    }
  }
  return out;
}

inline nlohmann::json box_json(const Box& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

// One region in the interchange schema: {x_min, y_min, x_max, y_max, page}.
inline nlohmann::json region_json(const Box& b, const std::string& page) {
  return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}, {"page", page}};
}

// Region proposals from a `--regions` file: an array of region objects.
// `page` names an input by file name or stem, or by 0-based input index;
// entries without `page` apply to every input.
struct RegionProposals {
  std::map<std::string, std::vector<Region>> by_name;
  std::map<std::size_t, std::vector<Region>> by_index;
  std::vector<Region> shared;

  std::vector<Region> find(const fs::path& input, std::size_t index) const {
    std::vector<Region> out = shared;
    auto add = [&](const std::vector<Region>& v) { out.insert(out.end(), v.begin(), v.end()); };
    if (auto it = by_name.find(input.filename().string()); it != by_name.end()) add(it->second);
    if (input.stem() != input.filename())
      if (auto it = by_name.find(input.stem().string()); it != by_name.end()) add(it->second);
    if (auto it = by_index.find(index); it != by_index.end()) add(it->second);
    return out;
  }
};

inline RegionProposals parse_region_proposals(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputFormatError(std::string("regions file: ") + e.what());
  }
  if (!j.is_array()) throw InputFormatError("regions file: expected a JSON array of regions");
  RegionProposals p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& r = j[i];
    const std::string where = "regions file entry " + std::to_string(i) + ": ";
    if (!r.is_object()) throw InputFormatError(where + "expected an object");
    int v[4];
    const char* keys[4] = {"x_min", "y_min", "x_max", "y_max"};
    for (int k = 0; k < 4; ++k) {
      if (!r.contains(keys[k]) || !r[keys[k]].is_number_integer())
        throw InputFormatError(where + "\"" + keys[k] + "\" must be an integer");
      v[k] = r[keys[k]].get<int>();
    }
    const Box b{v[0], v[1], v[2], v[3]};
    if (!b.valid() || b.x_min < 0 || b.y_min < 0)
      throw InputFormatError(where + "region must be non-negative with x_min <= x_max, y_min <= y_max");
    if (!r.contains("page") || r["page"].is_null()) p.shared.push_back(b);
    else if (r["page"].is_string()) p.by_name[r["page"].get<std::string>()].push_back(b);
    else if (r["page"].is_number_unsigned()) p.by_index[r["page"].get<std::size_t>()].push_back(b);
    else throw InputFormatError(where + "\"page\" must be a file name or a non-negative index");
  }
  return p;
}

// Regions per page name from a regions file, for scoring.
inline std::map<std::string, std::vector<Region>> regions_by_page(const RegionProposals& p) {
  auto out = p.by_name;
  for (auto& [name, regions] : out) regions.insert(regions.end(), p.shared.begin(), p.shared.end());
  return out;
}

inline std::string table_csv_name(const std::string& stem, std::size_t k) {
  return stem + "_table" + std::to_string(k) + ".csv";
}

struct FileOutcome {
  fs::path input;
  bool ok = true;
  std::string error;
  std::size_t tables = 0;
  std::vector<std::string> warnings;
  std::vector<fs::path> written;
  std::vector<Region> regions;  // after the ensemble
};

struct ExtractReport {
  std::vector<FileOutcome> files;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(files.begin(), files.end(), [](const FileOutcome& f) { return !f.ok; }));
  }
  int exit_code() const { return failures() == 0 ? 0 : 1; }
};

struct ExtractRequest {
  std::vector<fs::path> inputs;
  PipelineConfig cfg;
  RegionProposals proposals;
  CsvOptions csv;
  PageHooks hooks;
};

// Sidecar describing one page: regions, per-table grids, components and
// occupancy, warnings, and optional timings.
inline nlohmann::json page_sidecar(const fs::path& input, const GrayImage& page, const PageResult& result,
                                   const std::string& stem, const std::optional<double>& total_ms) {
  nlohmann::json j;
  j["image"] = input.filename().string();
  j["width"] = page.width();
  j["height"] = page.height();
  j["regions"] = {{"detected", nlohmann::json::array()}, {"final", nlohmann::json::array()}};
  for (const auto& r : result.detection.regions) j["regions"]["detected"].push_back(box_json(r));
  for (const auto& r : result.regions) j["regions"]["final"].push_back(box_json(r));
  j["tables"] = nlohmann::json::array();
  for (std::size_t k = 0; k < result.tables.size(); ++k) {
    const auto& t = result.tables[k];
    const auto& res = t.structure.resolution;
    nlohmann::json tj;
    tj["index"] = k;
    tj["csv"] = table_csv_name(stem, k);
    tj["region"] = box_json(t.structure.region);
    tj["rows"] = res.rows;
    tj["cols"] = res.cols;
    nlohmann::json occ = nlohmann::json::array();
    for (int r = 0; r < res.rows; ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < res.cols; ++c) row.push_back(res.occupancy[static_cast<std::size_t>(r * res.cols + c)] ? 1 : 0);
      occ.push_back(std::move(row));
    }
    tj["occupancy"] = std::move(occ);
    tj["components"] = nlohmann::json::array();
    for (std::size_t i = 0; i < res.components.size(); ++i) {
      const auto& comp = res.components[i];
      tj["components"].push_back({{"row", comp.row0},
                                  {"col", comp.col0},
                                  {"row_span", comp.row1 - comp.row0 + 1},
                                  {"col_span", comp.col1 - comp.col0 + 1},
                                  {"occupied", comp.occupied},
                                  {"box", box_json(t.structure.cell_boxes[i])}});
    }
    j["tables"].push_back(std::move(tj));
  }
  j["warnings"] = result.warnings;
  j["ocr_calls"] = result.ocr_calls;
  if (total_ms) j["timings_ms"] = {{"total", *total_ms}};
  return j;
}

// One page end to end, writing every output for it. Never throws.
inline FileOutcome extract_file(const fs::path& input, const ExtractRequest& req, std::size_t index = 0,
                               const OcrClient* ocr_override = nullptr) {
  FileOutcome out;
  out.input = input;
  const auto& cfg = req.cfg;
  const auto start = std::chrono::steady_clock::now();
  try {
    const GrayImage page = load_gray(input);
    const std::string stem = input.stem().string();
    std::unique_ptr<OcrClient> owned;
    const OcrClient* ocr = ocr_override;
    if (!ocr) {
      if (is_stub_command(cfg.ocr_command)) {
        const auto sidecar = stub_sidecar_path(cfg.ocr_command, input);
        std::vector<WordBox> words;
        if (fs::exists(sidecar)) {
          const auto bytes = read_file_bytes(sidecar);
          words = parse_words_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        } else {
          out.warnings.push_back("stub OCR: no word sidecar " + sidecar.string() + "; cells left blank");
        }
        owned = std::make_unique<StubOcrClient>(std::move(words));
      } else {
        owned = std::make_unique<CommandOcrClient>(cfg.ocr_command);
      }
      ocr = owned.get();
    }
    PageHooks hooks = req.hooks;
    if (!hooks.classifier && !cfg.classifier_command.empty())
      hooks.classifier = CommandMergeClassifier(cfg.classifier_command);
    const PageResult result = process_page(page, cfg, *ocr, hooks, nullptr, req.proposals.find(input, index));
    out.regions = result.regions;
    out.tables = result.tables.size();
    out.warnings.insert(out.warnings.end(), result.warnings.begin(), result.warnings.end());

    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    for (std::size_t k = 0; k < result.tables.size(); ++k) {
      const auto path = dir / table_csv_name(stem, k);
      write_text_file(path, emit_csv(result.tables[k].model, req.csv));
      out.written.push_back(path);
    }
    if (cfg.debug_images) {
      const auto rpath = dir / (stem + "_regions_debug.png");
      save_png(rpath, regions_overlay(page, result.detection.regions, result.regions));
      out.written.push_back(rpath);
      for (std::size_t k = 0; k < result.tables.size(); ++k) {
        const auto tpath = dir / (stem + "_table" + std::to_string(k) + "_debug.png");
        save_png(tpath, structure_overlay(result.tables[k].structure));
        out.written.push_back(tpath);
      }
    }
    std::optional<double> total_ms;
    if (cfg.timings)
      total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const auto spath = dir / (stem + ".json");
    write_text_file(spath, page_sidecar(input, page, result, stem, total_ms).dump(2) + "\n");
    out.written.push_back(spath);
    if (result.ocr_calls > 0 && result.ocr_failures == result.ocr_calls) {
      out.ok = false;
      out.error = "OCR failed on every cell; is the OCR command installed?";
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

// Pages run concurrently up to cfg.parallelism; results keep input order.
inline ExtractReport run_extract(const ExtractRequest& req) {
  ExtractReport report;
  report.files.resize(req.inputs.size());
  std::map<std::string, std::size_t> first_with_stem;
  std::vector<bool> skip(req.inputs.size(), false);
  for (std::size_t i = 0; i < req.inputs.size(); ++i) {
    const auto stem = req.inputs[i].stem().string();
    auto [it, fresh] = first_with_stem.emplace(stem, i);
    if (!fresh) {
      skip[i] = true;
      auto& f = report.files[i];
      f.input = req.inputs[i];
      f.ok = false;
      f.error = "output stem '" + stem + "' already used by " + req.inputs[it->second].string();
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < req.inputs.size(); i = next.fetch_add(1))
      if (!skip[i]) report.files[i] = extract_file(req.inputs[i], req, i);
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, req.cfg.parallelism)), req.inputs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (!req.cfg.emit_regions.empty()) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& f : report.files)
      for (const auto& r : f.regions) all.push_back(region_json(r, f.input.filename().string()));
    write_text_file(req.cfg.emit_regions, all.dump(2) + "\n");
  }
  return report;
}

enum class EvalMode { area, icdar };

struct EvalReport {
  EvalMode mode = EvalMode::icdar;
  std::vector<DocumentScore> per_document;
  Metrics average;
  Metrics micro;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const {
    auto metrics = [](const Metrics& m) {
      return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    nlohmann::json j;
    j["mode"] = mode == EvalMode::area ? "area" : "icdar";
    j["per_document"] = nlohmann::json::array();
    for (const auto& d : per_document) {
      auto e = metrics(d.metrics);
      e["document"] = d.id;
      if (mode == EvalMode::icdar) {
        e["predicted_relations"] = d.predicted;
        e["truth_relations"] = d.truth;
        e["matched_relations"] = d.matched;
      }
      j["per_document"].push_back(std::move(e));
    }
    j["average"] = metrics(average);
    if (mode == EvalMode::icdar) j["micro"] = metrics(micro);
    j["warnings"] = warnings;
    return j;
  }
};

inline std::string read_text_file(const fs::path& p) {
  const auto bytes = read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

// Ground truth `<stem>.xml` files of a directory, keyed by stem.
inline std::map<std::string, GroundTruthDocument> load_truth_dir(const fs::path& dir, std::vector<std::string>& warnings) {
  std::map<std::string, GroundTruthDocument> out;
  if (!fs::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && lower_extension(e.path()) == ".xml") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      out[f.stem().string()] = parse_groundtruth(read_text_file(f));
    } catch (const Error& e) {
      warnings.push_back(f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

// Predicted CSVs `<stem>_table<k>.csv`, in table order.
inline std::map<std::string, std::vector<std::pair<int, fs::path>>> scan_predicted_csvs(const fs::path& dir) {
  std::map<std::string, std::vector<std::pair<int, fs::path>>> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || lower_extension(e.path()) != ".csv") continue;
    const std::string name = e.path().stem().string();
    const auto pos = name.rfind("_table");
    if (pos == std::string::npos) continue;
    const std::string digits = name.substr(pos + 6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
      continue;
    out[name.substr(0, pos)].push_back({std::stoi(digits), e.path()});
  }
  for (auto& [stem, list] : out) std::sort(list.begin(), list.end());
  return out;
}

inline EvalReport run_eval(const fs::path& predicted_dir, const fs::path& truth_dir, EvalMode mode, bool strict_text = false,
                           const CsvOptions& csv = {}) {
  EvalReport rep;
  rep.mode = mode;
  const auto truth = load_truth_dir(truth_dir, rep.warnings);
  if (mode == EvalMode::icdar) {
    const auto csvs = scan_predicted_csvs(predicted_dir);
    std::map<std::string, std::vector<TableModel>> predicted;
    for (const auto& [stem, doc] : truth) {
      auto& models = predicted[stem];
      auto it = csvs.find(stem);
      if (it == csvs.end()) {
        rep.warnings.push_back(stem + ": no predicted tables");
        continue;
      }
      for (const auto& [k, path] : it->second) {
        try {
          models.push_back(parse_csv(read_text_file(path), csv));
        } catch (const Error& e) {
          rep.warnings.push_back(path.filename().string() + ": " + e.what());
        }
      }
    }
    for (const auto& [stem, list] : csvs)
      if (!truth.count(stem)) rep.warnings.push_back(stem + ": predictions without ground truth");
    auto score = icdar_score(predicted, truth, strict_text);
    rep.per_document = std::move(score.per_document);
    rep.average = score.average;
    rep.micro = score.micro;
    rep.warnings.insert(rep.warnings.end(), score.warnings.begin(), score.warnings.end());
    return rep;
  }
  // Predictions: a regions file, or a directory of `<stem>.json` page sidecars.
  std::optional<std::map<std::string, std::vector<Region>>> from_file;
  if (fs::is_regular_file(predicted_dir)) from_file = regions_by_page(parse_region_proposals(read_text_file(predicted_dir)));
  double sum_p = 0;
  double sum_r = 0;
  for (const auto& [stem, doc] : truth) {
    std::vector<Region> truth_regions;
    for (const auto& t : doc.tables) truth_regions.push_back(t.region);
    std::vector<Region> pred;
    if (from_file) {
      auto it = from_file->find(doc.image);
      if (it == from_file->end()) it = from_file->find(stem);
      if (it == from_file->end()) {
        for (const auto& [name, regions] : *from_file)
          if (fs::path(name).stem().string() == stem) it = from_file->find(name);
      }
      if (it != from_file->end()) pred = it->second;
      else rep.warnings.push_back(stem + ": no predicted regions");
    } else if (const auto path = predicted_dir / (stem + ".json"); fs::exists(path)) {
      try {
        const auto j = nlohmann::json::parse(read_text_file(path));
        const auto& fin = j.at("regions").at("final");
        if (!fin.is_array()) throw InputFormatError("\"regions.final\" must be an array");
        for (const auto& b : fin) {
          if (!b.is_array() || b.size() != 4) throw InputFormatError("a region must be [x0, y0, x1, y1]");
          pred.push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()});
        }
      } catch (const std::exception& e) {
        rep.warnings.push_back(path.filename().string() + ": " + e.what());
      }
    } else {
      rep.warnings.push_back(stem + ": no predicted regions");
    }
    DocumentScore d;
    d.id = stem;
    d.metrics = area_precision_recall(pred, truth_regions);
    sum_p += d.metrics.precision;
    sum_r += d.metrics.recall;
    rep.per_document.push_back(std::move(d));
  }
  if (!rep.per_document.empty()) {
    const double n = static_cast<double>(rep.per_document.size());
    rep.average = {sum_p / n, sum_r / n, f1_score(sum_p / n, sum_r / n)};
  }
  return rep;
}

enum class RuledMode { no, yes, mixed };

// Corpus layout. Zero or negative fields are drawn per fixture: ruled tables
// get 2..10 rows and columns, borderless ones 3..10; density is 1.0 or 0.8;
// thickness 1..3.
struct CorpusOptions {
  int rows = 0;
  int cols = 0;
  RuledMode ruled = RuledMode::mixed;
  double density = -1.0;
  double span_rate = 0.25;  // probability of a spanning header cell
  bool sparse_columns = false;
  int thickness = 0;
  int page_width = 1200;
};

struct CorpusEntry {
  std::string stem;
  std::uint64_t seed = 0;
  SynthSpec spec;
};

inline CorpusEntry corpus_entry(std::uint64_t seed, int index, const CorpusOptions& o) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };
  CorpusEntry e;
  SynthSpec& s = e.spec;
  s.ruled = o.ruled == RuledMode::mixed ? chance(0.5) : o.ruled == RuledMode::yes;
  const int lo = s.ruled ? 2 : 3;
  s.rows = o.rows > 0 ? o.rows : uniform(lo, 10);
  s.cols = o.cols > 0 ? o.cols : uniform(o.sparse_columns ? 3 : lo, 10);
  s.thickness = o.thickness > 0 ? o.thickness : uniform(1, 3);
  s.density = o.density >= 0.0 ? o.density : (chance(0.5) ? 1.0 : 0.8);
  s.spans = chance(o.span_rate);
  s.sparse_column = o.sparse_columns;
  s.page_width = o.page_width;
  e.seed = rng();
  char name[32];
  std::snprintf(name, sizeof name, "page%04d", index);
  e.stem = name;
  return e;
}

// Writes `<stem>.png`, `<stem>.xml` and `<stem>.words.json` per fixture.
inline std::vector<CorpusEntry> run_synth(std::uint64_t seed, int count, const CorpusOptions& o, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < count; ++i) {
    auto e = corpus_entry(seed, i, o);
    auto table = generate_synthetic(e.seed, e.spec);
    table.truth.image = e.stem + ".png";
    save_png(out_dir / (e.stem + ".png"), table.image);
    write_text_file(out_dir / (e.stem + ".xml"), write_groundtruth(table.truth));
    write_text_file(out_dir / (e.stem + ".words.json"), write_words_json(table.words));
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace tablecut
