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

#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tablecut/batch.hpp"

namespace {

using namespace tablecut;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool is_bool_field(const std::string& key) {
  return key == "debug_images" || key == "merge_multiline" || key == "strict_text" ||
         key == "timings";
}

// One CLI option per PipelineConfig field. Values are applied after the
// config file so flags win.
struct ConfigFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string config_file;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
    for (const auto& f : tablecut::detail::config_fields()) {
      const std::string key = f.key;
      if (is_bool_field(key)) {
        cmd.add_flag_callback(flag_name(key), [this, key] { switches[key] = true; }, "enable " + key);
        continue;
      }
      std::string name = flag_name(key);
      if (key == "ocr_command") name += ",--ocr-cmd";
      if (key == "output_dir") name = "-o," + name;
      cmd.add_option_function<std::string>(name, [this, key](const std::string& v) { values[key] = v; },
                                           "default " + f.get(PipelineConfig{}));
    }
  }

  // Defaults, then TABLECUT_OCR_CMD, then the file, then flags.
  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (const char* env = std::getenv("TABLECUT_OCR_CMD"); env && *env) cfg.ocr_command = env;
    if (!config_file.empty()) cfg = parse_config(read_text_file(config_file), cfg);
    for (const auto& [k, v] : values) set_config_value(cfg, k, v);
    for (const auto& [k, on] : switches) set_config_value(cfg, k, on ? "true" : "false");
    return cfg;
  }
};

void print_metrics_table(const EvalReport& rep) {
  std::size_t width = 8;
  for (const auto& d : rep.per_document) width = std::max(width, d.id.size());
  std::cout << std::left << std::setw(static_cast<int>(width)) << "document" << "  precision     recall         f1\n";
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& d : rep.per_document)
    std::cout << std::left << std::setw(static_cast<int>(width)) << d.id << std::right << std::setw(11)
              << d.metrics.precision << std::setw(11) << d.metrics.recall << std::setw(11) << d.metrics.f1 << '\n';
  std::cout << std::left << std::setw(static_cast<int>(width)) << "average" << std::right << std::setw(11)
            << rep.average.precision << std::setw(11) << rep.average.recall << std::setw(11) << rep.average.f1 << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tablecut: table detection and structure extraction from document images"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "detect tables and write one CSV per table");
  std::vector<std::string> inputs;
  std::string regions_file;
  bool utf8_arrows = false;
  ConfigFlags flags;
  extract->add_option("inputs", inputs, "image files or directories")->required();
  extract->add_option("--regions", regions_file, "JSON region proposals to ensemble with detection")
      ->check(CLI::ExistingFile);
  extract->add_flag("--utf8-arrows", utf8_arrows, "write EXTEND tokens with UTF-8 arrows");
  flags.attach(*extract);

  // eval
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth XML");
  std::string pred_dir;
  std::string truth_dir;
  std::string mode = "icdar";
  std::string report_path;
  bool strict_text = false;
  eval->add_option("predicted", pred_dir, "predicted CSV directory (icdar), or sidecar directory or regions file (area)")->required();
  eval->add_option("truth", truth_dir, "directory of <stem>.xml ground truth")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--mode", mode, "area or icdar")->check(CLI::IsMember({"area", "icdar"}));
  eval->add_option("--report", report_path, "write the JSON report here");
  eval->add_flag("--strict-text", strict_text, "compare cell text exactly");

  // synth
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic corpus");
  std::uint64_t seed = 1;
  int count = 10;
  std::string out_dir = "corpus";
  std::string ruled = "mixed";
  CorpusOptions corpus;
  synth->add_option("--seed", seed, "corpus seed");
  synth->add_option("--count", count, "number of pages")->check(CLI::NonNegativeNumber);
  synth->add_option("-o,--out", out_dir, "output directory");
  synth->add_option("--rows", corpus.rows, "rows per table, 0 draws 2..10 or 3..10")->check(CLI::Range(0, 40));
  synth->add_option("--cols", corpus.cols, "columns per table, 0 draws 2..10 or 3..10")->check(CLI::Range(0, 40));
  synth->add_option("--ruled", ruled, "yes, no or mixed")->check(CLI::IsMember({"yes", "no", "mixed"}));
  synth->add_option("--density", corpus.density, "cell fill probability; negative draws 1.0 or 0.8")
      ->check(CLI::Range(-1.0, 1.0));
  synth->add_option("--span-rate", corpus.span_rate, "probability of a spanning header cell")->check(CLI::Range(0.0, 1.0));
  synth->add_flag("--sparse-columns", corpus.sparse_columns, "give every table one sparse interior column");
  synth->add_option("--thickness", corpus.thickness, "ruling thickness 1..3, 0 draws")->check(CLI::Range(0, 3));
  synth->add_option("--page-width", corpus.page_width, "minimum page width in pixels")->check(CLI::Range(0, 20000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) {
      ExtractRequest req;
      try {
        req.cfg = flags.resolve();
        if (!regions_file.empty()) req.proposals = parse_region_proposals(read_text_file(regions_file));
      } catch (const Error& e) {
        std::cerr << "tablecut: " << e.what() << '\n';
        return kExitUsage;
      }
      std::vector<fs::path> args(inputs.begin(), inputs.end());
      req.inputs = collect_inputs(args);
      if (utf8_arrows) req.csv = CsvOptions::utf8_arrows();
      const auto report = run_extract(req);
      for (const auto& f : report.files) {
        for (const auto& w : f.warnings) std::cerr << f.input.string() << ": warning: " << w << '\n';
        if (f.ok)
          std::cout << f.input.string() << ": " << f.tables << " table(s)\n";
        else
          std::cerr << f.input.string() << ": error: " << f.error << '\n';
      }
      if (report.failures() > 0)
        std::cerr << report.failures() << " of " << report.files.size() << " input(s) failed\n";
      return report.exit_code();
    }
    if (*eval) {
      const auto rep = run_eval(pred_dir, truth_dir, mode == "area" ? EvalMode::area : EvalMode::icdar, strict_text);
      print_metrics_table(rep);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
      if (!report_path.empty()) write_text_file(report_path, rep.to_json().dump(2) + "\n");
      return rep.warnings.empty() ? kExitOk : kExitPartial;
    }
    if (*synth) {
      corpus.ruled = ruled == "yes" ? RuledMode::yes : ruled == "no" ? RuledMode::no : RuledMode::mixed;
      const auto entries = run_synth(seed, count, corpus, out_dir);
      std::cout << "wrote " << entries.size() << " page(s) to " << out_dir << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "tablecut: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitUsage;
}
