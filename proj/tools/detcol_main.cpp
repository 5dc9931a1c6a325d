// Copyright 2026 The detcol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "detcol/dynamics.hpp"
#include "detcol/experiment.hpp"

namespace {

// Exit codes: 2 parse error, 3 validation failure, 4 numerical failure.
void report_error(const std::string& stage, int code, const std::string& message,
                  const std::string& out_dir) {
  nlohmann::json record;
  record["error"] = {{"stage", stage}, {"exit_code", code}, {"message", message}};
  std::cerr << record.dump() << '\n';
  if (!out_dir.empty() && std::filesystem::is_directory(out_dir)) {
    std::ofstream file(std::filesystem::path(out_dir) / "error.json");
    if (file) file << record.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic hidden-variable collapse simulator"};
  app.set_version_flag("--version", std::string(detcol::kToolVersion));

  bool list_experiments = false;
  app.add_flag("--list-experiments", list_experiments,
               "Print the available experiment kinds and exit");

  std::string spec_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> samples_override;
  std::optional<std::string> out_override;

  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment spec file");
  run_cmd->add_option("spec-file", spec_path, "Flat key = value document")
      ->required();
  run_cmd->add_option("--seed", seed_override, "Override the spec seed");
  run_cmd->add_option("--samples", samples_override,
                      "Override the spec sample count");
  run_cmd->add_option("--out", out_override, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  if (list_experiments) {
    for (const std::string& name : detcol::experiment_kind_names()) {
      std::cout << name << '\n';
    }
    return 0;
  }
  if (!run_cmd->parsed()) {
    std::cout << app.help();
    return 0;
  }

  std::string out_dir;
  try {
    detcol::ExperimentSpec spec = detcol::parse_spec_file(spec_path);
    if (seed_override) spec.seed = *seed_override;
    if (samples_override) spec.samples = *samples_override;
    if (out_override) spec.out_dir = *out_override;
    out_dir = spec.out_dir;
    for (const std::string& warning : spec.warnings) {
      std::cerr << "warning: " << warning << '\n';
    }
    return detcol::run(spec);
  } catch (const detcol::ParseError& e) {
    report_error("parse", 2, e.what(), out_dir);
    return 2;
  } catch (const detcol::SpecError& e) {
    report_error("validate", 3, e.what(), out_dir);
    return 3;
  } catch (const std::invalid_argument& e) {
    report_error("validate", 3, e.what(), out_dir);
    return 3;
  } catch (const detcol::IntegrationError& e) {
    report_error("run", 4, e.what(), out_dir);
    return 4;
  } catch (const std::exception& e) {
    report_error("run", 4, e.what(), out_dir);
    return 4;
  }
}
