// Copyright 2026 The Lewis Authors. All Rights Reserved.
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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lewis/errors.hpp"
#include "lewis/pipeline.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDependency = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lewis: edit-based text style transfer pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workdir;
  std::uint64_t seed_override = 0;
  bool force = false;
  for (const auto& stage : lewis::stage_names()) {
    auto* sub = app.add_subcommand(stage, "run the " + stage + " stage");
    sub->add_option("--config", config_path, "run configuration JSON")->required();
    sub->add_option("--workdir", workdir, "override the configured workdir");
    sub->add_option("--seed-override", seed_override, "derive every stage seed from this value");
    sub->add_flag("--force", force, "accept inputs produced under another config hash");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  try {
    lewis::RunConfig config = lewis::load_run_config(config_path);
    if (!workdir.empty()) config.workdir = workdir;
    lewis::StageOptions options;
    options.force = force;
    if (sub->count("--seed-override") > 0) options.seed_override = seed_override;
    lewis::run_stage(stage, config, options);
  } catch (const lewis::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lewis::StageDependencyError& e) {
    std::cerr << "stage dependency error: " << e.what() << "\n";
    return kExitDependency;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return 0;
}
