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

#ifndef LEWIS_PIPELINE_HPP_
#define LEWIS_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lewis/editor.hpp"
#include "lewis/infill.hpp"
#include "lewis/nn/train.hpp"
#include "lewis/synthesis.hpp"

namespace lewis {

struct ModelSpec {
  nn::ModelConfig arch;
  nn::TrainConfig train;
};

struct StylePaths {
  std::array<std::filesystem::path, 2> files;  // indexed by style
};

struct RunConfig {
  StylePaths train;
  StylePaths valid;
  StylePaths test;
  std::optional<StylePaths> reference;  // opposite-style references of test, line aligned
  StylePaths eval_classifier;
  std::array<std::string, 2> styles;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t min_count = 1;
  std::filesystem::path workdir;
  int workers = 1;

  ModelSpec classifier;
  ModelSpec eval_classifier_model;
  ModelSpec infiller;
  ModelSpec tagger;
  ModelSpec generator;
  ModelSpec seq2seq;

  SynthConfig synthesis;
  NoiseConfig noise;
  std::size_t synthesis_inputs = 0;  // per style; 0 uses the whole train split
  EditorDecode decode;

  std::map<std::string, std::uint64_t> seeds;  // one per stage

  // Hash of the canonical JSON (workdir excluded).
  std::string hash() const;
  std::uint64_t seed(const std::string& stage) const;
};

// Relative corpus paths resolve against `base`. Throws ConfigError naming
// the offending key path.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);
std::string canonical_config_json(const RunConfig& config);

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"train-classifier", "train-infillers", "synthesize",
                                              "train-editor",     "transfer",        "evaluate",
                                              "ablate",           "edit-stats"};
  return names;
}

struct StageOptions {
  bool force = false;
  std::optional<std::uint64_t> seed_override;
};

// Runs one stage in config.workdir. Throws StageDependencyError when an
// input artifact is missing, and HashMismatch when `evaluate` sees inputs
// from another configuration without `force`.
void run_stage(const std::string& stage, RunConfig config, const StageOptions& options);

// Holds an exclusive lock file in the workdir for the object's lifetime.
class WorkdirLock {
 public:
  explicit WorkdirLock(const std::filesystem::path& workdir);
  ~WorkdirLock();
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace lewis

#endif  // LEWIS_PIPELINE_HPP_
