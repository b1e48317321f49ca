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

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "lewis/errors.hpp"
#include "lewis/pipeline.hpp"
#include "lewis/toy.hpp"
#include "lewis/util.hpp"

using namespace lewis;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

Json model(bool decoder, int max_len) {
  Json arch{{"layers", 2}, {"heads", 2}, {"model_dim", 16}, {"ff_dim", 32}, {"max_len", max_len}, {"dropout", 0.0}};
  if (decoder) arch["decoder_layers"] = 1;
  return Json{{"arch", arch}, {"train", {{"steps", 6}, {"batch_size", 4}, {"lr", 1e-3}, {"warmup", 2}}}};
}

Json tiny_config() {
  const auto pair = [](const std::string& split) {
    return Json::array({"data/" + split + ".0.txt", "data/" + split + ".1.txt"});
  };
  return Json{
      {"corpora",
       {{"train", pair("train")},
        {"valid", pair("valid")},
        {"test", pair("test")},
        {"reference", pair("test_ref")},
        {"eval_classifier", pair("evalcls")}}},
      {"styles", {"negative", "positive"}},
      {"max_len", 24},
      {"min_count", 1},
      {"workdir", "work"},
      {"workers", 1},
      {"models",
       {{"classifier", model(false, 32)},
        {"eval_classifier", model(false, 32)},
        {"infiller", model(true, 40)},
        {"tagger", model(false, 40)},
        {"generator", model(true, 80)},
        {"seq2seq", model(true, 40)}}},
      {"synthesis", {{"inputs_per_style", 12}, {"infill_decode", {{"beam", 1}, {"temperature", 1.0}, {"max_fill", 3}}}}},
      {"decode", {{"beam", 2}, {"rerank", true}, {"max_fill", 3}}},
      {"seeds",
       {{"classifier", 1},
        {"eval_classifier", 2},
        {"infillers", 3},
        {"synthesis", 4},
        {"editor", 5},
        {"transfer", 6},
        {"ablation", 7}}}};
}

// A scratch directory holding a tiny toy corpus and a config file.
struct Scratch {
  explicit Scratch(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    toy::write_corpus(root / "data", 9, {40, 6, 5, 30});
    write(tiny_config());
  }
  ~Scratch() { fs::remove_all(root); }

  void write(const Json& config) const { write_file(config_path(), config.dump(2)); }
  fs::path config_path() const { return root / "config.json"; }
  RunConfig config() const { return load_run_config(config_path()); }

  fs::path root;
};

std::string key_path_of(const Json& config) {
  try {
    parse_run_config(config.dump(), "/");
  } catch (const ConfigError& e) {
    return e.key_path();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string command = std::string(LEWIS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (entry.is_regular_file() && rel.rfind("meta/", 0) != 0) out[rel] = read_file(entry.path());
  }
  return out;
}

}  // namespace

TEST_CASE("config schema violations name the key path") {
  auto config = tiny_config();
  CHECK(key_path_of(config).empty());

  auto unknown = config;
  unknown["models"]["tagger"]["arch"]["colour"] = 1;
  CHECK(key_path_of(unknown) == "models.tagger.arch.colour");

  auto top = config;
  top["extra"] = true;
  CHECK(key_path_of(top) == "extra");

  auto missing_seed = config;
  missing_seed["seeds"].erase("editor");
  CHECK(key_path_of(missing_seed) == "seeds.editor");

  auto bad_type = config;
  bad_type["decode"]["beam"] = "five";
  CHECK(key_path_of(bad_type) == "decode.beam");

  auto bad_arch = config;
  bad_arch["models"]["classifier"]["arch"]["heads"] = 3;
  CHECK(key_path_of(bad_arch) == "models.classifier.arch.model_dim");

  auto encoder_only = config;
  encoder_only["models"]["tagger"]["arch"]["decoder_layers"] = 1;
  CHECK(key_path_of(encoder_only) == "models.tagger.arch.decoder_layers");

  auto one_style = config;
  one_style["corpora"]["train"] = Json::array({"a.txt"});
  CHECK(key_path_of(one_style) == "corpora.train");
}

TEST_CASE("config hash ignores the workdir and tracks settings") {
  const auto base = parse_run_config(tiny_config().dump(), "/tmp");
  auto moved = tiny_config();
  moved["workdir"] = "elsewhere";
  CHECK(parse_run_config(moved.dump(), "/tmp").hash() == base.hash());
  auto changed = tiny_config();
  changed["decode"]["beam"] = 3;
  CHECK(parse_run_config(changed.dump(), "/tmp").hash() != base.hash());
  CHECK(base.decode.rerank);
  CHECK(base.synthesis.filter_floor == 0.5);
}

TEST_CASE("stages run in order, are reproducible and check dependencies") {
  const Scratch scratch("lewis_pipeline_test");
  const auto config = scratch.config();

  CHECK_THROWS_AS(run_stage("transfer", config, {}), StageDependencyError);
  try {
    run_stage("synthesize", config, {});
  } catch (const StageDependencyError& e) {
    CHECK(fs::path(e.missing()).filename() == "vocab.txt");
  }
  CHECK_THROWS_AS(run_stage("no-such-stage", config, {}), ConfigError);

  for (const auto& stage : {"train-classifier", "train-infillers", "synthesize"}) run_stage(stage, config, {});
  try {
    run_stage("transfer", config, {});
    FAIL("transfer ran before train-editor");
  } catch (const StageDependencyError& e) {
    CHECK(fs::path(e.missing()).filename() == "tagger.lmdl");
  }
  for (const auto& stage : {"train-editor", "transfer", "evaluate", "ablate", "edit-stats"}) {
    run_stage(stage, config, {});
  }
  const auto workdir = config.workdir;
  for (const auto& file : {"report.json", "report.csv", "ablation.json", "edit_stats.json", "transfer.jsonl",
                           "pairs.jsonl", "records.jsonl", "meta/evaluate.json"}) {
    CHECK(fs::exists(workdir / file));
  }
  const auto meta = Json::parse(read_file(workdir / "meta" / "ablate.json"));
  CHECK(meta.at("config_hash") == config.hash());
  CHECK(meta.contains("git_describe"));
  CHECK(meta.contains("wall_seconds"));
  const auto report = Json::parse(read_file(workdir / "report.json"));
  CHECK(report.at("config_hash") == config.hash());
  const auto& copy = report.at("systems").at(1);
  CHECK(copy.at("system") == "input_copy");
  CHECK(copy.at("sbleu").get<double>() == 100.0);
  const auto ablation = Json::parse(read_file(workdir / "ablation.json"));
  CHECK(ablation.at("systems").size() == 5);

  // A second workdir under the same seeds reproduces every artifact.
  auto again = config;
  again.workdir = scratch.root / "work_again";
  for (const auto& stage : stage_names()) run_stage(stage, again, {});
  CHECK(artifacts(workdir) == artifacts(again.workdir));

  // Artifacts from another configuration are refused unless forced.
  auto other = tiny_config();
  other["decode"]["beam"] = 3;
  scratch.write(other);
  const auto changed = scratch.config();
  CHECK_THROWS_AS(run_stage("evaluate", changed, {}), HashMismatch);
  StageOptions force;
  force.force = true;
  CHECK_NOTHROW(run_stage("evaluate", changed, force));

  // Seed override changes the hash and the seeds recorded in metadata.
  StageOptions override_seed;
  override_seed.seed_override = 99;
  run_stage("edit-stats", config, override_seed);
  const auto overridden = Json::parse(read_file(workdir / "meta" / "edit-stats.json"));
  CHECK(overridden.at("config_hash") != config.hash());
  CHECK(overridden.at("seed_override") == 99);
}

TEST_CASE("a held lock blocks a second stage in the same workdir") {
  const Scratch scratch("lewis_lock_test");
  const auto config = scratch.config();
  const WorkdirLock lock(config.workdir);
  CHECK_THROWS_AS(run_stage("train-classifier", config, {}), IoError);
}

TEST_CASE("command line exit codes") {
  const Scratch scratch("lewis_cli_test");
  const std::string cfg = "--config " + scratch.config_path().string();
  CHECK(run_cli("transfer " + cfg) == 3);
  CHECK(run_cli("train-classifier " + cfg) == 0);
  CHECK(run_cli("train-classifier " + cfg + " --workdir " + (scratch.root / "w2").string()) == 0);
  CHECK(fs::exists(scratch.root / "w2" / "classifier.lmdl"));

  auto unknown = tiny_config();
  unknown["decode"]["sampling"] = true;
  scratch.write(unknown);
  CHECK(run_cli("train-classifier " + cfg) == 2);
  CHECK(run_cli("train-classifier --config " + (scratch.root / "missing.json").string()) == 2);
  CHECK(run_cli("no-such-stage " + cfg) == 2);
}
