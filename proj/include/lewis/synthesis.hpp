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

#ifndef LEWIS_SYNTHESIS_HPP_
#define LEWIS_SYNTHESIS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lewis/classifier.hpp"
#include "lewis/editops.hpp"
#include "lewis/infill.hpp"

namespace lewis {

struct Direction {
  Style source = Style::k0;
  Style target = Style::k1;

  std::string name() const;  // "0->1"
  static Direction parse(std::string_view name);
  friend bool operator==(const Direction&, const Direction&) = default;
};

struct Origin {
  std::string file;
  std::size_t line = 0;  // 1-based
  std::uint64_t seed = 0;
};

struct SynthPair {
  Template tmpl;
  TokenSeq source;
  TokenSeq target;
  Direction direction;
  double src_prob = 0.0;  // classifier probability of the source style
  double tgt_prob = 0.0;
  bool kept = false;
  Origin origin;
};

struct SynthSentence {
  TokenSeq tokens;
  Style style = Style::k0;
  Origin origin;  // seed is assigned by synthesis
};

struct SynthConfig {
  bool slot_cap = true;
  double filter_floor = 0.5;
  double all_keep_cap = 0.05;  // max share of identical-fill pairs in kept output
  InfillDecode infill_decode;
  int workers = 1;
};

struct SynthReport {
  std::size_t inputs = 0;
  std::size_t rejected_templates = 0;  // no slot, or the fill failed
  std::size_t generated = 0;           // filled templates
  std::size_t kept = 0;                // after all-KEEP capping
  std::size_t all_keep_dropped = 0;
  double filter_rate = 0.0;            // share of generated pairs the classifier rejected
};

struct SynthResult {
  std::vector<SynthPair> pairs;  // both directions, input order
  SynthReport report;
};

// Infillers are indexed by style. Output is independent of worker count.
SynthResult synthesize(const std::vector<SynthSentence>& sentences, const StyleJudge& judge,
                       const std::array<const Infiller*, 2>& infillers, const SynthConfig& config,
                       std::uint64_t seed);

struct EditRecord {
  TokenSeq source;
  TokenSeq target;
  Direction direction;
  DualTags tags;
  MaskedTarget masked;
  std::vector<TokenSeq> fills;
};

// Gold edits for kept pairs; rejected pairs are skipped.
std::vector<EditRecord> label_pairs(const std::vector<SynthPair>& pairs);

bool is_all_keep(const DualTags& tags);

std::string pair_to_json(const SynthPair& pair, const std::string& config_hash);
std::string report_to_json(const SynthReport& report, const std::string& config_hash);
std::string record_to_json(const EditRecord& record);
EditRecord record_from_json(std::string_view line);

void write_pairs(const std::filesystem::path& path, const std::vector<SynthPair>& pairs,
                 const std::string& config_hash);
std::vector<SynthPair> read_pairs(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<EditRecord>& records);
std::vector<EditRecord> read_records(const std::filesystem::path& path);

}  // namespace lewis

#endif  // LEWIS_SYNTHESIS_HPP_
