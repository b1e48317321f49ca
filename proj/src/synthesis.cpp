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

#include "lewis/synthesis.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis {
namespace {

using Json = nlohmann::ordered_json;

struct Filled {
  Template tmpl;
  std::array<TokenSeq, 2> fills;
  std::array<double, 2> probs{};  // probability of the intended style
  bool kept = false;
  std::uint64_t seed = 0;
  bool ok = false;
};

std::string joined(const TokenSeq& tokens) { return join(tokens, " "); }

TokenSeq split(const std::string& text) {
  TokenSeq out;
  std::istringstream is(text);
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

Json parse_line(std::string_view line) {
  try {
    return Json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad JSON line: ") + e.what());
  }
}

}  // namespace

std::string Direction::name() const {
  return std::to_string(style_index(source)) + "->" + std::to_string(style_index(target));
}

Direction Direction::parse(std::string_view name) {
  if (name == "0->1") return {Style::k0, Style::k1};
  if (name == "1->0") return {Style::k1, Style::k0};
  throw FormatError("bad direction: " + std::string(name));
}

bool is_all_keep(const DualTags& tags) {
  return std::none_of(tags.insert_before.begin(), tags.insert_before.end(), [](bool b) { return b; }) &&
         std::all_of(tags.ops.begin(), tags.ops.end(), [](CoarseOp op) { return op == CoarseOp::kKeep; });
}

SynthResult synthesize(const std::vector<SynthSentence>& sentences, const StyleJudge& judge,
                       const std::array<const Infiller*, 2>& infillers, const SynthConfig& config,
                       std::uint64_t seed) {
  for (int k = 0; k < 2; ++k) {
    if (infillers[k] == nullptr || style_index(infillers[k]->style()) != k) {
      throw ConfigError("synthesis.infillers", "need one infiller per style, indexed by style");
    }
  }
  std::vector<Filled> filled(sentences.size());
  parallel_for(sentences.size(), config.workers, [&](std::size_t i) {
    const auto& s = sentences[i];
    Filled& f = filled[i];
    f.seed = derive_seed(seed, {fnv1a64(s.origin.file), s.origin.line, i});
    f.tmpl = judge.extract_template(s.tokens, config.slot_cap);
    if (f.tmpl.slot_count == 0) return;
    try {
      for (int k = 0; k < 2; ++k) {
        InfillDecode decode = config.infill_decode;
        decode.seed = derive_seed(f.seed, {static_cast<std::uint64_t>(k)});
        f.fills[k] = infillers[k]->fill(f.tmpl, decode);
      }
    } catch (const ConstraintFailure&) {
      return;
    }
    f.ok = true;
    bool agree = true;
    for (int k = 0; k < 2; ++k) {
      // Ties count as predicting either style.
      const Classification c = judge.classify(f.fills[k]);
      f.probs[k] = c.probs[k];
      agree = agree && c.probs[k] >= c.probs[1 - k] && c.probs[k] >= config.filter_floor;
    }
    f.kept = agree;
  });

  SynthResult result;
  SynthReport& report = result.report;
  report.inputs = sentences.size();
  std::vector<std::size_t> identical;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i].ok) {
      ++report.rejected_templates;
      continue;
    }
    ++report.generated;
    if (!filled[i].kept) continue;
    ++kept;
    if (filled[i].fills[0] == filled[i].fills[1]) identical.push_back(i);
  }
  report.filter_rate =
      report.generated ? 1.0 - static_cast<double>(kept) / static_cast<double>(report.generated) : 0.0;

  // Reservoir-sample the identical-fill pairs down to the cap share.
  std::vector<bool> dropped(filled.size(), false);
  const double cap = std::clamp(config.all_keep_cap, 0.0, 0.999);
  const std::size_t others = kept - identical.size();
  const auto allowed = std::min(identical.size(),
                                static_cast<std::size_t>(cap * static_cast<double>(others) / (1.0 - cap)));
  if (allowed < identical.size()) {
    std::vector<std::size_t> reservoir(identical.begin(), identical.begin() + static_cast<std::ptrdiff_t>(allowed));
    Rng rng(derive_seed(seed, {0xa11c0de}));
    for (std::size_t j = allowed; j < identical.size(); ++j) {
      const std::size_t r = rng.index(j + 1);
      if (r < allowed) reservoir[r] = identical[j];
    }
    for (std::size_t i : identical) dropped[i] = true;
    for (std::size_t i : reservoir) dropped[i] = false;
    report.all_keep_dropped = identical.size() - allowed;
  }
  report.kept = kept - report.all_keep_dropped;

  for (std::size_t i = 0; i < filled.size(); ++i) {
    const Filled& f = filled[i];
    if (!f.ok || dropped[i]) continue;
    Origin origin = sentences[i].origin;
    origin.seed = f.seed;
    for (int k = 0; k < 2; ++k) {
      SynthPair p;
      p.tmpl = f.tmpl;
      p.source = f.fills[k];
      p.target = f.fills[1 - k];
      p.direction = {style_from_index(k), style_from_index(1 - k)};
      p.src_prob = f.probs[k];
      p.tgt_prob = f.probs[1 - k];
      p.kept = f.kept;
      p.origin = origin;
      result.pairs.push_back(std::move(p));
    }
  }
  return result;
}

std::vector<EditRecord> label_pairs(const std::vector<SynthPair>& pairs) {
  std::vector<EditRecord> out;
  for (const auto& p : pairs) {
    if (!p.kept) continue;
    GoldEdit gold = gold_edit(p.source, p.target);
    out.push_back({p.source, p.target, p.direction, std::move(gold.tags), std::move(gold.masked),
                   std::move(gold.fills)});
  }
  return out;
}

std::string pair_to_json(const SynthPair& pair, const std::string& config_hash) {
  Json j;
  j["template"] = pair.tmpl.render();
  j["source"] = joined(pair.source);
  j["target"] = joined(pair.target);
  j["source_style"] = style_index(pair.direction.source);
  j["target_style"] = style_index(pair.direction.target);
  j["src_prob"] = pair.src_prob;
  j["tgt_prob"] = pair.tgt_prob;
  j["kept"] = pair.kept;
  j["direction"] = pair.direction.name();
  j["origin"] = {{"file", pair.origin.file}, {"line", pair.origin.line}, {"seed", pair.origin.seed}};
  j["config_hash"] = config_hash;
  return j.dump();
}

std::string report_to_json(const SynthReport& report, const std::string& config_hash) {
  Json j;
  j["inputs"] = report.inputs;
  j["rejected_templates"] = report.rejected_templates;
  j["generated"] = report.generated;
  j["kept"] = report.kept;
  j["all_keep_dropped"] = report.all_keep_dropped;
  j["filter_rate"] = report.filter_rate;
  j["reference_filter_rate"] = 0.20;
  j["config_hash"] = config_hash;
  return j.dump(2);
}

std::string record_to_json(const EditRecord& record) {
  Json j;
  j["source"] = joined(record.source);
  j["target"] = joined(record.target);
  j["direction"] = record.direction.name();
  j["tags"] = render_tags(record.tags);
  j["masked"] = joined(record.masked.tokens);
  Json fills = Json::array();
  for (const auto& f : record.fills) fills.push_back(joined(f));
  j["fills"] = fills;
  return j.dump();
}

EditRecord record_from_json(std::string_view line) {
  const Json j = parse_line(line);
  try {
    EditRecord r;
    r.source = split(j.at("source").get<std::string>());
    r.target = split(j.at("target").get<std::string>());
    r.direction = Direction::parse(j.at("direction").get<std::string>());
    GoldEdit gold = gold_edit(r.source, r.target);
    if (render_tags(gold.tags) != j.at("tags").get<std::string>()) {
      throw FormatError("record tags do not match its source/target pair");
    }
    r.tags = std::move(gold.tags);
    r.masked = std::move(gold.masked);
    r.fills = std::move(gold.fills);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad record: ") + e.what());
  }
}

void write_pairs(const std::filesystem::path& path, const std::vector<SynthPair>& pairs,
                 const std::string& config_hash) {
  std::string out;
  for (const auto& p : pairs) out += pair_to_json(p, config_hash) + '\n';
  write_file(path, out);
}

std::vector<SynthPair> read_pairs(const std::filesystem::path& path) {
  std::vector<SynthPair> out;
  std::istringstream is(read_file(path));
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    const Json j = parse_line(line);
    try {
      SynthPair p;
      p.tmpl = Template::parse(j.at("template").get<std::string>());
      p.source = split(j.at("source").get<std::string>());
      p.target = split(j.at("target").get<std::string>());
      p.direction = Direction::parse(j.at("direction").get<std::string>());
      p.src_prob = j.at("src_prob").get<double>();
      p.tgt_prob = j.at("tgt_prob").get<double>();
      p.kept = j.at("kept").get<bool>();
      const auto& o = j.at("origin");
      p.origin = {o.at("file").get<std::string>(), o.at("line").get<std::size_t>(),
                  o.at("seed").get<std::uint64_t>()};
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad pair: ") + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<EditRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r) + '\n';
  write_file(path, out);
}

std::vector<EditRecord> read_records(const std::filesystem::path& path) {
  std::vector<EditRecord> out;
  std::istringstream is(read_file(path));
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) out.push_back(record_from_json(line));
  }
  return out;
}

}  // namespace lewis
