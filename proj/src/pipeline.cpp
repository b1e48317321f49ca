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

#include "lewis/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lewis/classifier.hpp"
#include "lewis/errors.hpp"
#include "lewis/evalkit.hpp"
#include "lewis/util.hpp"

#ifndef LEWIS_GIT_DESCRIBE
#define LEWIS_GIT_DESCRIBE "unknown"
#endif

namespace lewis {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const std::vector<std::string> kSeedKeys{"classifier", "eval_classifier", "infillers", "synthesis",
                                         "editor",     "transfer",        "ablation"};

// Walks one JSON object, rejecting unknown keys.
class Section {
 public:
  Section(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
    if (!json_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : json_.items()) {
      if (!seen_.count(key)) throw ConfigError(key_path(key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return json_.contains(key);
  }
  const Json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(key_path(key), "missing required key");
    return json_.at(key);
  }
  Section section(const std::string& key) { return Section(at(key), key_path(key)); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  T get(const std::string& key) {
    const Json& v = at(key);
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key_path(key), "wrong type");
    }
  }
  template <typename T>
  void optional(const std::string& key, T& out) {
    if (has(key)) out = get<T>(key);
  }
  template <typename T>
  void positive(const std::string& key, T& out) {
    optional(key, out);
    if (out <= T(0)) throw ConfigError(key_path(key), "must be positive");
  }

 private:
  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

StylePaths parse_paths(Section& parent, const std::string& key, const fs::path& base) {
  const Json& v = parent.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string()) {
    throw ConfigError(parent.key_path(key), "expected two file paths, one per style");
  }
  StylePaths out;
  for (int k = 0; k < 2; ++k) {
    const fs::path p = v[static_cast<std::size_t>(k)].get<std::string>();
    out.files[static_cast<std::size_t>(k)] = p.is_absolute() ? p : base / p;
  }
  return out;
}

ModelSpec parse_model_spec(Section& models, const std::string& role_key, nn::Role role, bool needs_decoder) {
  Section spec = models.section(role_key);
  ModelSpec out;
  {
    Section arch = spec.section("arch");
    auto& a = out.arch;
    arch.positive("layers", a.layers);
    arch.positive("heads", a.heads);
    arch.positive("model_dim", a.model_dim);
    arch.positive("ff_dim", a.ff_dim);
    if (needs_decoder) {
      arch.positive("decoder_layers", a.decoder_layers);
    } else if (arch.has("decoder_layers")) {
      throw ConfigError(arch.key_path("decoder_layers"), "role has no decoder");
    }
    arch.positive("max_len", a.max_len);
    arch.optional("dropout", a.dropout);
    if (a.dropout < 0.0 || a.dropout >= 1.0) throw ConfigError(arch.key_path("dropout"), "must be in [0, 1)");
    try {
      nn::ModelConfig probe = a;
      probe.vocab_size = special::kCount + 1;  // the real size is known after the vocabulary is built
      probe.validate(role);
    } catch (const ConfigError& e) {
      throw ConfigError(arch.key_path(e.key_path()), e.what());
    }
  }
  {
    Section train = spec.section("train");
    auto& t = out.train;
    train.positive("steps", t.steps);
    train.positive("batch_size", t.batch_size);
    train.positive("lr", t.lr);
    train.optional("warmup", t.warmup);
    train.optional("clip", t.clip);
    train.optional("beta1", t.beta1);
    train.optional("beta2", t.beta2);
    train.positive("epsilon", t.epsilon);
  }
  return out;
}

Json model_spec_json(const ModelSpec& m, bool decoder) {
  Json arch{{"layers", m.arch.layers},   {"heads", m.arch.heads},     {"model_dim", m.arch.model_dim},
            {"ff_dim", m.arch.ff_dim},   {"max_len", m.arch.max_len}, {"dropout", m.arch.dropout}};
  if (decoder) arch["decoder_layers"] = m.arch.decoder_layers;
  Json train{{"steps", m.train.steps}, {"batch_size", m.train.batch_size}, {"lr", m.train.lr},
             {"warmup", m.train.warmup}, {"clip", m.train.clip},         {"beta1", m.train.beta1},
             {"beta2", m.train.beta2},  {"epsilon", m.train.epsilon}};
  return Json{{"arch", arch}, {"train", train}};
}

// Corpus identity for hashing: content digest, so the hash does not depend
// on where the files live.
Json paths_json(const StylePaths& p) {
  Json out = Json::array();
  for (const auto& f : p.files) {
    std::error_code ec;
    if (fs::exists(f, ec)) {
      out.push_back("fnv:" + hex64(fnv1a64(read_file(f))));
    } else {
      out.push_back(f.filename().string());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage plumbing.

struct Stage {
  RunConfig config;
  StageOptions options;
  std::string name;
  std::string hash;
  fs::path dir;
  std::vector<std::string> artifacts;

  fs::path path(const std::string& file) const { return dir / file; }

  fs::path require(const std::string& file) const {
    const fs::path p = path(file);
    if (!fs::exists(p)) throw StageDependencyError(p.string());
    return p;
  }

  void write(const std::string& file, std::string_view bytes) {
    write_file(path(file), bytes);
    artifacts.push_back(file);
  }

  void save(const std::string& file, nn::ModelBundle model) {
    model.config_hash = hash;
    write(file, nn::serialize_model(model));
  }

  nn::TrainConfig train_config(const ModelSpec& spec) const {
    nn::TrainConfig t = spec.train;
    t.workers = config.workers;
    return t;
  }

  nn::ModelConfig arch(const ModelSpec& spec) const { return spec.arch; }
};

std::vector<StyleExample> load_split(const StylePaths& paths, std::size_t max_len, std::size_t limit = 0) {
  std::vector<StyleExample> out;
  for (int k = 0; k < 2; ++k) {
    auto corpus = load_style_corpus(paths.files[static_cast<std::size_t>(k)], style_from_index(k), max_len);
    if (limit > 0 && corpus.examples.size() > limit) corpus.examples.resize(limit);
    out.insert(out.end(), corpus.examples.begin(), corpus.examples.end());
  }
  return out;
}

std::vector<LabeledSentence> labeled(const std::vector<StyleExample>& examples) {
  std::vector<LabeledSentence> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back({e.tokens, e.style});
  return out;
}

Vocabulary load_vocab(const Stage& s) { return Vocabulary::load(s.require("vocab.txt")); }

nn::ModelBundle load(const Stage& s, const std::string& file, const Vocabulary& vocab) {
  return nn::load_model(s.require(file), vocab);
}

std::string joined(const TokenSeq& t) { return join(t, " "); }

TokenSeq split_tokens(const std::string& text) {
  TokenSeq out;
  std::istringstream is(text);
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> out;
  std::istringstream is(read_file(path));
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return out;
}

std::string jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + '\n';
  return out;
}

struct TestItem {
  TokenSeq source;
  Direction direction;
  std::optional<TokenSeq> reference;
};

std::vector<TestItem> test_items(const RunConfig& c) {
  std::vector<TestItem> items;
  for (int k = 0; k < 2; ++k) {
    const auto style = style_from_index(k);
    const auto tests = load_style_corpus(c.test.files[static_cast<std::size_t>(k)], style, c.max_len).examples;
    std::vector<StyleExample> refs;
    if (c.reference) {
      refs = load_style_corpus(c.reference->files[static_cast<std::size_t>(k)], opposite(style), c.max_len).examples;
      if (refs.size() != tests.size()) {
        throw ConfigError("corpora.reference", "reference file must align line by line with the test file");
      }
    }
    for (std::size_t i = 0; i < tests.size(); ++i) {
      TestItem item{tests[i].tokens, {style, opposite(style)}, std::nullopt};
      if (c.reference) item.reference = refs[i].tokens;
      items.push_back(std::move(item));
    }
  }
  return items;
}

Json transfer_json(const TestItem& item, const TransferResult& r, const std::string& hash) {
  Json j;
  j["source"] = joined(item.source);
  j["output"] = joined(r.output);
  j["direction"] = item.direction.name();
  j["tags"] = render_tags(r.tags);
  Json cands = Json::array();
  for (const auto& c : r.candidates) {
    cands.push_back(Json{{"text", joined(c.text)}, {"model_score", c.model_score}, {"cls_prob", c.cls_prob}});
  }
  j["candidates"] = cands;
  j["chosen"] = r.chosen;
  j["fallback"] = r.fallback;
  if (item.reference) j["reference"] = joined(*item.reference);
  j["config_hash"] = hash;
  return j;
}

std::vector<TransferResult> run_editor(const std::vector<TestItem>& items, const Editor& editor,
                                       const EditorDecode& decode, int workers) {
  std::vector<TransferResult> out(items.size());
  parallel_for(items.size(), workers, [&](std::size_t i) { out[i] = editor.transfer(items[i].source, items[i].direction, decode); });
  return out;
}

std::vector<EvalInput> eval_inputs(const std::vector<TestItem>& items, const std::vector<TokenSeq>& outputs) {
  std::vector<EvalInput> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out.push_back({items[i].source, outputs[i], items[i].direction.target, items[i].reference});
  }
  return out;
}

Json summary_json(const EvalReport& r) {
  Json j;
  j["system"] = r.system;
  j["accuracy"] = r.accuracy;
  j["sbleu"] = r.sbleu;
  j["bleu"] = r.bleu ? Json(*r.bleu) : Json(nullptr);
  return j;
}

void check_hash(const Stage& s, const std::string& what, const std::string& found) {
  if (found != s.hash && !s.options.force) {
    throw HashMismatch(what + " was produced by config " + found + ", current config is " + s.hash +
                       " (use --force to evaluate anyway)");
  }
}

// ---------------------------------------------------------------------------
// Stages.

void train_classifier_stage(Stage& s) {
  const auto& c = s.config;
  const auto train = load_split(c.train, c.max_len);
  const auto valid = load_split(c.valid, c.max_len);
  std::vector<TokenSeq> text;
  for (const auto& e : train) text.push_back(e.tokens);
  const Vocabulary vocab = build_vocabulary(text, c.min_count);
  s.write("vocab.txt", vocab.serialize());

  const auto clf = train_classifier(labeled(train), labeled(valid), vocab, s.arch(c.classifier),
                                    s.train_config(c.classifier), c.seed("classifier"));
  s.save("classifier.lmdl", clf.model);
  log_info("classifier held-out accuracy " + std::to_string(clf.heldout_accuracy));

  const auto eval_train = load_split(c.eval_classifier, c.max_len);
  const auto eval = train_classifier(labeled(eval_train), labeled(valid), vocab, s.arch(c.eval_classifier_model),
                                     s.train_config(c.eval_classifier_model), c.seed("eval_classifier"));
  s.save("eval_classifier.lmdl", eval.model);
  log_info("evaluation classifier held-out accuracy " + std::to_string(eval.heldout_accuracy));

  Json report{{"heldout_accuracy", clf.heldout_accuracy},
              {"eval_heldout_accuracy", eval.heldout_accuracy},
              {"final_loss", clf.loss_curve.empty() ? 0.0 : clf.loss_curve.back()},
              {"eval_final_loss", eval.loss_curve.empty() ? 0.0 : eval.loss_curve.back()},
              {"query_row", "cls"},
              {"config_hash", s.hash}};
  s.write("classifier_report.json", report.dump(2));
}

void train_infillers_stage(Stage& s) {
  const auto& c = s.config;
  const Vocabulary vocab = load_vocab(s);
  Json report{{"config_hash", s.hash}};
  for (int k = 0; k < 2; ++k) {
    const auto style = style_from_index(k);
    const auto corpus = load_style_corpus(c.train.files[static_cast<std::size_t>(k)], style, c.max_len);
    std::vector<TokenSeq> text;
    for (const auto& e : corpus.examples) text.push_back(e.tokens);
    const auto trained = train_infiller(text, style, vocab, s.arch(c.infiller), s.train_config(c.infiller), c.noise,
                                        derive_seed(c.seed("infillers"), {static_cast<std::uint64_t>(k)}));
    s.save("infiller." + std::to_string(k) + ".lmdl", trained.model);
    report["final_loss_" + std::to_string(k)] = trained.loss_curve.empty() ? 0.0 : trained.loss_curve.back();
  }
  s.write("infiller_report.json", report.dump(2));
}

void synthesize_stage(Stage& s) {
  const auto& c = s.config;
  const Vocabulary vocab = load_vocab(s);
  const StyleClassifier judge(load(s, "classifier.lmdl", vocab), vocab);
  const NeuralInfiller neg(load(s, "infiller.0.lmdl", vocab), vocab);
  const NeuralInfiller pos(load(s, "infiller.1.lmdl", vocab), vocab);

  std::vector<SynthSentence> inputs;
  for (int k = 0; k < 2; ++k) {
    const auto& file = c.train.files[static_cast<std::size_t>(k)];
    auto corpus = load_style_corpus(file, style_from_index(k), c.max_len).examples;
    if (c.synthesis_inputs > 0 && corpus.size() > c.synthesis_inputs) corpus.resize(c.synthesis_inputs);
    for (const auto& e : corpus) inputs.push_back({e.tokens, e.style, {file.filename().string(), e.line, 0}});
  }
  SynthConfig synth = c.synthesis;
  synth.workers = c.workers;
  const auto result = synthesize(inputs, judge, {&neg, &pos}, synth, c.seed("synthesis"));
  std::string pairs;
  for (const auto& p : result.pairs) pairs += pair_to_json(p, s.hash) + '\n';
  s.write("pairs.jsonl", pairs);
  s.write("synth_report.json", report_to_json(result.report, s.hash));
  std::string records;
  for (const auto& r : label_pairs(result.pairs)) records += record_to_json(r) + '\n';
  s.write("records.jsonl", records);
  log_info("synthesis kept " + std::to_string(result.report.kept) + " of " +
           std::to_string(result.report.generated) + " (filter rate " + std::to_string(result.report.filter_rate) +
           ")");
}

struct EditorModels {
  nn::ModelBundle tagger;
  nn::ModelBundle generator;
  Json report;
};

EditorModels train_editor_models(const std::vector<EditRecord>& records, const Vocabulary& vocab, const Stage& s,
                                 std::uint64_t seed) {
  const auto& c = s.config;
  std::vector<EditRecord> train, heldout;
  for (std::size_t i = 0; i < records.size(); ++i) (i % 20 == 19 ? heldout : train).push_back(records[i]);
  const auto tagger = train_tagger(train, heldout, vocab, s.arch(c.tagger), s.train_config(c.tagger),
                                   derive_seed(seed, {1}));
  const auto generator = train_generator(train, vocab, s.arch(c.generator), s.train_config(c.generator),
                                         derive_seed(seed, {2}));
  Json report{{"records", records.size()},
              {"heldout_records", heldout.size()},
              {"insert_accuracy", tagger.heldout.insert},
              {"op_accuracy", tagger.heldout.op},
              {"joint_accuracy", tagger.heldout.joint},
              {"tagger_final_loss", tagger.loss_curve.empty() ? 0.0 : tagger.loss_curve.back()},
              {"generator_final_loss", generator.loss_curve.empty() ? 0.0 : generator.loss_curve.back()}};
  return {tagger.model, generator.model, report};
}

void train_editor_stage(Stage& s) {
  const Vocabulary vocab = load_vocab(s);
  const auto records = read_records(s.require("records.jsonl"));
  auto models = train_editor_models(records, vocab, s, s.config.seed("editor"));
  s.save("tagger.lmdl", models.tagger);
  s.save("generator.lmdl", models.generator);
  models.report["config_hash"] = s.hash;
  s.write("editor_report.json", models.report.dump(2));
}

void transfer_stage(Stage& s) {
  const auto& c = s.config;
  const Vocabulary vocab = load_vocab(s);
  const Tagger tagger(load(s, "tagger.lmdl", vocab), vocab);
  const auto generator = load(s, "generator.lmdl", vocab);
  const StyleClassifier judge(load(s, "classifier.lmdl", vocab), vocab);
  const Editor editor(tagger, generator, vocab, &judge);
  const auto items = test_items(c);
  const auto results = run_editor(items, editor, c.decode, c.workers);
  std::vector<Json> rows;
  std::size_t fallbacks = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    rows.push_back(transfer_json(items[i], results[i], s.hash));
    fallbacks += results[i].fallback;
  }
  s.write("transfer.jsonl", jsonl(rows));
  log_info("transferred " + std::to_string(items.size()) + " sentences, " + std::to_string(fallbacks) +
           " fallbacks");
}

struct TransferRows {
  std::vector<TestItem> items;
  std::vector<TokenSeq> outputs;
  std::vector<std::string> hashes;
};

TransferRows read_transfer(const fs::path& path) {
  TransferRows out;
  for (const auto& j : read_jsonl(path)) {
    try {
      TestItem item{split_tokens(j.at("source").get<std::string>()),
                    Direction::parse(j.at("direction").get<std::string>()), std::nullopt};
      if (j.contains("reference")) item.reference = split_tokens(j.at("reference").get<std::string>());
      out.items.push_back(std::move(item));
      out.outputs.push_back(split_tokens(j.at("output").get<std::string>()));
      out.hashes.push_back(j.at("config_hash").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return out;
}

void evaluate_stage(Stage& s) {
  const Vocabulary vocab = load_vocab(s);
  const auto transfer = read_transfer(s.require("transfer.jsonl"));
  for (const auto& h : transfer.hashes) check_hash(s, "transfer.jsonl", h);
  const auto eval_model = load(s, "eval_classifier.lmdl", vocab);
  check_hash(s, "eval_classifier.lmdl", eval_model.config_hash);
  const StyleClassifier eval(eval_model, vocab);

  const auto editor = evaluate("editor", eval_inputs(transfer.items, transfer.outputs), eval);
  std::vector<TokenSeq> copies;
  for (const auto& item : transfer.items) copies.push_back(item.source);
  const auto copy = evaluate("input_copy", eval_inputs(transfer.items, copies), eval);

  Json report;
  report["config_hash"] = s.hash;
  report["examples"] = transfer.items.size();
  report["systems"] = Json::array({summary_json(editor), summary_json(copy)});
  s.write("report.json", report.dump(2));
  s.write("report.csv", report_csv(editor));
  log_info("editor accuracy " + std::to_string(editor.accuracy) + ", self-BLEU " + std::to_string(editor.sbleu));
}

void ablate_stage(Stage& s) {
  const auto& c = s.config;
  const Vocabulary vocab = load_vocab(s);
  const auto transfer = read_transfer(s.require("transfer.jsonl"));
  const auto records = read_records(s.require("records.jsonl"));
  const auto pairs = read_pairs(s.require("pairs.jsonl"));
  const StyleClassifier judge(load(s, "classifier.lmdl", vocab), vocab);
  const StyleClassifier eval(load(s, "eval_classifier.lmdl", vocab), vocab);
  const Tagger tagger(load(s, "tagger.lmdl", vocab), vocab);
  const Editor editor(tagger, load(s, "generator.lmdl", vocab), vocab, &judge);
  const NeuralInfiller neg(load(s, "infiller.0.lmdl", vocab), vocab);
  const NeuralInfiller pos(load(s, "infiller.1.lmdl", vocab), vocab);
  const std::array<const Infiller*, 2> infillers{&neg, &pos};
  const auto& items = transfer.items;
  const std::uint64_t seed = c.seed("ablation");
  std::vector<EvalReport> reports;

  {
    std::vector<TokenSeq> out(items.size());
    parallel_for(items.size(), c.workers, [&](std::size_t i) {
      InfillDecode decode = c.synthesis.infill_decode;
      decode.seed = derive_seed(seed, {0x1f, i});
      out[i] = lm_fill_baseline(items[i].source, judge, *infillers[style_index(items[i].direction.target)], decode,
                                c.synthesis.slot_cap);
    });
    reports.push_back(evaluate("lm_fill", eval_inputs(items, out), eval));
  }
  {
    const auto trained = train_seq2seq(records, vocab, s.arch(c.seq2seq), s.train_config(c.seq2seq),
                                       derive_seed(seed, {0x52}));
    const Seq2SeqTransfer s2s(trained.model, vocab, &judge);
    std::vector<TokenSeq> out(items.size());
    parallel_for(items.size(), c.workers,
                 [&](std::size_t i) { out[i] = s2s.transfer(items[i].source, items[i].direction, c.decode).output; });
    reports.push_back(evaluate("seq2seq", eval_inputs(items, out), eval));
  }
  {
    std::vector<SynthPair> unfiltered = pairs;
    for (auto& p : unfiltered) p.kept = true;
    const auto models = train_editor_models(label_pairs(unfiltered), vocab, s, derive_seed(seed, {0xef}));
    const Tagger raw_tagger(models.tagger, vocab);
    const Editor raw(raw_tagger, models.generator, vocab, &judge);
    std::vector<TokenSeq> out;
    for (auto& r : run_editor(items, raw, c.decode, c.workers)) out.push_back(std::move(r.output));
    reports.push_back(evaluate("editor_no_filter", eval_inputs(items, out), eval));
  }
  reports.push_back(evaluate("editor", eval_inputs(items, transfer.outputs), eval));
  {
    EditorDecode single = c.decode;
    single.beam = 1;
    std::vector<TokenSeq> out;
    for (auto& r : run_editor(items, editor, single, c.workers)) out.push_back(std::move(r.output));
    reports.push_back(evaluate("editor_beam1", eval_inputs(items, out), eval));
  }

  Json rows = Json::array();
  std::vector<Json> outputs;
  for (const auto& r : reports) {
    rows.push_back(summary_json(r));
    for (const auto& row : r.rows) {
      outputs.push_back(Json{{"system", r.system}, {"source", joined(row.source)}, {"output", joined(row.output)},
                             {"cls_prob", row.cls_prob}, {"config_hash", s.hash}});
    }
  }
  s.write("ablation_outputs.jsonl", jsonl(outputs));
  Json out{{"config_hash", s.hash}, {"examples", items.size()}, {"systems", rows}};
  s.write("ablation.json", out.dump(2));
}

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++n;
  }
  Json json() const {
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    const double var = n ? std::max(0.0, sq / static_cast<double>(n) - mean * mean) : 0.0;
    return Json{{"mean", mean}, {"std", std::sqrt(var)}};
  }
};

Json edit_stats(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs) {
  Moments ops, src, tmpl, out;
  for (const auto& [x, y] : pairs) {
    if (x.empty() || y.empty()) continue;
    const auto merged = merge_spans(levenshtein_script(x, y));
    const auto gold = gold_edit(x, y);
    ops.add(static_cast<double>(merged.stats.merged_op_count));
    src.add(static_cast<double>(x.size()));
    tmpl.add(static_cast<double>(gold.masked.tokens.size()));
    out.add(static_cast<double>(y.size()));
  }
  return Json{{"examples", ops.n},
              {"merged_edit_ops", ops.json()},
              {"source_tokens", src.json()},
              {"template_tokens", tmpl.json()},
              {"output_tokens", out.json()}};
}

void edit_stats_stage(Stage& s) {
  const auto transfer = read_transfer(s.require("transfer.jsonl"));
  std::vector<std::pair<TokenSeq, TokenSeq>> edits;
  for (std::size_t i = 0; i < transfer.items.size(); ++i) edits.emplace_back(transfer.items[i].source, transfer.outputs[i]);
  Json out{{"config_hash", s.hash}, {"editor", edit_stats(edits)}};
  if (fs::exists(s.path("records.jsonl"))) {
    std::vector<std::pair<TokenSeq, TokenSeq>> synth;
    for (const auto& r : read_records(s.path("records.jsonl"))) synth.emplace_back(r.source, r.target);
    out["synthesized"] = edit_stats(synth);
  }
  s.write("edit_stats.json", out.dump(2));
}

}  // namespace

std::uint64_t RunConfig::seed(const std::string& stage) const {
  const auto it = seeds.find(stage);
  if (it == seeds.end()) throw ConfigError("seeds." + stage, "missing required key");
  return it->second;
}

std::string canonical_config_json(const RunConfig& c) {
  Json j;
  Json corpora{{"train", paths_json(c.train)},
               {"valid", paths_json(c.valid)},
               {"test", paths_json(c.test)},
               {"eval_classifier", paths_json(c.eval_classifier)}};
  if (c.reference) corpora["reference"] = paths_json(*c.reference);
  j["corpora"] = corpora;
  j["styles"] = c.styles;
  j["max_len"] = c.max_len;
  j["min_count"] = c.min_count;
  j["workers"] = c.workers;
  j["models"] = Json{{"classifier", model_spec_json(c.classifier, false)},
                     {"eval_classifier", model_spec_json(c.eval_classifier_model, false)},
                     {"infiller", model_spec_json(c.infiller, true)},
                     {"tagger", model_spec_json(c.tagger, false)},
                     {"generator", model_spec_json(c.generator, true)},
                     {"seq2seq", model_spec_json(c.seq2seq, true)}};
  const auto& sy = c.synthesis;
  j["synthesis"] = Json{{"slot_cap", sy.slot_cap},
                        {"filter_floor", sy.filter_floor},
                        {"all_keep_cap", sy.all_keep_cap},
                        {"inputs_per_style", c.synthesis_inputs},
                        {"infill_decode", {{"beam", sy.infill_decode.beam},
                                           {"temperature", sy.infill_decode.temperature},
                                           {"max_fill", sy.infill_decode.max_fill}}},
                        {"noise", {{"min_spans", c.noise.min_spans},
                                   {"max_spans", c.noise.max_spans},
                                   {"mean_span", c.noise.mean_span},
                                   {"max_span", c.noise.max_span}}}};
  j["decode"] = Json{{"beam", c.decode.beam},
                     {"rerank", c.decode.rerank},
                     {"max_fill", c.decode.max_fill},
                     {"structured", c.decode.structured}};
  Json seeds;
  for (const auto& key : kSeedKeys) seeds[key] = c.seeds.count(key) ? c.seeds.at(key) : 0;
  j["seeds"] = seeds;
  return j.dump();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical_config_json(*this))); }

RunConfig parse_run_config(std::string_view json_text, const fs::path& base) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  {
    Section corpora = top.section("corpora");
    c.train = parse_paths(corpora, "train", base);
    c.valid = parse_paths(corpora, "valid", base);
    c.test = parse_paths(corpora, "test", base);
    c.eval_classifier = parse_paths(corpora, "eval_classifier", base);
    if (corpora.has("reference")) c.reference = parse_paths(corpora, "reference", base);
  }
  {
    const Json& styles = top.at("styles");
    if (!styles.is_array() || styles.size() != 2 || !styles[0].is_string() || !styles[1].is_string()) {
      throw ConfigError("styles", "expected two style names");
    }
    c.styles = {styles[0].get<std::string>(), styles[1].get<std::string>()};
  }
  top.positive("max_len", c.max_len);
  top.positive("min_count", c.min_count);
  {
    const fs::path wd = top.get<std::string>("workdir");
    c.workdir = wd.is_absolute() ? wd : base / wd;
  }
  top.positive("workers", c.workers);
  {
    Section models = top.section("models");
    c.classifier = parse_model_spec(models, "classifier", nn::Role::kClassifier, false);
    c.eval_classifier_model = parse_model_spec(models, "eval_classifier", nn::Role::kClassifier, false);
    c.infiller = parse_model_spec(models, "infiller", nn::Role::kInfiller, true);
    c.tagger = parse_model_spec(models, "tagger", nn::Role::kTagger, false);
    c.generator = parse_model_spec(models, "generator", nn::Role::kGenerator, true);
    c.seq2seq = parse_model_spec(models, "seq2seq", nn::Role::kSeq2Seq, true);
  }
  {
    Section sy = top.section("synthesis");
    sy.optional("slot_cap", c.synthesis.slot_cap);
    sy.optional("filter_floor", c.synthesis.filter_floor);
    if (c.synthesis.filter_floor < 0.0 || c.synthesis.filter_floor > 1.0) {
      throw ConfigError("synthesis.filter_floor", "must be in [0, 1]");
    }
    sy.optional("all_keep_cap", c.synthesis.all_keep_cap);
    if (c.synthesis.all_keep_cap < 0.0 || c.synthesis.all_keep_cap >= 1.0) {
      throw ConfigError("synthesis.all_keep_cap", "must be in [0, 1)");
    }
    sy.optional("inputs_per_style", c.synthesis_inputs);
    if (sy.has("infill_decode")) {
      Section d = sy.section("infill_decode");
      d.positive("beam", c.synthesis.infill_decode.beam);
      d.optional("temperature", c.synthesis.infill_decode.temperature);
      d.positive("max_fill", c.synthesis.infill_decode.max_fill);
    }
    if (sy.has("noise")) {
      Section n = sy.section("noise");
      n.positive("min_spans", c.noise.min_spans);
      n.positive("max_spans", c.noise.max_spans);
      n.positive("mean_span", c.noise.mean_span);
      n.positive("max_span", c.noise.max_span);
      if (c.noise.max_spans < c.noise.min_spans) throw ConfigError("synthesis.noise.max_spans", "below min_spans");
    }
  }
  {
    Section d = top.section("decode");
    d.positive("beam", c.decode.beam);
    d.optional("rerank", c.decode.rerank);
    d.positive("max_fill", c.decode.max_fill);
    d.optional("structured", c.decode.structured);
  }
  {
    Section seeds = top.section("seeds");
    for (const auto& key : kSeedKeys) c.seeds[key] = seeds.get<std::uint64_t>(key);
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_run_config(text, fs::absolute(path).parent_path());
}

WorkdirLock::WorkdirLock(const fs::path& workdir) : path_(workdir / ".lock") {
  fs::create_directories(workdir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw IoError("workdir is locked by another stage: " + path_.string());
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkdirLock::~WorkdirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void run_stage(const std::string& stage, RunConfig config, const StageOptions& options) {
  if (options.seed_override) {
    for (const auto& key : kSeedKeys) config.seeds[key] = derive_seed(*options.seed_override, {fnv1a64(key)});
  }
  Stage s{config, options, stage, config.hash(), config.workdir, {}};
  const WorkdirLock lock(s.dir);
  const auto start = std::chrono::steady_clock::now();
  if (stage == "train-classifier") {
    train_classifier_stage(s);
  } else if (stage == "train-infillers") {
    train_infillers_stage(s);
  } else if (stage == "synthesize") {
    synthesize_stage(s);
  } else if (stage == "train-editor") {
    train_editor_stage(s);
  } else if (stage == "transfer") {
    transfer_stage(s);
  } else if (stage == "evaluate") {
    evaluate_stage(s);
  } else if (stage == "ablate") {
    ablate_stage(s);
  } else if (stage == "edit-stats") {
    edit_stats_stage(s);
  } else {
    throw ConfigError("<stage>", "unknown stage " + stage);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json seeds;
  for (const auto& [k, v] : config.seeds) seeds[k] = v;
  Json meta{{"stage", stage},
            {"config_hash", s.hash},
            {"seeds", seeds},
            {"seed_override", options.seed_override ? Json(*options.seed_override) : Json(nullptr)},
            {"git_describe", LEWIS_GIT_DESCRIBE},
            {"wall_seconds", seconds},
            {"workers", config.workers},
            {"attention_query", "cls"},
            {"artifacts", s.artifacts}};
  write_file(s.dir / "meta" / (stage + ".json"), meta.dump(2));
}

}  // namespace lewis
