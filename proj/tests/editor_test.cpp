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

#include "lewis/editor.hpp"
#include "lewis/errors.hpp"
#include "lewis/util.hpp"

using namespace lewis;

namespace {

const TokenSeq kFigSrc{"the", "worst", "ribs", "i've", "ever", "had", "!"};
const TokenSeq kFigTgt{"probably", "the", "best", "ribs", "ever", "!"};

const std::vector<std::pair<std::string, std::string>> kPairs{
    {"the food was awful", "the food was great"},
    {"the staff was rude to us", "the staff was friendly to us"},
    {"a dirty table and cold soup", "a clean table and hot soup"},
    {"i will never come back", "i will definitely come back"},
    {"the room smelled bad", "the room smelled lovely"},
    {"terrible service today", "excellent service today"},
    {"the bread was stale and dry", "the bread was fresh"},
    {"worst pizza in town", "best pizza in town"},
};

std::vector<EditRecord> make_records() {
  std::vector<SynthPair> pairs;
  for (const auto& [neg, pos] : kPairs) {
    SynthPair p;
    p.kept = true;
    p.source = tokenize(neg);
    p.target = tokenize(pos);
    p.direction = {Style::k0, Style::k1};
    pairs.push_back(p);
    std::swap(p.source, p.target);
    p.direction = {Style::k1, Style::k0};
    pairs.push_back(p);
  }
  return label_pairs(pairs);
}

Vocabulary records_vocab(const std::vector<EditRecord>& records) {
  std::vector<TokenSeq> text{kFigSrc, kFigTgt};
  for (const auto& r : records) {
    text.push_back(r.source);
    text.push_back(r.target);
  }
  return build_vocabulary(text, 1);
}

nn::ModelConfig small_config() {
  nn::ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.model_dim = 48;
  c.ff_dim = 96;
  c.decoder_layers = 2;
  c.max_len = 40;
  c.dropout = 0.0;
  return c;
}

nn::TrainConfig quick(std::size_t steps, double lr) {
  nn::TrainConfig tc;
  tc.steps = steps;
  tc.batch_size = 16;
  tc.lr = lr;
  tc.warmup = steps / 10;
  return tc;
}

// Prefers outputs containing "best".
class BestJudge final : public StyleJudge {
 public:
  Classification classify(const TokenSeq& tokens) const override {
    const bool hit = std::find(tokens.begin(), tokens.end(), "best") != tokens.end();
    Classification c;
    c.probs = hit ? std::array<double, 2>{0.1, 0.9} : std::array<double, 2>{0.6, 0.4};
    c.label = hit ? Style::k1 : Style::k0;
    c.probability = std::max(c.probs[0], c.probs[1]);
    return c;
  }
  Template extract_template(const TokenSeq& tokens, bool) const override { return Template::from_raw(tokens); }
};

}  // namespace

TEST_CASE("training examples follow the input layout") {
  const auto records = make_records();
  const auto vocab = records_vocab(records);
  const EditRecord& r = records.front();  // "the food was awful" -> "... great"
  const auto tagger = tagger_example(r, vocab);
  CHECK(tagger.source.front() == special::kStyle1);
  CHECK(tagger.source.back() == special::kEos);
  CHECK(tagger.source.size() == r.source.size() + 2);
  CHECK(tagger.labels.front() == -1);
  CHECK(tagger.labels2.front() == -1);
  CHECK(tagger.labels2.back() == -1);
  CHECK(tagger.labels2[4] == static_cast<int>(CoarseOp::kReplace));

  const auto gen = generator_example(r, vocab);
  CHECK(gen.source.front() == special::kStyle1);
  CHECK(std::count(gen.source.begin(), gen.source.end(), special::kSep) == 1);
  CHECK(std::count(gen.source.begin(), gen.source.end(), special::kMask) == 1);
  CHECK(gen.target == std::vector<TokenId>{vocab.id("great")});

  EditRecord same = r;
  same.target = same.source;
  const auto gold = gold_edit(same.source, same.target);
  same.tags = gold.tags;
  same.masked = gold.masked;
  same.fills = gold.fills;
  CHECK(generator_example(same, vocab).target.empty());  // decoder target is EOS only
}

TEST_CASE("degenerate editor data is rejected") {
  auto records = make_records();
  const auto vocab = records_vocab(records);
  std::vector<EditRecord> keep_only;
  for (auto r : records) {
    const auto gold = gold_edit(r.source, r.source);
    r.target = r.source;
    r.tags = gold.tags;
    r.masked = gold.masked;
    r.fills = gold.fills;
    keep_only.push_back(r);
  }
  CHECK_THROWS_AS(train_tagger(keep_only, {}, vocab, small_config(), quick(1, 1e-3), 1), DegenerateData);
  CHECK_THROWS_AS(train_generator(keep_only, vocab, small_config(), quick(1, 1e-3), 1), DegenerateData);
  CHECK_THROWS_AS(train_seq2seq({}, vocab, small_config(), quick(1, 1e-3), 1), DegenerateData);
}

TEST_CASE("untrained tagger output is structurally valid and deterministic") {
  const auto records = make_records();
  const auto vocab = records_vocab(records);
  const Tagger tagger(nn::create_model(nn::Role::kTagger, small_config(), vocab, 2), vocab);
  for (const auto& r : records) {
    const auto out = tagger.tag(r.source, r.direction);
    CHECK(out.tags.ops.size() == r.source.size() + 1);
    CHECK(out.tags.insert_before.size() == r.source.size() + 1);
    CHECK(out.tags.ops.back() == CoarseOp::kKeep);
    for (double p : out.insert_probs) CHECK((p >= 0.0 && p <= 1.0));
    CHECK(tagger.tag(r.source, r.direction).tags == out.tags);
  }
  CHECK_THROWS_AS(tagger.tag(TokenSeq(40, "the"), {Style::k0, Style::k1}), LengthError);
}

TEST_CASE("tagger memorizes sixteen records") {
  const auto records = make_records();
  REQUIRE(records.size() == 16);
  const auto vocab = records_vocab(records);
  const auto a = train_tagger(records, {}, vocab, small_config(), quick(1000, 1e-3), 3);
  MESSAGE("tag accuracy insert ", a.heldout.insert, " op ", a.heldout.op, " joint ", a.heldout.joint);
  CHECK(a.heldout.joint >= 0.95);
  const auto b = train_tagger(records, {}, vocab, small_config(), quick(30, 1e-3), 3);
  const auto c = train_tagger(records, {}, vocab, small_config(), quick(30, 1e-3), 3);
  CHECK(b.heldout.joint == c.heldout.joint);
  CHECK(b.loss_curve == c.loss_curve);
}

TEST_CASE("generator memorizes the running example and the editor transfers it") {
  SynthPair p;
  p.kept = true;
  p.source = kFigSrc;
  p.target = kFigTgt;
  p.direction = {Style::k0, Style::k1};
  const auto records = label_pairs({p});
  const auto vocab = records_vocab(records);
  const auto gen = train_generator(records, vocab, small_config(), quick(150, 2e-3), 4);
  const auto tag = train_tagger(records, {}, vocab, small_config(), quick(150, 2e-3), 4);
  const Tagger tagger(tag.model, vocab);
  CHECK(tagger.tag(kFigSrc, p.direction).tags == records[0].tags);

  EditorDecode decode;
  decode.rerank = false;
  const Editor editor(tagger, gen.model, vocab, nullptr);
  const auto result = editor.transfer(kFigSrc, p.direction, decode);
  CHECK_FALSE(result.fallback);
  CHECK(result.output == kFigTgt);
  // Every surviving candidate is a reconstruction with kept tokens intact.
  for (const auto& c : result.candidates) CHECK(is_subsequence({"the", "ribs", "ever", "!"}, c.text));

  const auto again = train_generator(records, vocab, small_config(), quick(20, 2e-3), 4);
  const auto twice = train_generator(records, vocab, small_config(), quick(20, 2e-3), 4);
  CHECK(again.loss_curve.back() == twice.loss_curve.back());
}

TEST_CASE("reranking picks the most target-like candidate") {
  CHECK(rerank_choice({{{"a"}, -1.0, 0.2}, {{"b"}, -2.0, 0.9}, {{"c"}, -3.0, 0.5}}) == 1);
  CHECK(rerank_choice({{{"a"}, -1.0, 0.7}, {{"b"}, -0.5, 0.7}}) == 1);
  CHECK(rerank_choice({{{"a"}, -1.0, 0.7}, {{"b"}, -2.0, 0.7}}) == 0);

  SynthPair p;
  p.kept = true;
  p.source = kFigSrc;
  p.target = kFigTgt;
  p.direction = {Style::k0, Style::k1};
  const auto records = label_pairs({p});
  const auto vocab = records_vocab(records);
  const Tagger tagger(nn::create_model(nn::Role::kTagger, small_config(), vocab, 1), vocab);
  const Editor editor(tagger, nn::create_model(nn::Role::kGenerator, small_config(), vocab, 1), vocab,
                      nullptr);
  EditorDecode decode;
  CHECK_THROWS_AS(editor.fill(kFigSrc, p.direction, records[0].tags, decode), ConfigError);

  const BestJudge judge;
  const Editor judged(tagger, nn::create_model(nn::Role::kGenerator, small_config(), vocab, 1), vocab, &judge);
  const auto result = judged.fill(kFigSrc, p.direction, records[0].tags, decode);
  REQUIRE_FALSE(result.fallback);
  for (const auto& c : result.candidates) CHECK(result.candidates[result.chosen].cls_prob >= c.cls_prob);
}

TEST_CASE("all-KEEP tags give the identity and malformed output falls back") {
  const auto records = make_records();
  const auto vocab = records_vocab(records);
  const Tagger tagger(nn::create_model(nn::Role::kTagger, small_config(), vocab, 1), vocab);
  auto gen_model = nn::create_model(nn::Role::kGenerator, small_config(), vocab, 1);
  const TokenSeq x{"the", "food", "was", "awful"};
  DualTags keep{std::vector<bool>(5, false), std::vector<CoarseOp>(5, CoarseOp::kKeep)};
  EditorDecode decode;
  decode.rerank = false;
  {
    const Editor editor(tagger, gen_model, vocab, nullptr);
    const auto same = editor.fill(x, {Style::k0, Style::k1}, keep, decode);
    CHECK(same.output == x);
    CHECK_FALSE(same.fallback);
  }
  // Make EOS dominate so an unconstrained beam ends before any fill.
  gen_model.params.values[gen_model.layout.head_b](0, special::kEos) = 1e4f;
  const Editor editor(tagger, gen_model, vocab, nullptr);
  DualTags tags = keep;
  tags.ops[3] = CoarseOp::kReplace;
  tags.ops[1] = CoarseOp::kDelete;
  decode.structured = false;
  decode.beam = 1;
  const auto fb = editor.fill(x, {Style::k0, Style::k1}, tags, decode);
  CHECK(fb.fallback);
  CHECK(fb.candidates.empty());
  CHECK(fb.output == TokenSeq{"the", "was", "awful"});
  decode.structured = true;  // the grammar forbids the early EOS
  CHECK_FALSE(editor.fill(x, {Style::k0, Style::k1}, tags, decode).fallback);
}

TEST_CASE("seq2seq baseline memorizes pairs") {
  const auto records = make_records();
  const auto vocab = records_vocab(records);
  const auto trained = train_seq2seq(records, vocab, small_config(), quick(600, 2e-3), 6);
  const Seq2SeqTransfer s2s(trained.model, vocab, nullptr);
  EditorDecode decode;
  decode.rerank = false;
  int exact = 0;
  for (const auto& r : records) exact += s2s.transfer(r.source, r.direction, decode).output == r.target;
  MESSAGE("seq2seq exact ", exact, "/16");
  CHECK(exact >= 14);
}

TEST_CASE("seq2seq baseline learns to copy") {
  const std::vector<std::string> words{"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
                                       "india", "juliet", "kilo", "lima"};
  Rng rng(17);
  std::vector<EditRecord> train, test;
  for (int i = 0; i < 400; ++i) {
    TokenSeq s;
    const std::size_t len = 3 + rng.index(4);
    for (std::size_t k = 0; k < len; ++k) s.push_back(words[rng.index(words.size())]);
    EditRecord r;
    r.source = s;
    r.target = s;
    r.direction = {Style::k0, Style::k1};
    (i < 360 ? train : test).push_back(r);
  }
  const auto vocab = build_vocabulary(std::vector<TokenSeq>{words}, 1);
  const auto trained = train_seq2seq(train, vocab, small_config(), quick(1500, 2e-3), 8);
  const Seq2SeqTransfer s2s(trained.model, vocab, nullptr);
  EditorDecode decode;
  decode.rerank = false;
  decode.beam = 1;
  int exact = 0;
  for (const auto& r : test) exact += s2s.transfer(r.source, r.direction, decode).output == r.target;
  MESSAGE("held-out copies ", exact, "/", test.size());
  CHECK(exact >= 36);
}

TEST_CASE("lm fill baseline keeps slot-free input") {
  const auto ngram = NgramInfiller::build({{"a", "b", "c"}}, 2, Style::k1);
  const BestJudge judge;  // templates without slots
  const TokenSeq x{"x", "y"};
  CHECK(lm_fill_baseline(x, judge, ngram, {}, true) == x);
}
