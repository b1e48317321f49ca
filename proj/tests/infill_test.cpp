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

#include <filesystem>
#include <random>

#include "lewis/errors.hpp"
#include "lewis/infill.hpp"
#include "lewis/util.hpp"

using namespace lewis;

namespace {

const std::vector<TokenSeq> kSentences{
    {"the", "soup", "was", "warm", "and", "tasty"},
    {"our", "waiter", "smiled", "at", "us"},
    {"i", "loved", "the", "quiet", "patio"},
    {"fresh", "bread", "came", "out", "fast"},
    {"the", "staff", "remembered", "my", "name"},
    {"great", "coffee", "in", "the", "morning"},
    {"they", "fixed", "my", "order", "quickly"},
    {"a", "lovely", "spot", "for", "lunch"},
};

nn::ModelConfig small_config() {
  nn::ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.model_dim = 48;
  c.ff_dim = 96;
  c.decoder_layers = 2;
  c.max_len = 32;
  c.dropout = 0.0;
  return c;
}

bool embeds_in_order(const Template& t, const TokenSeq& out) { return is_subsequence(t.content(), out); }

bool has_placeholder(const TokenSeq& out) {
  for (const auto& tok : out) {
    if (is_slot(tok) || tok == special::kMaskSurface) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("noising is deterministic and always leaves a slot") {
  NoiseConfig noise;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto& s = kSentences[seed % kSentences.size()];
    Rng a(seed), b(seed);
    const auto ta = noise_sentence(s, noise, a);
    const auto tb = noise_sentence(s, noise, b);
    REQUIRE(ta == tb);
    REQUIRE(ta.slot_count >= 1);
    REQUIRE(ta.slot_count <= 3);
    REQUIRE(is_subsequence(ta.content(), s));
    REQUIRE(s.size() - ta.content().size() <= 12);
  }
  Rng rng(1);
  CHECK(noise_sentence({"solo"}, noise, rng).render() == "SLOT");
}

TEST_CASE("n-gram oracle fills by greedy completion") {
  const auto ngram = NgramInfiller::build({{"a", "b", "c"}}, 2, Style::k0);
  InfillDecode decode;
  CHECK(ngram.fill(Template::parse("a SLOT c"), decode) == TokenSeq{"a", "b", "c"});
  CHECK(ngram.fill(Template::parse("a c"), decode) == TokenSeq{"a", "c"});
  CHECK(ngram.kind() == InfillerKind::kNgram);
}

TEST_CASE("n-gram backs off to the unigram argmax") {
  const auto ngram = NgramInfiller::build({{"x", "y", "y", "z"}, {"y", "q"}}, 2, Style::k1);
  InfillDecode decode;
  decode.max_fill = 1;
  // "unseen" never occurs, so the fill is the most frequent unigram.
  CHECK(ngram.fill(Template::parse("unseen SLOT"), decode) == TokenSeq{"unseen", "y"});
  CHECK(ngram.score({"<BOS>", "unseen"}, "y") == doctest::Approx(NgramInfiller::kBackoff * 3.0 / 8.0));
}

TEST_CASE("n-gram models are reproducible and round trip") {
  const auto a = NgramInfiller::build(kSentences, 3, Style::k0);
  const auto b = NgramInfiller::build(kSentences, 3, Style::k0);
  CHECK(a == b);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.serialize().rfind("LEWIS-NGRAM v1\n", 0) == 0);
  const auto path = std::filesystem::temp_directory_path() / "lewis_ngram_test.txt";
  a.save(path);
  const auto back = NgramInfiller::load(path);
  CHECK(back == a);
  InfillDecode decode;
  const auto t = Template::parse("the SLOT was SLOT");
  CHECK(back.fill(t, decode) == a.fill(t, decode));
  CHECK_THROWS_AS(NgramInfiller::parse("LEWIS-NGRAM v2\n"), FormatError);
}

TEST_CASE("fill requests are validated") {
  const auto ngram = NgramInfiller::build(kSentences, 2, Style::k0);
  InfillRequest req{Template::parse("the SLOT"), Style::k1, {}};
  CHECK_THROWS_AS(fill_template(ngram, req), ConfigError);
  req.style = Style::k0;
  req.decode.max_fill = 0;
  CHECK_THROWS_AS(fill_template(ngram, req), ConfigError);
  req.decode.max_fill = 3;
  const auto out = fill_template(ngram, req);
  CHECK(embeds_in_order(req.tmpl, out));
  CHECK(out.size() >= 2);
  CHECK(out.size() <= 4);
}

TEST_CASE("infiller training needs enough sentences") {
  const auto vocab = build_vocabulary(kSentences, 1);
  nn::TrainConfig tc;
  tc.steps = 1;
  CHECK_THROWS_AS(train_infiller(kSentences, Style::k0, vocab, small_config(), tc, {}, 1), DegenerateData);
}

TEST_CASE("constrained decoding preserves the scaffold even untrained") {
  const auto vocab = build_vocabulary(kSentences, 1);
  auto model = nn::create_model(nn::Role::kInfiller, small_config(), vocab, 4, Style::k1);
  const NeuralInfiller infiller(model, vocab);
  std::mt19937 rng(3);
  NoiseConfig noise;
  for (int trial = 0; trial < 60; ++trial) {
    const auto& s = kSentences[static_cast<std::size_t>(trial) % kSentences.size()];
    Rng nrng(static_cast<std::uint64_t>(trial));
    Template t = noise_sentence(s, noise, nrng);
    if (trial % 5 == 0) t.tokens.insert(t.tokens.begin(), "neverseen");  // OOV content survives
    InfillDecode decode;
    decode.seed = static_cast<std::uint64_t>(trial);
    decode.beam = trial % 3 == 0 ? 3 : 1;
    decode.temperature = trial % 2 == 0 ? 1.0 : 0.0;
    decode.max_fill = 1 + static_cast<std::size_t>(trial % 4);
    const auto out = infiller.fill(t, decode);
    REQUIRE(embeds_in_order(t, out));
    REQUIRE_FALSE(has_placeholder(out));
    REQUIRE(out.size() >= t.content().size() + t.slot_count);
    REQUIRE(out.size() <= t.content().size() + t.slot_count * decode.max_fill);
    REQUIRE(infiller.fill(t, decode) == out);
  }
  CHECK(infiller.fill(Template::parse("the soup"), InfillDecode{}) == TokenSeq{"the", "soup"});
  TokenSeq too_long(40, "the");
  too_long.push_back("SLOT");
  CHECK_THROWS(infiller.fill(Template::from_raw(too_long), InfillDecode{}));
}

TEST_CASE("infiller memorizes a small corpus") {
  std::vector<TokenSeq> corpus = kSentences;
  corpus.insert(corpus.end(), kSentences.begin(), kSentences.end());  // 16 lines, 8 distinct
  const auto vocab = build_vocabulary(corpus, 1);
  nn::TrainConfig tc;
  tc.steps = 500;
  tc.batch_size = 16;
  tc.lr = 2e-3;
  tc.warmup = 50;
  const auto trained = train_infiller(corpus, Style::k0, vocab, small_config(), tc, {}, 11);
  const NeuralInfiller infiller(trained.model, vocab);
  InfillDecode greedy;
  greedy.temperature = 0.0;
  int exact = 0;
  for (std::size_t i = 0; i < kSentences.size(); ++i) {
    Rng rng(100 + i);
    const auto t = noise_sentence(kSentences[i], {}, rng);
    const auto out = infiller.fill(t, greedy);
    MESSAGE(t.render(), " -> ", join(out, " "));
    exact += out == kSentences[i];
  }
  MESSAGE("exact reconstructions: ", exact, "/8, final loss ", trained.loss_curve.back());
  CHECK(exact >= 7);
}
