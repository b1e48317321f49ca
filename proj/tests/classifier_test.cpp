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

#include <algorithm>
#include <numeric>
#include <random>

#include "lewis/classifier.hpp"
#include "lewis/errors.hpp"
#include "lewis/slot_template.hpp"
#include "oracles.hpp"

using namespace lewis;

namespace {

TokenSeq words(std::size_t n) {
  TokenSeq out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

AttentionProfile profile_of(std::vector<double> weights) {
  AttentionProfile p;
  p.threshold = std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(weights.size());
  p.weights = std::move(weights);
  return p;
}

class FixedModelFixture {
 public:
  FixedModelFixture()
      : vocab(build_vocabulary(std::vector<TokenSeq>{{"good", "bad", "food", "is", "the"}}, 1)) {
    nn::ModelConfig c;
    c.layers = 2;
    c.heads = 2;
    c.model_dim = 16;
    c.ff_dim = 32;
    c.max_len = 20;
    c.dropout = 0.0;
    model = nn::create_model(nn::Role::kClassifier, c, vocab, 3);
  }
  Vocabulary vocab;
  nn::ModelBundle model;
};

}  // namespace

TEST_CASE("template parse, render and merge") {
  const auto t = Template::parse("i SLOT SLOT at SLOT the theatre SLOT");
  CHECK(t.render() == "i SLOT at SLOT the theatre SLOT");
  CHECK(t.slot_count == 3);
  CHECK(t.content() == TokenSeq{"i", "at", "the", "theatre"});
  CHECK(Template::from_raw(t.tokens) == t);
  CHECK(is_subsequence({"a", "c"}, {"a", "b", "c"}));
  CHECK_FALSE(is_subsequence({"c", "a"}, {"a", "b", "c"}));
}

TEST_CASE("running example template") {
  const TokenSeq s{"i", "had", "a", "great", "time", "at", "the", "theatre"};
  // had, a, great, time above the mean.
  const auto p = profile_of({0.05, 0.2, 0.15, 0.3, 0.2, 0.03, 0.04, 0.03});
  CHECK(template_from_profile(s, p, false).render() == "i SLOT at the theatre");
}

TEST_CASE("uniform profile slots everything into one slot") {
  const auto s = words(7);
  const auto t = template_from_profile(s, profile_of(std::vector<double>(7, 1.0 / 7.0)), false);
  CHECK(t.render() == "SLOT");
  CHECK(t.slot_count == 1);
}

TEST_CASE("cap keeps the top tokens") {
  // N=12, seven tokens above the mean -> exactly four slotted.
  std::vector<double> w{9, 1, 8, 1, 7, 1, 6, 1, 5, 1, 4, 4};
  const auto p = profile_of(w);
  const auto all = slotted_positions(p, false);
  CHECK(all.size() == 7);
  const auto capped = slotted_positions(p, true);
  CHECK(capped == std::vector<std::size_t>{0, 2, 4, 6});
  CHECK(slot_cap_limit(12) == 4);
  CHECK(slot_cap_limit(30) == 6);
  CHECK(slot_cap_limit(2) == 0);
}

TEST_CASE("template invariants over randomized profiles") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 30);
  std::uniform_int_distribution<int> coin(0, 3);
  std::size_t boundary_hits = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = len(rng);
    const auto toks = words(n);
    std::vector<long> iw(n);
    const int mode = coin(rng);
    std::uniform_int_distribution<long> small(0, mode == 0 ? 1 : 3);
    std::uniform_int_distribution<long> wide(0, 1000);
    for (auto& x : iw) x = mode == 3 ? wide(rng) : small(rng);
    if (mode == 2) std::fill(iw.begin(), iw.end(), 5);  // a_i equal to the mean everywhere
    std::vector<double> w(iw.begin(), iw.end());
    const auto p = profile_of(w);
    REQUIRE(p.threshold == doctest::Approx(std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n)).epsilon(1e-9));
    for (bool cap : {false, true}) {
      const auto got = slotted_positions(p, cap);
      REQUIRE(got == oracle::slots(iw, cap));
      if (cap) REQUIRE(got.size() <= std::min<std::size_t>(n / 3, 6));
      for (std::size_t i : got) boundary_hits += static_cast<double>(iw[i]) == p.threshold;
      const auto t = template_from_profile(toks, p, cap);
      for (std::size_t i = 1; i < t.tokens.size(); ++i) {
        REQUIRE_FALSE((is_slot(t.tokens[i]) && is_slot(t.tokens[i - 1])));
      }
      REQUIRE(Template::from_raw(t.tokens) == t);
      REQUIRE(is_subsequence(t.content(), toks));
      REQUIRE(t.content().size() == n - got.size());
      if (!cap && got.size() == n) REQUIRE(t.render() == "SLOT");
    }
  }
  CHECK(boundary_hits > 1000);
}

TEST_CASE("pooling takes the max over heads and skips specials") {
  nn::Matrix<float> h1(3, 3), h2(3, 3);
  h1 << 0.2f, 0.5f, 0.3f, 1, 0, 0, 1, 0, 0;
  h2 << 0.6f, 0.1f, 0.3f, 1, 0, 0, 1, 0, 0;
  const std::vector<nn::Matrix<float>> heads{h1, h2};
  const auto p = pool_attention(heads, 0, {true, false, false});
  REQUIRE(p.weights.size() == 2);
  CHECK(p.weights[0] == doctest::Approx(0.5));
  CHECK(p.weights[1] == doctest::Approx(0.3));
  CHECK(p.threshold == doctest::Approx(0.4));
}

TEST_CASE_FIXTURE(FixedModelFixture, "classifier outputs are well formed") {
  const StyleClassifier clf(model, vocab);
  for (const TokenSeq& s : {TokenSeq{"good", "food"}, TokenSeq{"zzz", "qqq"}, TokenSeq{"the"}}) {
    const auto c = clf.classify(s);
    CHECK(c.probs[0] + c.probs[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c.probability >= 0.5);
    const auto p = clf.attention_profile(s);
    CHECK(p.weights.size() == s.size());
    const auto t = clf.extract_template(s, false);
    CHECK(t.slot_count >= 1);
  }
  TokenSeq longer(25, "good");
  CHECK_THROWS_AS(clf.classify(longer), LengthError);
  const auto other = build_vocabulary(std::vector<TokenSeq>{{"x"}}, 1);
  CHECK_THROWS_AS(StyleClassifier(model, other), VocabMismatch);
}

TEST_CASE_FIXTURE(FixedModelFixture, "classifier training needs both styles") {
  nn::TrainConfig tc;
  tc.steps = 2;
  std::vector<LabeledSentence> one_style{{{"good"}, Style::k1}, {{"food"}, Style::k1}};
  CHECK_THROWS_AS(train_classifier(one_style, {}, vocab, model.config, tc, 1), DegenerateData);
}

TEST_CASE_FIXTURE(FixedModelFixture, "classifier learns a separable toy set deterministically") {
  std::vector<LabeledSentence> data;
  for (int i = 0; i < 10; ++i) {
    data.push_back({{"the", "food", "is", "good"}, Style::k1});
    data.push_back({{"the", "food", "is", "bad"}, Style::k0});
    data.push_back({{"good", "food"}, Style::k1});
    data.push_back({{"bad", "food"}, Style::k0});
  }
  nn::TrainConfig tc;
  tc.steps = 120;
  tc.batch_size = 8;
  tc.lr = 3e-3;
  tc.warmup = 10;
  const auto a = train_classifier(data, data, vocab, model.config, tc, 9);
  const auto b = train_classifier(data, data, vocab, model.config, tc, 9);
  CHECK(a.heldout_accuracy == 1.0);
  CHECK(a.heldout_accuracy == b.heldout_accuracy);
  CHECK(a.loss_curve == b.loss_curve);
}
