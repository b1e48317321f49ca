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
#include <set>

#include "lewis/errors.hpp"
#include "lewis/synthesis.hpp"
#include "lewis/util.hpp"

using namespace lewis;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kPositive{"great", "lovely", "friendly", "tasty"};
const std::set<std::string> kNegative{"awful", "rude", "bland", "dirty"};

// Lexicon judge: style by majority of lexicon hits; slots the lexicon words.
class LexiconJudge final : public StyleJudge {
 public:
  explicit LexiconJudge(bool accept_all = false) : accept_all_(accept_all) {}

  Classification classify(const TokenSeq& tokens) const override {
    int score = 0;
    for (const auto& t : tokens) score += kPositive.count(t) ? 1 : kNegative.count(t) ? -1 : 0;
    Classification c;
    const double p1 = score > 0 ? 0.9 : score < 0 ? 0.1 : 0.5;
    c.probs = {1.0 - p1, p1};
    c.label = p1 > 0.5 ? Style::k1 : Style::k0;
    c.probability = c.probs[style_index(c.label)];
    if (accept_all_) {
      // Undecided on everything, so every intended style is accepted.
      c.probs = {0.5, 0.5};
      c.label = Style::k0;
      c.probability = 0.5;
    }
    return c;
  }

  Template extract_template(const TokenSeq& tokens, bool) const override {
    TokenSeq raw;
    for (const auto& t : tokens) {
      raw.push_back(kPositive.count(t) || kNegative.count(t) ? std::string(special::kSlotSurface) : t);
    }
    return Template::from_raw(raw);
  }

 private:
  bool accept_all_;
};

std::vector<TokenSeq> style_corpus(Style s) {
  const std::vector<std::string> adj = s == Style::k1 ? std::vector<std::string>{"great", "lovely", "friendly", "tasty"}
                                                      : std::vector<std::string>{"awful", "rude", "bland", "dirty"};
  std::vector<TokenSeq> out;
  for (const auto& a : adj) {
    out.push_back({"the", "food", "was", a});
    out.push_back({"a", a, "waiter"});
    out.push_back({"the", a, "room", "today"});
  }
  return out;
}

std::vector<SynthSentence> inputs() {
  std::vector<SynthSentence> out;
  std::size_t line = 0;
  for (Style s : {Style::k0, Style::k1}) {
    for (const auto& t : style_corpus(s)) out.push_back({t, s, {s == Style::k0 ? "neg.txt" : "pos.txt", ++line, 0}});
  }
  out.push_back({{"nothing", "to", "change"}, Style::k0, {"neg.txt", ++line, 0}});
  return out;
}

struct Fixture {
  Fixture()
      : neg(NgramInfiller::build(style_corpus(Style::k0), 2, Style::k0)),
        pos(NgramInfiller::build(style_corpus(Style::k1), 2, Style::k1)) {}
  NgramInfiller neg;
  NgramInfiller pos;
  std::array<const Infiller*, 2> infillers() const { return {&neg, &pos}; }
};

std::string jsonl(const std::vector<SynthPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += pair_to_json(p, "h") + "\n";
  return out;
}

}  // namespace

TEST_CASE_FIXTURE(Fixture, "synthesis keeps agreeing pairs in both directions") {
  const LexiconJudge judge;
  SynthConfig cfg;
  const auto result = synthesize(inputs(), judge, infillers(), cfg, 5);
  const auto& r = result.report;
  CHECK(r.inputs == 25);
  CHECK(r.rejected_templates == 1);  // the sentence without lexicon words
  CHECK(r.generated == 24);
  CHECK(r.kept == 24);
  CHECK(r.filter_rate == 0.0);
  std::size_t forward = 0, backward = 0;
  for (const auto& p : result.pairs) {
    forward += p.direction == Direction{Style::k0, Style::k1};
    backward += p.direction == Direction{Style::k1, Style::k0};
    CHECK(is_subsequence(p.tmpl.content(), p.source));
    CHECK(is_subsequence(p.tmpl.content(), p.target));
    if (p.kept) {
      // Filter soundness: kept pairs re-classify to their intended styles.
      CHECK(judge.classify(p.source).label == p.direction.source);
      CHECK(judge.classify(p.target).label == p.direction.target);
    }
  }
  CHECK(forward == backward);
  CHECK(forward == 24);
}

TEST_CASE_FIXTURE(Fixture, "an accept-all judge filters nothing") {
  const LexiconJudge judge(true);
  const auto result = synthesize(inputs(), judge, infillers(), {}, 5);
  CHECK(result.report.filter_rate == 0.0);
}

TEST_CASE_FIXTURE(Fixture, "a strict floor filters everything") {
  const LexiconJudge judge;
  SynthConfig cfg;
  cfg.filter_floor = 0.95;
  const auto result = synthesize(inputs(), judge, infillers(), cfg, 5);
  CHECK(result.report.kept == 0);
  CHECK(result.report.filter_rate == 1.0);
  CHECK(label_pairs(result.pairs).empty());
}

TEST_CASE_FIXTURE(Fixture, "synthesis output is independent of worker count") {
  const LexiconJudge judge;
  SynthConfig one;
  SynthConfig four;
  four.workers = 4;
  const auto a = synthesize(inputs(), judge, infillers(), one, 9);
  const auto b = synthesize(inputs(), judge, infillers(), four, 9);
  CHECK(jsonl(a.pairs) == jsonl(b.pairs));
  CHECK(report_to_json(a.report, "h") == report_to_json(b.report, "h"));
}

TEST_CASE("identical fills are capped") {
  // Both infillers come from the same corpus, so every fill pair is identical.
  const auto corpus = style_corpus(Style::k1);
  const auto a = NgramInfiller::build(corpus, 2, Style::k0);
  const auto b = NgramInfiller::build(corpus, 2, Style::k1);
  const LexiconJudge judge(true);
  SynthConfig cfg;
  const auto result = synthesize(inputs(), judge, {&a, &b}, cfg, 3);
  CHECK(result.report.kept == 0);
  CHECK(result.report.all_keep_dropped == 24);
  CHECK(result.pairs.empty());
  cfg.all_keep_cap = 0.5;  // at most half of the kept output
  const auto capped = synthesize(inputs(), judge, {&a, &b}, cfg, 3);
  CHECK(capped.report.kept == 0);  // nothing else to balance against
}

TEST_CASE("infillers must be indexed by style") {
  const auto a = NgramInfiller::build(style_corpus(Style::k0), 2, Style::k0);
  const LexiconJudge judge;
  CHECK_THROWS_AS(synthesize(inputs(), judge, {&a, &a}, {}, 1), ConfigError);
}

TEST_CASE("labeling produces round-trippable records") {
  SynthPair fig;
  fig.source = {"the", "worst", "ribs", "i've", "ever", "had", "!"};
  fig.target = {"probably", "the", "best", "ribs", "ever", "!"};
  fig.direction = {Style::k0, Style::k1};
  fig.kept = true;
  SynthPair same = fig;
  same.target = same.source;
  SynthPair dropped = fig;
  dropped.kept = false;
  const auto records = label_pairs({fig, same, dropped});
  REQUIRE(records.size() == 2);
  CHECK(render_tags(records[0].tags) == "IK R K D K D K");
  CHECK(join(records[0].masked.tokens, " ") == "<MASK> the <MASK> ribs ever !");
  CHECK(reconstruct(records[0].source, records[0].tags, records[0].fills) == fig.target);
  CHECK(is_all_keep(records[1].tags));

  const auto path = fs::temp_directory_path() / "lewis_records_test.jsonl";
  write_records(path, records);
  const auto back = read_records(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].tags == records[0].tags);
  CHECK(back[0].fills == records[0].fills);
  CHECK(back[1].direction == records[1].direction);
}

TEST_CASE_FIXTURE(Fixture, "pairs round trip through JSONL") {
  const LexiconJudge judge;
  const auto result = synthesize(inputs(), judge, infillers(), {}, 5);
  const auto path = fs::temp_directory_path() / "lewis_pairs_test.jsonl";
  write_pairs(path, result.pairs, "h");
  const auto back = read_pairs(path);
  CHECK(jsonl(back) == jsonl(result.pairs));
  CHECK(read_file(path).find("\"origin\":{\"file\":") != std::string::npos);
}
