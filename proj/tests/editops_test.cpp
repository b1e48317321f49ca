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

#include <random>

#include "lewis/corpus.hpp"
#include "lewis/editops.hpp"
#include "lewis/errors.hpp"
#include "lewis/util.hpp"
#include "oracles.hpp"

using namespace lewis;

namespace {

const TokenSeq kFigSrc{"the", "worst", "ribs", "i've", "ever", "had", "!"};
const TokenSeq kFigTgt{"probably", "the", "best", "ribs", "ever", "!"};

using oracle::all_sequences;
using oracle::bfs_distances;

TokenSeq random_seq(std::mt19937& rng, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> sym(0, alphabet - 1);
  TokenSeq out(len(rng));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + sym(rng)));
  return out;
}

std::string joined(const TokenSeq& t) { return join(t, " "); }

}  // namespace

TEST_CASE("figure script, tags and skeleton") {
  const auto script = levenshtein_script(kFigSrc, kFigTgt);
  CHECK(script.cost == 4);
  CHECK(render_script(kFigSrc, script) ==
        "I[probably] K[the] R[worst\xE2\x86\x92" "best] K[ribs] D[i've] K[ever] D[had] K[!]");
  const auto tags = to_dual_tags(script);
  CHECK(tags.insert_before == std::vector<bool>{true, false, false, false, false, false, false, false});
  using C = CoarseOp;
  CHECK(tags.ops == std::vector<CoarseOp>{C::kKeep, C::kReplace, C::kKeep, C::kDelete, C::kKeep,
                                          C::kDelete, C::kKeep, C::kKeep});
  const auto masked = apply_coarse(kFigSrc, tags);
  CHECK(joined(masked.tokens) == "<MASK> the <MASK> ribs ever !");
  CHECK(masked.slot_count == 2);
  CHECK(gold_fills(script) == std::vector<TokenSeq>{{"probably"}, {"best"}});
  CHECK(reconstruct(kFigSrc, tags, {{"probably"}, {"best"}}) == kFigTgt);
  CHECK(merge_spans(script).stats.merged_op_count == 4);
}

TEST_CASE("identity and trailing insertion") {
  const TokenSeq s{"a", "b"};
  const auto id = levenshtein_script(s, s);
  CHECK(id.cost == 0);
  const auto tags = to_dual_tags(id);
  CHECK(tags.ops.size() == 3);
  for (bool b : tags.insert_before) CHECK_FALSE(b);
  for (auto op : tags.ops) CHECK(op == CoarseOp::kKeep);
  CHECK(apply_coarse(s, tags).tokens == s);
  CHECK(merge_spans(id).stats.merged_op_count == 0);

  const auto app = to_dual_tags(levenshtein_script({"a"}, {"a", "b"}));
  CHECK(app.insert_before == std::vector<bool>{false, true});
  CHECK_THROWS_AS(levenshtein_script({}, {"a"}), EmptyInput);
}

TEST_CASE("replace run merges into one mask") {
  const TokenSeq src{"a", "b", "c"};
  DualTags tags{{false, false, false, false}, {CoarseOp::kReplace, CoarseOp::kReplace, CoarseOp::kKeep, CoarseOp::kKeep}};
  const auto masked = apply_coarse(src, tags);
  CHECK(joined(masked.tokens) == "<MASK> c");
  CHECK(masked.slot_count == 1);
  const auto gold = gold_edit(src, {"x", "y", "c"});
  CHECK(gold.tags == tags);
  CHECK(gold.fills == std::vector<TokenSeq>{{"x", "y"}});
  CHECK_THROWS_AS(apply_coarse(src, DualTags{{false}, {CoarseOp::kKeep}}), TagMismatch);
  CHECK_THROWS_AS(reconstruct(src, tags, {}), FillMismatch);
}

TEST_CASE("zero slots reconstruct to the source with deletions applied") {
  const TokenSeq src{"a", "b", "c"};
  DualTags tags{{false, false, false, false}, {CoarseOp::kKeep, CoarseOp::kDelete, CoarseOp::kKeep, CoarseOp::kKeep}};
  CHECK(apply_coarse(src, tags).slot_count == 0);
  CHECK(reconstruct(src, tags, {}) == TokenSeq{"a", "c"});
}

TEST_CASE("merge spans counts non-keep runs") {
  const TokenSeq src{"a", "b", "c", "d", "e"};
  const auto script = levenshtein_script(src, {"c", "x", "y"});
  const auto merged = merge_spans(script);
  CHECK(merged.stats.merged_op_count == 2);
  CHECK(merge_spans(merged.script).script == merged.script);
}

TEST_CASE("exhaustive oracle equivalence on short sequences") {
  const auto seqs = all_sequences(4, false);
  REQUIRE(seqs.size() == 120);
  std::size_t pairs = 0;
  for (const auto& src : seqs) {
    const auto dist = bfs_distances(src);
    for (const auto& tgt : seqs) {
      const auto script = levenshtein_script(src, tgt);
      REQUIRE(static_cast<int>(script.cost) == dist.at(tgt));
      REQUIRE(levenshtein_distance(src, tgt) == script.cost);
      REQUIRE(apply_script(src, script) == tgt);
      const auto gold = gold_edit(src, tgt);
      REQUIRE(reconstruct(src, gold.tags, gold.fills) == tgt);
      REQUIRE((script.cost == 0) == (src == tgt));
      ++pairs;
    }
  }
  CHECK(pairs == 14400);
}

TEST_CASE("random pairs round trip through tags and fills") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto src = random_seq(rng, 12, 5);
    const auto tgt = random_seq(rng, 12, 5);
    const auto script = levenshtein_script(src, tgt);
    const auto tags = to_dual_tags(script);
    REQUIRE(tags.ops.size() == src.size() + 1);
    REQUIRE(tags.ops.back() == CoarseOp::kKeep);
    const auto masked = apply_coarse(src, tags);
    for (std::size_t i = 1; i < masked.tokens.size(); ++i) {
      REQUIRE_FALSE((masked.tokens[i] == "<MASK>" && masked.tokens[i - 1] == "<MASK>"));
    }
    const auto fills = gold_fills(script);
    REQUIRE(fills.size() == masked.slot_count);
    REQUIRE(reconstruct(src, tags, fills) == tgt);
    // Tag/script bijection up to fills.
    REQUIRE(to_dual_tags(from_dual_tags(tags)) == tags);
    const auto merged = merge_spans(script);
    REQUIRE(merge_spans(merged.script).script == merged.script);
    REQUIRE(merged.stats.merged_op_count <= script.cost);
  }
}

TEST_CASE("malformed scripts are rejected") {
  EditScript gap{{{EditKind::kKeep, 0, 1, {}}, {EditKind::kKeep, 2, 3, {}}}, 0};
  CHECK_THROWS_AS(to_dual_tags(gap), InvalidScript);
}
