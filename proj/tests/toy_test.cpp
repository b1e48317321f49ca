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
#include <filesystem>
#include <set>
#include <sstream>

#include "lewis/corpus.hpp"
#include "lewis/toy.hpp"
#include "lewis/util.hpp"

using namespace lewis;

namespace {

std::set<std::string> words_of(const std::vector<std::string>& entries) {
  std::set<std::string> out;
  for (const auto& e : entries) {
    std::istringstream is(e);
    for (std::string w; is >> w;) out.insert(w);
  }
  return out;
}

std::vector<std::string> lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::istringstream is(read_file(path));
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("adjective lexicons are large, disjoint and aligned") {
  const auto& lex = toy::adjectives();
  CHECK(lex.negative.size() >= 40);
  CHECK(lex.negative.size() == lex.positive.size());
  const std::set<std::string> neg(lex.negative.begin(), lex.negative.end());
  const std::set<std::string> pos(lex.positive.begin(), lex.positive.end());
  CHECK(neg.size() == lex.negative.size());
  CHECK(pos.size() == lex.positive.size());
  for (const auto& w : neg) CHECK_FALSE(pos.count(w));
  CHECK(toy::phrases().negative.size() == toy::phrases().positive.size());
}

TEST_CASE("sentences are deterministic and references swap only style words") {
  const toy::ToyGenerator gen(3);
  const auto& lex = toy::adjectives();
  auto style_words = words_of(lex.negative);
  for (const auto& w : words_of(toy::phrases().negative)) style_words.insert(w);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto a = gen.sentence("train", Style::k0, i);
    const auto b = gen.sentence("train", Style::k0, i);
    REQUIRE(a.text == b.text);
    REQUIRE(a.reference == b.reference);
    REQUIRE(a.text != a.reference);
    const auto src = tokenize(a.text);
    const auto ref = tokenize(a.reference);
    bool has_style = false;
    for (const auto& w : src) has_style = has_style || style_words.count(w);
    for (const auto& w : ref) REQUIRE_FALSE(words_of(lex.negative).count(w));
    CHECK(has_style);
  }
  CHECK(gen.sentence("train", Style::k0, 1).text != gen.sentence("valid", Style::k0, 1).text);
  CHECK(toy::ToyGenerator(4).split("train", Style::k1, 50).size() == 50);
}

TEST_CASE("written corpus has the requested shape") {
  const auto dir = std::filesystem::temp_directory_path() / "lewis_toy_test";
  std::filesystem::remove_all(dir);
  toy::write_corpus(dir, 5, {20, 4, 6, 8});
  CHECK(lines(dir / "train.0.txt").size() == 20);
  CHECK(lines(dir / "valid.1.txt").size() == 4);
  CHECK(lines(dir / "evalcls.0.txt").size() == 8);
  const auto test = lines(dir / "test.1.txt");
  const auto refs = lines(dir / "test_ref.1.txt");
  REQUIRE(test.size() == 6);
  REQUIRE(refs.size() == 6);
  const toy::ToyGenerator gen(5);
  for (std::size_t i = 0; i < test.size(); ++i) {
    CHECK(test[i] == gen.sentence("test", Style::k1, i).text);
    CHECK(refs[i] == gen.sentence("test", Style::k1, i).reference);
  }
  std::filesystem::remove_all(dir);
}
