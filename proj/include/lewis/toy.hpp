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

#ifndef LEWIS_TOY_HPP_
#define LEWIS_TOY_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lewis/corpus.hpp"

// Synthetic two-style review corpus: shared scaffolds filled with either a
// negative (style 0) or a positive (style 1) lexicon. The lexicons are
// index-aligned, so every sentence has an exact opposite-style reference.
namespace lewis::toy {

struct Lexicon {
  std::vector<std::string> negative;
  std::vector<std::string> positive;
};

// Single-word sentiment adjectives.
const Lexicon& adjectives();
// Multi-word sentiment phrases of unequal lengths.
const Lexicon& phrases();

struct ToySentence {
  std::string text;       // in the sentence's own style
  std::string reference;  // same scaffold, opposite style
  Style style = Style::k0;
};

struct ToySizes {
  std::size_t train = 5000;  // per style
  std::size_t valid = 500;
  std::size_t test = 300;
  std::size_t evalcls = 1000;
};

class ToyGenerator {
 public:
  explicit ToyGenerator(std::uint64_t seed) : seed_(seed) {}
  // Deterministic in (seed, split, style, index).
  ToySentence sentence(const std::string& split, Style style, std::size_t index) const;
  std::vector<ToySentence> split(const std::string& name, Style style, std::size_t count) const;

 private:
  std::uint64_t seed_;
};

// Writes <split>.<style>.txt for train/valid/test/evalcls, and
// test_ref.<style>.txt holding opposite-style references of test.<style>.
void write_corpus(const std::filesystem::path& dir, std::uint64_t seed, const ToySizes& sizes);

}  // namespace lewis::toy

#endif  // LEWIS_TOY_HPP_
