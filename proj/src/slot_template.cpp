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

#include "lewis/slot_template.hpp"

#include <sstream>

namespace lewis {

bool is_slot(std::string_view token) { return token == special::kSlotSurface; }

Template Template::from_raw(const TokenSeq& raw) {
  Template t;
  for (const auto& tok : raw) {
    if (is_slot(tok)) {
      if (!t.tokens.empty() && is_slot(t.tokens.back())) continue;
      ++t.slot_count;
    }
    t.tokens.push_back(tok);
  }
  return t;
}

Template Template::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  TokenSeq raw;
  std::string tok;
  while (in >> tok) raw.push_back(tok);
  return from_raw(raw);
}

std::string Template::render() const { return detokenize(tokens); }

TokenSeq Template::content() const {
  TokenSeq out;
  for (const auto& t : tokens) {
    if (!is_slot(t)) out.push_back(t);
  }
  return out;
}

bool is_subsequence(const TokenSeq& content, const TokenSeq& text) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < text.size() && j < content.size(); ++i) {
    if (text[i] == content[j]) ++j;
  }
  return j == content.size();
}

}  // namespace lewis
