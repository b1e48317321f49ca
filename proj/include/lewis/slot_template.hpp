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

#ifndef LEWIS_SLOT_TEMPLATE_HPP_
#define LEWIS_SLOT_TEMPLATE_HPP_

#include <cstddef>
#include <string>
#include <string_view>

#include "lewis/corpus.hpp"

namespace lewis {

// A style-agnostic sentence skeleton: content tokens plus SLOT markers,
// never two SLOTs in a row.
struct Template {
  TokenSeq tokens;
  std::size_t slot_count = 0;

  // Builds a template from raw tokens, merging SLOT runs.
  static Template from_raw(const TokenSeq& raw);
  // Parses the space-joined rendering (`i SLOT at the theatre`).
  static Template parse(std::string_view text);

  std::string render() const;
  TokenSeq content() const;  // tokens without SLOTs

  friend bool operator==(const Template&, const Template&) = default;
};

bool is_slot(std::string_view token);

// True iff `content` occurs in `text` in order (not necessarily contiguous).
bool is_subsequence(const TokenSeq& content, const TokenSeq& text);

}  // namespace lewis

#endif  // LEWIS_SLOT_TEMPLATE_HPP_
