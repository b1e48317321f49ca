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

#ifndef LEWIS_CORPUS_HPP_
#define LEWIS_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lewis {

// Token surfaces in order. Words are the unit of alignment throughout.
using TokenSeq = std::vector<std::string>;
using TokenId = std::int32_t;

inline constexpr std::size_t kDefaultMaxLen = 128;

// Binary style attribute of a task (e.g. negative/positive).
enum class Style : std::uint8_t { k0 = 0, k1 = 1 };

constexpr Style opposite(Style s) { return s == Style::k0 ? Style::k1 : Style::k0; }
constexpr int style_index(Style s) { return static_cast<int>(s); }
Style style_from_index(int k);

// Reserved vocabulary entries. Surfaces contain ASCII upper case, which the
// tokenizer never emits, so natural text cannot collide with them.
namespace special {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kBos = 2;
inline constexpr TokenId kEos = 3;
inline constexpr TokenId kSep = 4;
inline constexpr TokenId kMask = 5;
inline constexpr TokenId kSlot = 6;
inline constexpr TokenId kCls = 7;
inline constexpr TokenId kFillSep = 8;
inline constexpr TokenId kStyle0 = 9;
inline constexpr TokenId kStyle1 = 10;
inline constexpr TokenId kCount = 11;

inline constexpr std::string_view kBosSurface = "<BOS>";
inline constexpr std::string_view kEosSurface = "<EOS>";
inline constexpr std::string_view kMaskSurface = "<MASK>";
inline constexpr std::string_view kSlotSurface = "SLOT";
inline constexpr std::string_view kFillSepSurface = "<FSEP>";

std::string_view surface(TokenId id);
constexpr TokenId style_marker(Style s) {
  return s == Style::k0 ? kStyle0 : kStyle1;
}
}  // namespace special

// Lowercases, splits on whitespace, and splits leading/trailing punctuation
// into standalone tokens. Throws EmptyInput if nothing remains.
TokenSeq tokenize(std::string_view text);
std::string detokenize(std::span<const std::string> tokens);

class Vocabulary {
 public:
  // Specials only.
  Vocabulary();

  // Content surfaces in id order (after the specials) with their counts.
  Vocabulary(std::vector<std::string> surfaces, std::vector<std::uint64_t> counts);

  std::size_t size() const { return surfaces_.size(); }
  TokenId id(std::string_view surface) const;  // kUnk when absent
  bool contains(std::string_view surface) const;
  const std::string& surface(TokenId id) const;
  std::uint64_t count(TokenId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  static bool is_special(TokenId id) { return id >= 0 && id < special::kCount; }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  TokenSeq decode(std::span<const TokenId> ids) const;

  // `LEWIS-VOCAB v1` text form; identical vocabularies give identical bytes.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  // FNV-1a of serialize(), as hex.
  const std::string& hash() const { return hash_; }

 private:
  void index();

  std::vector<std::string> surfaces_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> ids_;
  std::string hash_;
};

// Frequency-ordered vocabulary (count desc, then lexicographic) over all
// tokens seen at least min_count times.
Vocabulary build_vocabulary(const std::vector<std::filesystem::path>& files,
                            std::size_t min_count);
Vocabulary build_vocabulary(const std::vector<TokenSeq>& sentences,
                            std::size_t min_count);

struct StyleExample {
  TokenSeq tokens;
  Style style = Style::k0;
  std::size_t line = 0;  // 1-based line number in the source file
};

// Streams a one-example-per-line style corpus. Blank lines are skipped;
// overlong lines are truncated to max_len and counted.
class StyleCorpusReader {
 public:
  StyleCorpusReader(const std::filesystem::path& path, Style style,
                    std::size_t max_len = kDefaultMaxLen);

  std::optional<StyleExample> next();
  std::size_t truncated() const { return truncated_; }
  std::size_t skipped_blank() const { return blank_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  Style style_;
  std::size_t max_len_;
  std::size_t line_ = 0;
  std::size_t truncated_ = 0;
  std::size_t blank_ = 0;
};

struct StyleCorpus {
  std::vector<StyleExample> examples;
  std::size_t truncated = 0;
};

StyleCorpus load_style_corpus(const std::filesystem::path& path, Style style,
                              std::size_t max_len = kDefaultMaxLen);

}  // namespace lewis

#endif  // LEWIS_CORPUS_HPP_
