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

#include "lewis/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <sstream>

#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis {
namespace {

constexpr std::string_view kVocabHeader = "LEWIS-VOCAB v1";

constexpr std::array<std::string_view, special::kCount> kSpecialSurfaces = {
    "<PAD>", "<UNK>", "<BOS>", "<EOS>", "<SEP>", "<MASK>",
    "SLOT",  "<CLS>", "<FSEP>", "<S0>", "<S1>"};

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '(': case ')': case '[': case ']': case '\'':
      return true;
    default:
      return false;
  }
}

void split_chunk(std::string_view chunk, TokenSeq& out) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  // "'" is only split when it is not inside the word (keeps "i've").
  while (begin < end && is_punct(static_cast<unsigned char>(chunk[begin]))) {
    out.emplace_back(1, chunk[begin]);
    ++begin;
  }
  std::size_t tail = end;
  while (tail > begin && is_punct(static_cast<unsigned char>(chunk[tail - 1]))) --tail;
  if (tail > begin) out.emplace_back(chunk.substr(begin, tail - begin));
  for (std::size_t i = tail; i < end; ++i) out.emplace_back(1, chunk[i]);
}

}  // namespace

Style style_from_index(int k) {
  if (k != 0 && k != 1) throw Error("style index must be 0 or 1");
  return static_cast<Style>(k);
}

std::string_view special::surface(TokenId id) {
  return kSpecialSurfaces.at(static_cast<std::size_t>(id));
}

TokenSeq tokenize(std::string_view text) {
  std::string lowered(text);
  for (char& c : lowered) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  TokenSeq out;
  std::size_t i = 0;
  while (i < lowered.size()) {
    while (i < lowered.size() && is_space(static_cast<unsigned char>(lowered[i]))) ++i;
    std::size_t j = i;
    while (j < lowered.size() && !is_space(static_cast<unsigned char>(lowered[j]))) ++j;
    if (j > i) split_chunk(std::string_view(lowered).substr(i, j - i), out);
    i = j;
  }
  if (out.empty()) throw EmptyInput("text is empty after normalization");
  return out;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary({}, {}) {}

Vocabulary::Vocabulary(std::vector<std::string> surfaces,
                       std::vector<std::uint64_t> counts) {
  if (surfaces.size() != counts.size()) {
    throw FormatError("vocabulary surfaces/counts size mismatch");
  }
  surfaces_.reserve(special::kCount + surfaces.size());
  counts_.reserve(special::kCount + surfaces.size());
  for (auto s : kSpecialSurfaces) {
    surfaces_.emplace_back(s);
    counts_.push_back(0);
  }
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    surfaces_.push_back(std::move(surfaces[i]));
    counts_.push_back(counts[i]);
  }
  index();
}

void Vocabulary::index() {
  ids_.clear();
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const auto& s = surfaces_[i];
    if (s.empty()) throw FormatError("empty vocabulary surface");
    for (unsigned char c : s) {
      if (is_space(c)) throw FormatError("whitespace in vocabulary surface");
    }
    if (!ids_.emplace(s, static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary surface: " + s);
    }
  }
  hash_ = hex64(fnv1a64(serialize()));
}

TokenId Vocabulary::id(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? special::kUnk : it->second;
}

bool Vocabulary::contains(std::string_view surface) const {
  return ids_.count(std::string(surface)) != 0;
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
    throw Error("token id out of range: " + std::to_string(id));
  }
  return surfaces_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

TokenSeq Vocabulary::decode(std::span<const TokenId> ids) const {
  TokenSeq out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(surface(i));
  return out;
}

std::string Vocabulary::serialize() const {
  std::string out(kVocabHeader);
  out.push_back('\n');
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    out += std::to_string(i);
    out.push_back('\t');
    out += surfaces_[i];
    out.push_back('\t');
    out += std::to_string(counts_[i]);
    out.push_back('\n');
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kVocabHeader) {
    throw FormatError("bad vocabulary header");
  }
  std::vector<std::string> surfaces;
  std::vector<std::uint64_t> counts;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw FormatError("bad vocabulary line: " + line);
    std::size_t id = 0;
    std::uint64_t count = 0;
    const auto r1 = std::from_chars(line.data(), line.data() + t1, id);
    const auto r2 = std::from_chars(line.data() + t2 + 1, line.data() + line.size(), count);
    if (r1.ec != std::errc() || r2.ec != std::errc() || id != expected) {
      throw FormatError("bad vocabulary line: " + line);
    }
    std::string surf = line.substr(t1 + 1, t2 - t1 - 1);
    if (id < special::kCount) {
      if (surf != kSpecialSurfaces[id]) throw FormatError("special token mismatch at id " + std::to_string(id));
    } else {
      surfaces.push_back(std::move(surf));
      counts.push_back(count);
    }
    ++expected;
  }
  if (expected < special::kCount) throw FormatError("vocabulary is missing specials");
  return Vocabulary(std::move(surfaces), std::move(counts));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  write_file(path, serialize());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

Vocabulary build_vocabulary(const std::vector<TokenSeq>& sentences,
                            std::size_t min_count) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : sentences) {
    for (const auto& t : s) ++counts[t];
  }
  if (counts.empty()) throw EmptyCorpus("corpus has no tokens");
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (auto& [surface, count] : counts) {
    if (count >= min_count) entries.emplace_back(surface, count);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> surfaces;
  std::vector<std::uint64_t> freq;
  for (auto& [s, c] : entries) {
    surfaces.push_back(s);
    freq.push_back(c);
  }
  return Vocabulary(std::move(surfaces), std::move(freq));
}

Vocabulary build_vocabulary(const std::vector<std::filesystem::path>& files,
                            std::size_t min_count) {
  std::vector<TokenSeq> sentences;
  for (const auto& f : files) {
    StyleCorpusReader reader(f, Style::k0, SIZE_MAX);
    while (auto ex = reader.next()) sentences.push_back(std::move(ex->tokens));
  }
  return build_vocabulary(sentences, min_count);
}

StyleCorpusReader::StyleCorpusReader(const std::filesystem::path& path, Style style,
                                     std::size_t max_len)
    : path_(path), in_(path), style_(style), max_len_(max_len) {
  if (!in_) throw IoError("cannot open corpus " + path.string());
}

std::optional<StyleExample> StyleCorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    TokenSeq tokens;
    try {
      tokens = tokenize(line);
    } catch (const EmptyInput&) {
      ++blank_;
      continue;
    }
    if (tokens.size() > max_len_) {
      tokens.resize(max_len_);
      ++truncated_;
    }
    return StyleExample{std::move(tokens), style_, line_};
  }
  if (in_.bad()) throw IoError("read failed: " + path_.string());
  return std::nullopt;
}

StyleCorpus load_style_corpus(const std::filesystem::path& path, Style style,
                              std::size_t max_len) {
  StyleCorpusReader reader(path, style, max_len);
  StyleCorpus corpus;
  while (auto ex = reader.next()) corpus.examples.push_back(std::move(*ex));
  corpus.truncated = reader.truncated();
  if (corpus.truncated > 0) {
    log_info(path.string() + ": truncated " + std::to_string(corpus.truncated) +
             " line(s) to " + std::to_string(max_len) + " tokens");
  }
  return corpus;
}

}  // namespace lewis
