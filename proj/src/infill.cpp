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

#include "lewis/infill.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lewis/errors.hpp"
#include "lewis/nn/decoding.hpp"

namespace lewis {
namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();
constexpr int kSlotItem = -1;

// Walks a decoded prefix against the template schedule: content tokens are
// forced, each slot takes 1..max_fill free tokens and closes on the next
// scheduled token (or EOS).
class Schedule {
 public:
  Schedule(std::vector<TokenId> items, std::size_t max_fill)
      : items_(std::move(items)), max_fill_(max_fill) {}

  struct Cursor {
    std::size_t pos = 0;
    std::size_t fill = 0;
  };

  // Returns the template item index emitted by `token`, or npos for a
  // free fill token.
  std::size_t advance(Cursor& c, TokenId token) const {
    if (c.pos < items_.size() && items_[c.pos] != kSlotItem) return c.pos++;
    if (c.fill >= 1 && token == closing(c.pos) && c.pos + 1 < items_.size()) {
      c.fill = 0;
      c.pos += 2;
      return c.pos - 1;
    }
    ++c.fill;
    return std::string::npos;
  }

  Cursor replay(const std::vector<TokenId>& prefix) const {
    Cursor c;
    for (TokenId t : prefix) advance(c, t);
    return c;
  }

  void mask(const Cursor& c, Eigen::VectorXf& log_probs) const {
    if (c.pos >= items_.size() || items_[c.pos] != kSlotItem) {
      const TokenId only = c.pos >= items_.size() ? special::kEos : items_[c.pos];
      const float keep = log_probs(only);
      log_probs.setConstant(kNegInf);
      log_probs(only) = keep;
      return;
    }
    const TokenId close = closing(c.pos);
    const float close_score = log_probs(close);
    if (c.fill >= max_fill_) {
      log_probs.setConstant(kNegInf);
    } else {
      log_probs.head(special::kCount).setConstant(kNegInf);
    }
    log_probs(close) = c.fill >= 1 ? close_score : kNegInf;
  }

  std::size_t max_steps() const {
    std::size_t n = 1;
    for (TokenId t : items_) n += t == kSlotItem ? max_fill_ : 1;
    return n;
  }

  std::size_t min_length() const {
    return items_.size() + 1;
  }

 private:
  TokenId closing(std::size_t slot_pos) const {
    return slot_pos + 1 < items_.size() ? items_[slot_pos + 1] : special::kEos;
  }

  std::vector<TokenId> items_;
  std::size_t max_fill_;
};

void validate_decode(const InfillDecode& decode) {
  if (decode.max_fill < 1) throw ConfigError("decode.max_fill", "must be at least 1");
  if (decode.beam < 1) throw ConfigError("decode.beam", "must be at least 1");
}

std::string join_context(const TokenSeq& history, std::size_t length) {
  std::string out;
  for (std::size_t i = history.size() - length; i < history.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += history[i];
  }
  return out;
}

}  // namespace

TokenSeq fill_template(const Infiller& infiller, const InfillRequest& request) {
  if (request.style != infiller.style()) {
    throw ConfigError("infill.style", "request style does not match the infiller");
  }
  validate_decode(request.decode);
  return infiller.fill(request.tmpl, request.decode);
}

Template noise_sentence(const TokenSeq& sentence, const NoiseConfig& noise, Rng& rng) {
  if (sentence.empty()) throw EmptyInput("cannot noise an empty sentence");
  const std::size_t n = sentence.size();
  const std::size_t lo = std::max<std::size_t>(1, noise.min_spans);
  const std::size_t hi = std::max(lo, noise.max_spans);
  const std::size_t spans = lo + rng.index(hi - lo + 1);
  const double p = 1.0 / std::max(1.0, noise.mean_span);
  std::vector<bool> masked(n, false);
  std::size_t placed = 0;
  for (std::size_t s = 0; s < spans; ++s) {
    const std::size_t len = std::min({rng.geometric(p), std::max<std::size_t>(1, noise.max_span), n});
    // Starts whose span avoids every earlier span.
    std::vector<std::size_t> starts;
    for (std::size_t b = 0; b + len <= n; ++b) {
      bool free = true;
      for (std::size_t i = b; i < b + len && free; ++i) free = !masked[i];
      if (free) starts.push_back(b);
    }
    if (starts.empty()) continue;
    const std::size_t b = starts[rng.index(starts.size())];
    for (std::size_t i = b; i < b + len; ++i) masked[i] = true;
    ++placed;
  }
  if (placed == 0) masked[rng.index(n)] = true;
  TokenSeq raw;
  raw.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw.push_back(masked[i] ? std::string(special::kSlotSurface) : sentence[i]);
  }
  return Template::from_raw(raw);
}

NeuralInfiller::NeuralInfiller(nn::ModelBundle model, const Vocabulary& vocab)
    : model_(std::move(model)), vocab_(&vocab) {
  if (model_.role != nn::Role::kInfiller) throw ConfigError("model.role", "expected an infiller");
  if (!model_.style) throw ConfigError("model.style", "infiller has no style");
  if (model_.vocab_hash != vocab.hash()) throw VocabMismatch("infiller vocabulary hash differs");
}

TokenSeq NeuralInfiller::fill(const Template& tmpl, const InfillDecode& decode) const {
  validate_decode(decode);
  std::vector<TokenId> source;
  std::vector<TokenId> items;
  std::vector<std::size_t> item_token;  // template index per schedule item
  for (std::size_t i = 0; i < tmpl.tokens.size(); ++i) {
    const bool slot = is_slot(tmpl.tokens[i]);
    source.push_back(slot ? special::kSlot : vocab_->id(tmpl.tokens[i]));
    items.push_back(slot ? kSlotItem : source.back());
    item_token.push_back(i);
  }
  if (tmpl.slot_count == 0) return tmpl.content();
  if (source.empty()) throw EmptyInput("empty template");

  const Schedule schedule(items, decode.max_fill);
  if (schedule.min_length() > static_cast<std::size_t>(model_.config.max_len)) {
    throw ConstraintFailure("template does not fit the decoder length");
  }
  const auto encoded = nn::encode(model_, source, false);
  const nn::IncrementalDecoder decoder(model_, encoded.hidden);
  const nn::TokenMask mask = [&](const std::vector<TokenId>& prefix, Eigen::VectorXf& lp) {
    schedule.mask(schedule.replay(prefix), lp);
  };
  const std::size_t steps = schedule.max_steps();
  nn::Hypothesis best;
  if (decode.beam > 1) {
    auto beams = nn::beam_search(decoder, decode.beam, steps, mask);
    if (beams.empty()) throw ConstraintFailure("beam search produced no hypothesis");
    best = std::move(beams.front());
  } else {
    Rng rng(decode.seed);
    best = nn::sample(decoder, steps, decode.temperature, rng, mask);
  }
  if (!best.finished) throw ConstraintFailure("decoder could not complete the template schedule");

  TokenSeq out;
  Schedule::Cursor cursor;
  for (TokenId t : best.tokens) {
    const std::size_t item = schedule.advance(cursor, t);
    out.push_back(item == std::string::npos ? vocab_->surface(t) : tmpl.tokens[item_token[item]]);
  }
  return out;
}

InfillerTraining train_infiller(const std::vector<TokenSeq>& corpus, Style style,
                                const Vocabulary& vocab, const nn::ModelConfig& config,
                                const nn::TrainConfig& train_config, const NoiseConfig& noise,
                                std::uint64_t seed) {
  if (corpus.size() < kMinInfillCorpus) {
    throw DegenerateData("infiller corpus needs at least " + std::to_string(kMinInfillCorpus) +
                         " sentences");
  }
  InfillerTraining result{
      nn::create_model(nn::Role::kInfiller, config, vocab, derive_seed(seed, {1}), style), {}};
  nn::Dataset data;
  data.size = corpus.size();
  data.get = [&](std::size_t i, Rng& rng) {
    const Template tmpl = noise_sentence(corpus[i], noise, rng);
    nn::TrainExample ex;
    for (const auto& tok : tmpl.tokens) {
      ex.source.push_back(is_slot(tok) ? special::kSlot : vocab.id(tok));
    }
    ex.target = vocab.encode(corpus[i]);
    return ex;
  };
  result.loss_curve = nn::train(result.model, data, train_config, derive_seed(seed, {2})).loss_curve;
  return result;
}

NgramInfiller NgramInfiller::build(const std::vector<TokenSeq>& corpus, int order, Style style) {
  if (order < 1 || order > 3) throw ConfigError("ngram.order", "must be 1, 2 or 3");
  if (corpus.empty()) throw EmptyCorpus("ngram corpus is empty");
  NgramInfiller model;
  model.order_ = order;
  model.style_ = style;
  const std::size_t span = static_cast<std::size_t>(order);
  for (const auto& sentence : corpus) {
    TokenSeq padded(span - 1, std::string(special::kBosSurface));
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.emplace_back(special::kEosSurface);
    for (std::size_t i = span - 1; i < padded.size(); ++i) {
      for (std::size_t k = 0; k < span; ++k) {
        TokenSeq history(padded.begin() + static_cast<std::ptrdiff_t>(i - k),
                         padded.begin() + static_cast<std::ptrdiff_t>(i));
        ++model.counts_[join(history, " ")][padded[i]];
      }
    }
  }
  model.finalize();
  return model;
}

void NgramInfiller::finalize() {
  totals_.clear();
  for (const auto& [ctx, row] : counts_) {
    std::uint64_t total = 0;
    for (const auto& [tok, c] : row) total += c;
    totals_[ctx] = total;
  }
  candidates_.clear();
  if (auto it = counts_.find(""); it != counts_.end()) {
    for (const auto& [tok, c] : it->second) {
      if (tok != special::kEosSurface && tok != special::kBosSurface) candidates_.push_back(tok);
    }
  }
}

double NgramInfiller::score(const TokenSeq& history, const std::string& token) const {
  double weight = 1.0;
  const std::size_t longest = std::min(history.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t len = longest + 1; len-- > 0;) {
    const auto row = counts_.find(join_context(history, len));
    if (row != counts_.end()) {
      const auto hit = row->second.find(token);
      if (hit != row->second.end()) {
        return weight * static_cast<double>(hit->second) / static_cast<double>(totals_.at(row->first));
      }
    }
    weight *= kBackoff;
  }
  return 0.0;
}

TokenSeq NgramInfiller::fill(const Template& tmpl, const InfillDecode& decode) const {
  validate_decode(decode);
  TokenSeq history(1, std::string(special::kBosSurface));
  TokenSeq out;
  for (std::size_t i = 0; i < tmpl.tokens.size(); ++i) {
    if (!is_slot(tmpl.tokens[i])) {
      history.push_back(tmpl.tokens[i]);
      out.push_back(tmpl.tokens[i]);
      continue;
    }
    const std::string close =
        i + 1 < tmpl.tokens.size() ? tmpl.tokens[i + 1] : std::string(special::kEosSurface);
    std::size_t f = 0;
    for (; f < decode.max_fill; ++f) {
      const std::string* best = nullptr;
      double best_score = -1.0;
      for (const auto& tok : candidates_) {
        if (tok == close) continue;
        const double s = score(history, tok);
        if (s > best_score) {
          best_score = s;
          best = &tok;
        }
      }
      if (best == nullptr || (f >= 1 && score(history, close) >= best_score)) break;
      history.push_back(*best);
      out.push_back(*best);
    }
    if (f == 0) {
      throw ConstraintFailure("ngram infiller has no fill candidates");
    }
  }
  return out;
}

std::string NgramInfiller::serialize() const {
  std::ostringstream os;
  os << "LEWIS-NGRAM v1\n# n=" << order_ << " style=" << style_index(style_) << '\n';
  for (const auto& [ctx, row] : counts_) {
    for (const auto& [tok, c] : row) os << ctx << '\t' << tok << '\t' << c << '\n';
  }
  return os.str();
}

NgramInfiller NgramInfiller::parse(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != "LEWIS-NGRAM v1") throw FormatError("bad n-gram header");
  NgramInfiller model;
  int style = 0;
  if (!std::getline(is, line) || std::sscanf(line.c_str(), "# n=%d style=%d", &model.order_, &style) != 2 ||
      model.order_ < 1 || model.order_ > 3 || style < 0 || style > 1) {
    throw FormatError("bad n-gram metadata line");
  }
  model.style_ = style_from_index(style);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) throw FormatError("bad n-gram line: " + line);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(b + 1));
    } catch (const std::exception&) {
      throw FormatError("bad n-gram count: " + line);
    }
    model.counts_[line.substr(0, a)][line.substr(a + 1, b - a - 1)] = count;
  }
  model.finalize();
  return model;
}

void NgramInfiller::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

NgramInfiller NgramInfiller::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace lewis
