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

#include "lewis/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lewis/errors.hpp"

namespace lewis {
namespace {

// Relative slack for the inclusive a_i >= mean comparison: the mean of N
// equal doubles is not always bitwise equal to them.
constexpr double kBoundarySlack = 1e-12;

}  // namespace

std::size_t slot_cap_limit(std::size_t n) { return std::min<std::size_t>(n / 3, 6); }

AttentionProfile pool_attention(std::span<const nn::Matrix<float>> heads, std::size_t query,
                                const std::vector<bool>& special_key) {
  AttentionProfile profile;
  if (heads.empty()) return profile;
  const auto keys = static_cast<std::size_t>(heads.front().cols());
  for (std::size_t k = 0; k < keys; ++k) {
    if (k < special_key.size() && special_key[k]) continue;
    double best = 0.0;
    for (const auto& h : heads) {
      best = std::max(best, static_cast<double>(h(static_cast<Eigen::Index>(query), static_cast<Eigen::Index>(k))));
    }
    profile.weights.push_back(best);
  }
  if (!profile.weights.empty()) {
    profile.threshold = std::accumulate(profile.weights.begin(), profile.weights.end(), 0.0) /
                        static_cast<double>(profile.weights.size());
  }
  return profile;
}

std::vector<std::size_t> slotted_positions(const AttentionProfile& profile, bool cap) {
  const double bound = profile.threshold - kBoundarySlack * std::max(1.0, std::abs(profile.threshold));
  std::vector<std::size_t> above;
  for (std::size_t i = 0; i < profile.weights.size(); ++i) {
    if (profile.weights[i] >= bound) above.push_back(i);
  }
  if (cap) {
    const std::size_t limit = slot_cap_limit(profile.weights.size());
    if (above.size() > limit) {
      std::stable_sort(above.begin(), above.end(), [&](std::size_t a, std::size_t b) {
        return profile.weights[a] > profile.weights[b];
      });
      above.resize(limit);
      std::sort(above.begin(), above.end());
    }
  }
  return above;
}

Template template_from_profile(const TokenSeq& tokens, const AttentionProfile& profile, bool cap) {
  if (tokens.size() != profile.weights.size()) throw ShapeError("profile length differs from token count");
  TokenSeq raw = tokens;
  for (std::size_t i : slotted_positions(profile, cap)) raw[i] = std::string(special::kSlotSurface);
  return Template::from_raw(raw);
}

StyleClassifier::StyleClassifier(nn::ModelBundle model, const Vocabulary& vocab)
    : model_(std::move(model)), vocab_(&vocab) {
  if (model_.role != nn::Role::kClassifier) throw Error("model is not a classifier");
  if (model_.vocab_hash != vocab.hash()) throw VocabMismatch("classifier vocabulary mismatch");
}

std::vector<TokenId> StyleClassifier::input_ids(const TokenSeq& tokens) const {
  std::vector<TokenId> ids{special::kCls};
  for (const auto& t : tokens) ids.push_back(vocab_->id(t));
  return ids;
}

Classification StyleClassifier::classify(const TokenSeq& tokens) const {
  const auto ids = input_ids(tokens);
  const auto enc = nn::encode(model_, ids, false);
  const nn::Matrix<float> cls = enc.hidden.topRows(1);
  const nn::Matrix<float> p = nn::softmax(nn::apply_head(model_, cls, 0));
  Classification c;
  // Normalize in double so the pair sums to one to rounding.
  const double p0 = static_cast<double>(p(0, 0));
  const double p1 = static_cast<double>(p(0, 1));
  c.probs = {p0 / (p0 + p1), p1 / (p0 + p1)};
  c.label = c.probs[1] > c.probs[0] ? Style::k1 : Style::k0;
  c.probability = c.probs[static_cast<std::size_t>(style_index(c.label))];
  return c;
}

AttentionProfile StyleClassifier::attention_profile(const TokenSeq& tokens) const {
  const auto ids = input_ids(tokens);
  const auto enc = nn::encode(model_, ids, true);
  const auto& layer = enc.attention[enc.attention.size() - 2];
  std::vector<bool> special_key(ids.size(), false);
  special_key[0] = true;
  return pool_attention(layer, 0, special_key);
}

Template StyleClassifier::extract_template(const TokenSeq& tokens, bool cap) const {
  if (tokens.empty()) throw EmptyInput("cannot template an empty sentence");
  return template_from_profile(tokens, attention_profile(tokens), cap);
}

ClassifierTraining train_classifier(const std::vector<LabeledSentence>& train,
                                    const std::vector<LabeledSentence>& heldout,
                                    const Vocabulary& vocab, const nn::ModelConfig& config,
                                    const nn::TrainConfig& train_config, std::uint64_t seed) {
  std::array<std::size_t, 2> per_style{};
  for (const auto& s : train) ++per_style[static_cast<std::size_t>(style_index(s.style))];
  if (per_style[0] == 0 || per_style[1] == 0) {
    throw DegenerateData("classifier training needs examples of both styles");
  }
  std::vector<nn::TrainExample> examples;
  examples.reserve(train.size());
  for (const auto& s : train) {
    nn::TrainExample ex;
    ex.source.push_back(special::kCls);
    for (const auto& t : s.tokens) ex.source.push_back(vocab.id(t));
    ex.labels = {style_index(s.style)};
    examples.push_back(std::move(ex));
  }
  ClassifierTraining out;
  out.model = nn::create_model(nn::Role::kClassifier, config, vocab, seed);
  out.loss_curve = nn::train(out.model, nn::Dataset::of(std::move(examples)), train_config, seed).loss_curve;
  if (!heldout.empty()) {
    StyleClassifier clf(out.model, vocab);
    out.heldout_accuracy = classifier_accuracy(clf, heldout);
  }
  return out;
}

double classifier_accuracy(const StyleJudge& classifier, const std::vector<LabeledSentence>& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : data) correct += classifier.classify(s.tokens).label == s.style ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace lewis
