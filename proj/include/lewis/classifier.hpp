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

#ifndef LEWIS_CLASSIFIER_HPP_
#define LEWIS_CLASSIFIER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lewis/corpus.hpp"
#include "lewis/nn/model.hpp"
#include "lewis/nn/train.hpp"
#include "lewis/slot_template.hpp"

namespace lewis {

// Pooled attention per content token and its mean.
struct AttentionProfile {
  std::vector<double> weights;
  double threshold = 0.0;
};

struct Classification {
  Style label = Style::k0;
  double probability = 0.0;         // of `label`
  std::array<double, 2> probs{};    // per style, sums to 1
};

// Upper bound on slotted tokens when capping is on: min(floor(N/3), 6).
std::size_t slot_cap_limit(std::size_t n);

// a_i = max over heads of weights[h](query, i) for every key i not flagged
// special; threshold = mean of the a_i.
AttentionProfile pool_attention(std::span<const nn::Matrix<float>> heads, std::size_t query,
                                const std::vector<bool>& special_key);

// Token i becomes SLOT iff a_i >= threshold. With `cap`, only the
// slot_cap_limit(N) highest-attended of those (ties: leftmost) are slotted.
// Consecutive SLOTs are merged.
Template template_from_profile(const TokenSeq& tokens, const AttentionProfile& profile, bool cap);

// Indices slotted before merging; exposed for property checks.
std::vector<std::size_t> slotted_positions(const AttentionProfile& profile, bool cap);

// Style scoring and template extraction, as consumed by synthesis and
// reranking.
class StyleJudge {
 public:
  virtual ~StyleJudge() = default;
  virtual Classification classify(const TokenSeq& tokens) const = 0;
  virtual Template extract_template(const TokenSeq& tokens, bool cap) const = 0;
};

class StyleClassifier final : public StyleJudge {
 public:
  // Throws VocabMismatch if the model was trained on another vocabulary.
  StyleClassifier(nn::ModelBundle model, const Vocabulary& vocab);

  Classification classify(const TokenSeq& tokens) const override;
  // Penultimate encoder layer, CLS query row; specials excluded.
  AttentionProfile attention_profile(const TokenSeq& tokens) const;
  Template extract_template(const TokenSeq& tokens, bool cap) const override;

  const nn::ModelBundle& model() const { return model_; }
  const Vocabulary& vocab() const { return *vocab_; }

 private:
  std::vector<TokenId> input_ids(const TokenSeq& tokens) const;

  nn::ModelBundle model_;
  const Vocabulary* vocab_;
};

struct LabeledSentence {
  TokenSeq tokens;
  Style style = Style::k0;
};

struct ClassifierTraining {
  nn::ModelBundle model;
  double heldout_accuracy = 0.0;
  std::vector<double> loss_curve;
};

// Trains the CLS-readout classifier. Held-out accuracy is measured on
// `heldout` (may be empty, giving 0). Throws DegenerateData unless both
// styles are present.
ClassifierTraining train_classifier(const std::vector<LabeledSentence>& train,
                                    const std::vector<LabeledSentence>& heldout,
                                    const Vocabulary& vocab, const nn::ModelConfig& config,
                                    const nn::TrainConfig& train_config, std::uint64_t seed);

double classifier_accuracy(const StyleJudge& classifier,
                           const std::vector<LabeledSentence>& data);

}  // namespace lewis

#endif  // LEWIS_CLASSIFIER_HPP_
