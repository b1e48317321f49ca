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

#ifndef LEWIS_INFILL_HPP_
#define LEWIS_INFILL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lewis/corpus.hpp"
#include "lewis/nn/model.hpp"
#include "lewis/nn/train.hpp"
#include "lewis/slot_template.hpp"
#include "lewis/util.hpp"

namespace lewis {

struct InfillDecode {
  std::size_t beam = 1;
  double temperature = 1.0;  // <= 0 decodes greedily
  std::size_t max_fill = 4;
  std::uint64_t seed = 0;
};

struct InfillRequest {
  Template tmpl;
  Style style = Style::k0;
  InfillDecode decode;
};

enum class InfillerKind { kSeq2Seq, kNgram };

class Infiller {
 public:
  virtual ~Infiller() = default;
  // Output embeds the template content in order and holds no placeholders.
  virtual TokenSeq fill(const Template& tmpl, const InfillDecode& decode) const = 0;
  virtual Style style() const = 0;
  virtual InfillerKind kind() const = 0;
};

// Validates the request against the infiller and fills it.
TokenSeq fill_template(const Infiller& infiller, const InfillRequest& request);

struct NoiseConfig {
  std::size_t min_spans = 1;
  std::size_t max_spans = 3;
  double mean_span = 2.0;
  std::size_t max_span = 4;
};

// Replaces 1..max_spans random non-overlapping spans with SLOT. Always
// leaves at least one slot.
Template noise_sentence(const TokenSeq& sentence, const NoiseConfig& noise, Rng& rng);

class NeuralInfiller final : public Infiller {
 public:
  // Throws VocabMismatch / ConfigError for a foreign or non-infiller model.
  NeuralInfiller(nn::ModelBundle model, const Vocabulary& vocab);

  TokenSeq fill(const Template& tmpl, const InfillDecode& decode) const override;
  Style style() const override { return *model_.style; }
  InfillerKind kind() const override { return InfillerKind::kSeq2Seq; }

  const nn::ModelBundle& model() const { return model_; }

 private:
  nn::ModelBundle model_;
  const Vocabulary* vocab_;
};

struct InfillerTraining {
  nn::ModelBundle model;
  std::vector<double> loss_curve;
};

inline constexpr std::size_t kMinInfillCorpus = 16;

// Denoising training on freshly noised templates each draw. Throws
// DegenerateData below kMinInfillCorpus sentences.
InfillerTraining train_infiller(const std::vector<TokenSeq>& corpus, Style style,
                                const Vocabulary& vocab, const nn::ModelConfig& config,
                                const nn::TrainConfig& train_config, const NoiseConfig& noise,
                                std::uint64_t seed);

// Count-based infiller with stupid backoff. Each slot is filled greedily
// left to right; a slot closes once the next scheduled token scores at
// least as well as every free continuation, or when max_fill is reached.
class NgramInfiller final : public Infiller {
 public:
  static constexpr double kBackoff = 0.4;

  static NgramInfiller build(const std::vector<TokenSeq>& corpus, int order, Style style);

  TokenSeq fill(const Template& tmpl, const InfillDecode& decode) const override;
  Style style() const override { return style_; }
  InfillerKind kind() const override { return InfillerKind::kNgram; }

  int order() const { return order_; }
  // Backoff score of `token` after `history` (which starts with BOS).
  double score(const TokenSeq& history, const std::string& token) const;

  std::string serialize() const;
  static NgramInfiller parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static NgramInfiller load(const std::filesystem::path& path);

  friend bool operator==(const NgramInfiller& a, const NgramInfiller& b) {
    return a.order_ == b.order_ && a.style_ == b.style_ && a.counts_ == b.counts_;
  }

 private:
  void finalize();

  int order_ = 2;
  Style style_ = Style::k0;
  // context (space-joined, "" for unigrams) -> token -> count
  std::map<std::string, std::map<std::string, std::uint64_t>> counts_;
  std::map<std::string, std::uint64_t> totals_;
  std::vector<std::string> candidates_;  // fillable tokens, sorted
};

}  // namespace lewis

#endif  // LEWIS_INFILL_HPP_
