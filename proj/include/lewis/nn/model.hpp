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

#ifndef LEWIS_NN_MODEL_HPP_
#define LEWIS_NN_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lewis/corpus.hpp"
#include "lewis/nn/graph.hpp"
#include "lewis/nn/transformer.hpp"

namespace lewis::nn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Parameters plus everything needed to interpret them.
struct ModelBundle {
  Role role = Role::kClassifier;
  ModelConfig config;
  std::optional<Style> style;
  std::string vocab_hash;
  std::string config_hash;  // pipeline config that produced the model
  Layout layout;
  ParamSet<float> params;

  std::size_t parameter_count() const { return params.scalar_count(); }
};

// Fresh model with seeded Xavier initialization; config.vocab_size is
// taken from the vocabulary.
ModelBundle create_model(Role role, ModelConfig config, const Vocabulary& vocab,
                         std::uint64_t seed, std::optional<Style> style = std::nullopt);

// `LEWISMDL`, u32 version, u32 header length, JSON header, then
// little-endian f32 blobs in header order.
std::string serialize_model(const ModelBundle& model);
ModelBundle parse_model(std::string_view bytes, const Vocabulary& vocab);
void save_model(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path, const Vocabulary& vocab);

struct Encoded {
  Matrix<float> hidden;             // final-normed encoder states
  AttentionMaps<float> attention;   // filled when requested
};

// Inference-mode encoder pass (dropout off).
Encoded encode(const ModelBundle& model, std::span<const TokenId> ids, bool record_attention);

// rows x W + b through the first (which = 0) or second (which = 1) head.
Matrix<float> apply_head(const ModelBundle& model, const Matrix<float>& rows, int which);

// Row-wise softmax.
Matrix<float> softmax(const Matrix<float>& logits);

// Autoregressive decoder with cached self-attention keys/values; step()
// feeds one token and returns log-probabilities of the next one.
class IncrementalDecoder {
 public:
  struct State {
    std::vector<Matrix<float>> keys;
    std::vector<Matrix<float>> values;
    int length = 0;
  };

  IncrementalDecoder(const ModelBundle& model, const Matrix<float>& memory);

  State start() const;
  Eigen::VectorXf step(State& state, TokenId token) const;
  int max_len() const { return model_.config.max_len; }

 private:
  const ModelBundle& model_;
  std::vector<Matrix<float>> cross_keys_;
  std::vector<Matrix<float>> cross_values_;
};

// Teacher-forced log-probabilities of each decoder output position
// (BOS + target -> target + EOS), via the full graph. Used to cross-check
// the incremental path.
Matrix<float> decoder_log_probs(const ModelBundle& model, std::span<const TokenId> source,
                                std::span<const TokenId> target);

}  // namespace lewis::nn

#endif  // LEWIS_NN_MODEL_HPP_
