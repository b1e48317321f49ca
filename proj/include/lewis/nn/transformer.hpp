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

#ifndef LEWIS_NN_TRANSFORMER_HPP_
#define LEWIS_NN_TRANSFORMER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lewis/corpus.hpp"
#include "lewis/nn/graph.hpp"
#include "lewis/util.hpp"

namespace lewis::nn {

enum class Role : std::uint8_t { kClassifier, kInfiller, kTagger, kGenerator, kSeq2Seq };

std::string_view role_name(Role role);
Role role_from_name(std::string_view name);
bool has_decoder(Role role);

struct ModelConfig {
  int layers = 4;
  int heads = 4;
  int model_dim = 128;
  int ff_dim = 256;
  int decoder_layers = 2;  // ignored by encoder-only roles
  int max_len = 288;       // positions per encoder/decoder input
  double dropout = 0.1;
  int vocab_size = 0;

  // Throws ConfigError on an invalid combination.
  void validate(Role role) const;
};

struct AttentionParams {
  std::size_t wq, bq, wk, wv, bv, wo, bo;  // keys carry no bias (softmax is shift invariant)
};
struct FeedForwardParams {
  std::size_t w1, b1, w2, b2;
};
struct EncoderLayerParams {
  std::size_t norm1_g, norm1_b;
  AttentionParams self;
  std::size_t norm2_g, norm2_b;
  FeedForwardParams ff;
};
struct DecoderLayerParams {
  std::size_t norm1_g, norm1_b;
  AttentionParams self;
  std::size_t norm2_g, norm2_b;
  AttentionParams cross;
  std::size_t norm3_g, norm3_b;
  FeedForwardParams ff;
};

// Parameter order and shapes for a role. Pre-norm blocks, learned
// positions, final layer norm on each stack.
//   classifier: head = d x 2 over the CLS row
//   tagger:     head = d x 2 (insert-before), head2 = d x 3 (op)
//   seq2seq roles: head = d x V output projection
struct Layout {
  std::vector<ParamShape> shapes;
  std::size_t token_embedding = 0;
  std::size_t encoder_positions = 0;
  std::vector<EncoderLayerParams> encoder;
  std::size_t encoder_norm_g = 0, encoder_norm_b = 0;
  std::size_t decoder_positions = 0;
  std::vector<DecoderLayerParams> decoder;
  std::size_t decoder_norm_g = 0, decoder_norm_b = 0;
  std::size_t head_w = 0, head_b = 0;
  std::size_t head2_w = 0, head2_b = 0;
};

Layout make_layout(Role role, const ModelConfig& config);

template <typename T>
struct ForwardMode {
  T dropout = T(0);
  Rng* rng = nullptr;
};

// Per-layer, per-head attention probabilities, [layer][head](query, key).
template <typename T>
using AttentionMaps = std::vector<std::vector<Matrix<T>>>;

// Role-agnostic training example over token ids. Interpretation:
//   classifier: source = CLS x; labels = {class}
//   tagger:     source = DIR x EOS; labels = insert flags, labels2 = ops
//               (-1 marks positions without a target)
//   seq2seq:    source = encoder ids; target = decoder output ids (no
//               BOS/EOS, both are added here)
struct TrainExample {
  std::vector<TokenId> source;
  std::vector<TokenId> target;
  std::vector<int> labels;
  std::vector<int> labels2;
};

template <typename T>
typename Graph<T>::Var encoder_forward(Graph<T>& g, const Layout& layout, const ModelConfig& config,
                                       std::span<const TokenId> ids, ForwardMode<T>& mode,
                                       AttentionMaps<T>* attention);

template <typename T>
typename Graph<T>::Var decoder_forward(Graph<T>& g, const Layout& layout, const ModelConfig& config,
                                       typename Graph<T>::Var memory, std::span<const TokenId> ids,
                                       ForwardMode<T>& mode);

// Mean per-target cross-entropy of one example (tagger: sum of the two
// heads' means).
template <typename T>
typename Graph<T>::Var example_loss(Graph<T>& g, Role role, const Layout& layout,
                                    const ModelConfig& config, const TrainExample& example,
                                    ForwardMode<T>& mode);

}  // namespace lewis::nn

#endif  // LEWIS_NN_TRANSFORMER_HPP_
