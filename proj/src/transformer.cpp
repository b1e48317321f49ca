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

#include "lewis/nn/transformer.hpp"

#include <string>

#include "lewis/errors.hpp"

namespace lewis::nn {
namespace {

class ShapeBuilder {
 public:
  explicit ShapeBuilder(std::vector<ParamShape>& shapes) : shapes_(shapes) {}

  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    shapes_.push_back({std::move(name), rows, cols});
    return shapes_.size() - 1;
  }

  AttentionParams attention(const std::string& prefix, Eigen::Index d) {
    AttentionParams a{};
    a.wq = add(prefix + ".wq", d, d);
    a.bq = add(prefix + ".bq", 1, d);
    a.wk = add(prefix + ".wk", d, d);
    a.wv = add(prefix + ".wv", d, d);
    a.bv = add(prefix + ".bv", 1, d);
    a.wo = add(prefix + ".wo", d, d);
    a.bo = add(prefix + ".bo", 1, d);
    return a;
  }

  FeedForwardParams feed_forward(const std::string& prefix, Eigen::Index d, Eigen::Index ff) {
    FeedForwardParams f{};
    f.w1 = add(prefix + ".w1", d, ff);
    f.b1 = add(prefix + ".b1", 1, ff);
    f.w2 = add(prefix + ".w2", ff, d);
    f.b2 = add(prefix + ".b2", 1, d);
    return f;
  }

 private:
  std::vector<ParamShape>& shapes_;
};

template <typename T>
typename Graph<T>::Var attention_block(Graph<T>& g, const AttentionParams& p, int heads,
                                       typename Graph<T>::Var query_in,
                                       typename Graph<T>::Var memory_in, bool causal,
                                       std::vector<Matrix<T>>* probs) {
  auto q = g.linear(query_in, p.wq, p.bq);
  auto k = g.matmul(memory_in, p.wk);
  auto v = g.linear(memory_in, p.wv, p.bv);
  auto mixed = g.attention(q, k, v, heads, causal, probs);
  return g.linear(mixed, p.wo, p.bo);
}

template <typename T>
typename Graph<T>::Var feed_forward(Graph<T>& g, const FeedForwardParams& p,
                                    typename Graph<T>::Var x, ForwardMode<T>& mode) {
  auto h = g.gelu(g.linear(x, p.w1, p.b1));
  h = g.dropout(h, mode.dropout, mode.rng);
  return g.linear(h, p.w2, p.b2);
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kClassifier: return "classifier";
    case Role::kInfiller: return "infiller";
    case Role::kTagger: return "tagger";
    case Role::kGenerator: return "generator";
    case Role::kSeq2Seq: return "seq2seq";
  }
  return "?";
}

Role role_from_name(std::string_view name) {
  for (Role r : {Role::kClassifier, Role::kInfiller, Role::kTagger, Role::kGenerator, Role::kSeq2Seq}) {
    if (role_name(r) == name) return r;
  }
  throw FormatError("unknown model role: " + std::string(name));
}

bool has_decoder(Role role) {
  return role == Role::kInfiller || role == Role::kGenerator || role == Role::kSeq2Seq;
}

void ModelConfig::validate(Role role) const {
  if (layers < 2) throw ConfigError("layers", "must be >= 2");
  if (heads < 1) throw ConfigError("heads", "must be >= 1");
  if (model_dim < 1 || model_dim % heads != 0) {
    throw ConfigError("model_dim", "must be a positive multiple of heads");
  }
  if (ff_dim < 1) throw ConfigError("ff_dim", "must be positive");
  if (has_decoder(role) && decoder_layers < 1) throw ConfigError("decoder_layers", "must be >= 1");
  if (max_len < 2) throw ConfigError("max_len", "must be >= 2");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout", "must be in [0, 1)");
  if (vocab_size <= special::kCount) throw ConfigError("vocab_size", "must exceed the special count");
}

Layout make_layout(Role role, const ModelConfig& config) {
  config.validate(role);
  Layout layout;
  ShapeBuilder b(layout.shapes);
  const Eigen::Index d = config.model_dim;
  const Eigen::Index ff = config.ff_dim;
  layout.token_embedding = b.add("embed.tokens", config.vocab_size, d);
  layout.encoder_positions = b.add("encoder.positions", config.max_len, d);
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    EncoderLayerParams e{};
    e.norm1_g = b.add(p + ".norm1.g", 1, d);
    e.norm1_b = b.add(p + ".norm1.b", 1, d);
    e.self = b.attention(p + ".self", d);
    e.norm2_g = b.add(p + ".norm2.g", 1, d);
    e.norm2_b = b.add(p + ".norm2.b", 1, d);
    e.ff = b.feed_forward(p + ".ff", d, ff);
    layout.encoder.push_back(e);
  }
  layout.encoder_norm_g = b.add("encoder.norm.g", 1, d);
  layout.encoder_norm_b = b.add("encoder.norm.b", 1, d);
  if (has_decoder(role)) {
    layout.decoder_positions = b.add("decoder.positions", config.max_len, d);
    for (int l = 0; l < config.decoder_layers; ++l) {
      const std::string p = "decoder." + std::to_string(l);
      DecoderLayerParams e{};
      e.norm1_g = b.add(p + ".norm1.g", 1, d);
      e.norm1_b = b.add(p + ".norm1.b", 1, d);
      e.self = b.attention(p + ".self", d);
      e.norm2_g = b.add(p + ".norm2.g", 1, d);
      e.norm2_b = b.add(p + ".norm2.b", 1, d);
      e.cross = b.attention(p + ".cross", d);
      e.norm3_g = b.add(p + ".norm3.g", 1, d);
      e.norm3_b = b.add(p + ".norm3.b", 1, d);
      e.ff = b.feed_forward(p + ".ff", d, ff);
      layout.decoder.push_back(e);
    }
    layout.decoder_norm_g = b.add("decoder.norm.g", 1, d);
    layout.decoder_norm_b = b.add("decoder.norm.b", 1, d);
    layout.head_w = b.add("head.w", d, config.vocab_size);
    layout.head_b = b.add("head.b", 1, config.vocab_size);
  } else if (role == Role::kClassifier) {
    layout.head_w = b.add("head.w", d, 2);
    layout.head_b = b.add("head.b", 1, 2);
  } else {
    layout.head_w = b.add("head.insert.w", d, 2);
    layout.head_b = b.add("head.insert.b", 1, 2);
    layout.head2_w = b.add("head.op.w", d, 3);
    layout.head2_b = b.add("head.op.b", 1, 3);
  }
  return layout;
}

template <typename T>
typename Graph<T>::Var encoder_forward(Graph<T>& g, const Layout& layout, const ModelConfig& config,
                                       std::span<const TokenId> ids, ForwardMode<T>& mode,
                                       AttentionMaps<T>* attention) {
  if (ids.empty()) throw EmptyInput("encoder input is empty");
  if (static_cast<int>(ids.size()) > config.max_len) {
    throw LengthError("encoder input length " + std::to_string(ids.size()) + " exceeds max_len " +
                      std::to_string(config.max_len));
  }
  if (attention != nullptr) attention->assign(layout.encoder.size(), {});
  auto x = g.dropout(g.embed(ids, layout.token_embedding, layout.encoder_positions), mode.dropout, mode.rng);
  for (std::size_t l = 0; l < layout.encoder.size(); ++l) {
    const auto& p = layout.encoder[l];
    auto z = g.layer_norm(x, p.norm1_g, p.norm1_b);
    auto a = attention_block(g, p.self, config.heads, z, z, false,
                             attention != nullptr ? &(*attention)[l] : nullptr);
    x = g.add(x, g.dropout(a, mode.dropout, mode.rng));
    z = g.layer_norm(x, p.norm2_g, p.norm2_b);
    x = g.add(x, g.dropout(feed_forward(g, p.ff, z, mode), mode.dropout, mode.rng));
  }
  return g.layer_norm(x, layout.encoder_norm_g, layout.encoder_norm_b);
}

template <typename T>
typename Graph<T>::Var decoder_forward(Graph<T>& g, const Layout& layout, const ModelConfig& config,
                                       typename Graph<T>::Var memory, std::span<const TokenId> ids,
                                       ForwardMode<T>& mode) {
  if (static_cast<int>(ids.size()) > config.max_len) {
    throw LengthError("decoder input length " + std::to_string(ids.size()) + " exceeds max_len " +
                      std::to_string(config.max_len));
  }
  auto x = g.dropout(g.embed(ids, layout.token_embedding, layout.decoder_positions), mode.dropout, mode.rng);
  for (const auto& p : layout.decoder) {
    auto z = g.layer_norm(x, p.norm1_g, p.norm1_b);
    x = g.add(x, g.dropout(attention_block<T>(g, p.self, config.heads, z, z, true, nullptr), mode.dropout,
                           mode.rng));
    z = g.layer_norm(x, p.norm2_g, p.norm2_b);
    x = g.add(x, g.dropout(attention_block<T>(g, p.cross, config.heads, z, memory, false, nullptr),
                           mode.dropout, mode.rng));
    z = g.layer_norm(x, p.norm3_g, p.norm3_b);
    x = g.add(x, g.dropout(feed_forward(g, p.ff, z, mode), mode.dropout, mode.rng));
  }
  return g.layer_norm(x, layout.decoder_norm_g, layout.decoder_norm_b);
}

template <typename T>
typename Graph<T>::Var example_loss(Graph<T>& g, Role role, const Layout& layout,
                                    const ModelConfig& config, const TrainExample& ex,
                                    ForwardMode<T>& mode) {
  auto hidden = encoder_forward<T>(g, layout, config, ex.source, mode, nullptr);
  switch (role) {
    case Role::kClassifier: {
      if (ex.labels.size() != 1) throw ShapeError("classifier example needs one label");
      auto cls = g.select_rows(hidden, {0});
      auto logits = g.linear(cls, layout.head_w, layout.head_b);
      return g.cross_entropy(logits, ex.labels, T(1));
    }
    case Role::kTagger: {
      if (ex.labels.size() != ex.source.size() || ex.labels2.size() != ex.source.size()) {
        throw ShapeError("tagger labels must align with the source");
      }
      auto count = [](const std::vector<int>& v) {
        std::size_t n = 0;
        for (int x : v) n += x >= 0 ? 1 : 0;
        return n;
      };
      const std::size_t n1 = count(ex.labels);
      const std::size_t n2 = count(ex.labels2);
      auto ins = g.cross_entropy(g.linear(hidden, layout.head_w, layout.head_b), ex.labels,
                                 n1 ? T(1) / static_cast<T>(n1) : T(0));
      auto ops = g.cross_entropy(g.linear(hidden, layout.head2_w, layout.head2_b), ex.labels2,
                                 n2 ? T(1) / static_cast<T>(n2) : T(0));
      return g.add(ins, ops);
    }
    case Role::kInfiller:
    case Role::kGenerator:
    case Role::kSeq2Seq: {
      std::vector<TokenId> dec_in;
      dec_in.reserve(ex.target.size() + 1);
      dec_in.push_back(special::kBos);
      dec_in.insert(dec_in.end(), ex.target.begin(), ex.target.end());
      std::vector<int> dec_out(ex.target.begin(), ex.target.end());
      dec_out.push_back(special::kEos);
      auto h = decoder_forward<T>(g, layout, config, hidden, dec_in, mode);
      auto logits = g.linear(h, layout.head_w, layout.head_b);
      return g.cross_entropy(logits, dec_out, T(1) / static_cast<T>(dec_out.size()));
    }
  }
  throw Error("unknown role");
}

#define LEWIS_INSTANTIATE(T)                                                                         \
  template Graph<T>::Var encoder_forward<T>(Graph<T>&, const Layout&, const ModelConfig&,          \
                                            std::span<const TokenId>, ForwardMode<T>&,             \
                                            AttentionMaps<T>*);                                      \
  template Graph<T>::Var decoder_forward<T>(Graph<T>&, const Layout&, const ModelConfig&,          \
                                            Graph<T>::Var, std::span<const TokenId>,               \
                                            ForwardMode<T>&);                                        \
  template Graph<T>::Var example_loss<T>(Graph<T>&, Role, const Layout&, const ModelConfig&,       \
                                         const TrainExample&, ForwardMode<T>&);

LEWIS_INSTANTIATE(float)
LEWIS_INSTANTIATE(double)

#undef LEWIS_INSTANTIATE

}  // namespace lewis::nn
