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

#include "lewis/nn/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis::nn {
namespace {

using json = nlohmann::json;
using RowVec = Eigen::Matrix<float, 1, Eigen::Dynamic>;

constexpr char kMagic[8] = {'L', 'E', 'W', 'I', 'S', 'M', 'D', 'L'};

json config_to_json(const ModelConfig& c) {
  return json{{"layers", c.layers},       {"heads", c.heads},
              {"model_dim", c.model_dim}, {"ff_dim", c.ff_dim},
              {"decoder_layers", c.decoder_layers}, {"max_len", c.max_len},
              {"dropout", c.dropout},     {"vocab_size", c.vocab_size}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.layers = j.at("layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  c.ff_dim = j.at("ff_dim").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.vocab_size = j.at("vocab_size").get<int>();
  return c;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

RowVec layer_norm_row(const RowVec& x, const Matrix<float>& gain, const Matrix<float>& bias) {
  const float mean = x.mean();
  const float var = (x.array() - mean).square().mean();
  const float rstd = 1.0f / std::sqrt(var + 1e-5f);
  RowVec out = ((x.array() - mean) * rstd).matrix();
  return (out.array() * gain.row(0).array()).matrix() + bias.row(0);
}

RowVec affine(const RowVec& x, const Matrix<float>& w, const Matrix<float>& b) {
  RowVec out = x * w;
  out += b.row(0);
  return out;
}

// One query row against cached keys/values.
RowVec attend(const RowVec& q, const Matrix<float>& keys, const Matrix<float>& values, int heads) {
  const Eigen::Index d = q.cols();
  const Eigen::Index dh = d / heads;
  const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(dh));
  RowVec out(d);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index c0 = h * dh;
    RowVec s = (q.middleCols(c0, dh) * keys.middleCols(c0, dh).transpose()) * inv_sqrt;
    const float mx = s.maxCoeff();
    s = (s.array() - mx).exp();
    s /= s.sum();
    out.middleCols(c0, dh) = s * values.middleCols(c0, dh);
  }
  return out;
}

}  // namespace

ModelBundle create_model(Role role, ModelConfig config, const Vocabulary& vocab,
                         std::uint64_t seed, std::optional<Style> style) {
  config.vocab_size = static_cast<int>(vocab.size());
  ModelBundle m;
  m.role = role;
  m.config = config;
  m.style = style;
  m.vocab_hash = vocab.hash();
  m.layout = make_layout(role, config);
  m.params = ParamSet<float>::zeros(m.layout.shapes);
  Rng rng(derive_seed(seed, {0x1a17}));
  for (std::size_t i = 0; i < m.layout.shapes.size(); ++i) {
    const auto& s = m.layout.shapes[i];
    auto& v = m.params.values[i];
    const bool is_gain = s.name.size() >= 2 && s.name.ends_with(".g");
    if (s.rows == 1) {
      if (is_gain) v.setOnes();
      continue;
    }
    const double stddev = std::sqrt(2.0 / static_cast<double>(s.rows + s.cols));
    for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = static_cast<float>(rng.normal() * stddev);
  }
  return m;
}

std::string serialize_model(const ModelBundle& m) {
  json params = json::array();
  for (const auto& s : m.layout.shapes) params.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  json header{{"role", role_name(m.role)},
              {"style", m.style ? json(style_index(*m.style)) : json(nullptr)},
              {"vocab_hash", m.vocab_hash},
              {"config_hash", m.config_hash},
              {"config", config_to_json(m.config)},
              {"params", params}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + m.params.scalar_count() * 4);
  for (const auto& v : m.params.values) {
    for (Eigen::Index k = 0; k < v.size(); ++k) put_f32(out, v.data()[k]);
  }
  return out;
}

ModelBundle parse_model(std::string_view bytes, const Vocabulary& vocab) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a model file (bad magic)");
  }
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kModelFormatVersion) throw FormatError("unsupported model version " + std::to_string(version));
  const std::uint32_t header_len = get_u32(bytes, 12);
  if (bytes.size() < 16 + static_cast<std::size_t>(header_len)) throw FormatError("truncated model header");
  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
  ModelBundle m;
  try {
    m.role = role_from_name(header.at("role").get<std::string>());
    if (!header.at("style").is_null()) m.style = style_from_index(header.at("style").get<int>());
    m.vocab_hash = header.at("vocab_hash").get<std::string>();
    m.config_hash = header.at("config_hash").get<std::string>();
    m.config = config_from_json(header.at("config"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
  if (m.vocab_hash != vocab.hash()) {
    throw VocabMismatch("model vocabulary " + m.vocab_hash + " != loaded vocabulary " + vocab.hash());
  }
  try {
    m.layout = make_layout(m.role, m.config);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad model config: ") + e.what());
  }
  const auto& declared = header.at("params");
  if (!declared.is_array() || declared.size() != m.layout.shapes.size()) {
    throw FormatError("parameter table does not match config");
  }
  for (std::size_t i = 0; i < m.layout.shapes.size(); ++i) {
    const auto& s = m.layout.shapes[i];
    if (declared[i].at("name") != s.name || declared[i].at("rows") != s.rows ||
        declared[i].at("cols") != s.cols) {
      throw FormatError("parameter " + s.name + " does not match config");
    }
  }
  m.params = ParamSet<float>::zeros(m.layout.shapes);
  std::size_t at = 16 + header_len;
  if (bytes.size() - at != m.params.scalar_count() * 4) throw FormatError("truncated or oversized parameter data");
  for (auto& v : m.params.values) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      v.data()[k] = std::bit_cast<float>(get_u32(bytes, at));
      at += 4;
    }
  }
  return m;
}

void save_model(const ModelBundle& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

ModelBundle load_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  return parse_model(read_file(path), vocab);
}

Encoded encode(const ModelBundle& model, std::span<const TokenId> ids, bool record_attention) {
  Graph<float> g(model.params, nullptr);
  ForwardMode<float> mode;
  Encoded out;
  auto h = encoder_forward<float>(g, model.layout, model.config, ids, mode,
                                  record_attention ? &out.attention : nullptr);
  out.hidden = g.value(h);
  return out;
}

Matrix<float> apply_head(const ModelBundle& model, const Matrix<float>& rows, int which) {
  const auto& w = model.params.values[which == 0 ? model.layout.head_w : model.layout.head2_w];
  const auto& b = model.params.values[which == 0 ? model.layout.head_b : model.layout.head2_b];
  Matrix<float> out = rows * w;
  out.rowwise() += b.row(0);
  return out;
}

Matrix<float> softmax(const Matrix<float>& logits) {
  Matrix<float> p = logits;
  Graph<float>::softmax_rows(p);
  return p;
}

IncrementalDecoder::IncrementalDecoder(const ModelBundle& model, const Matrix<float>& memory)
    : model_(model) {
  if (!has_decoder(model.role)) throw Error("model role has no decoder");
  const auto& P = model.params.values;
  for (const auto& layer : model.layout.decoder) {
    Matrix<float> k = memory * P[layer.cross.wk];
    Matrix<float> v = memory * P[layer.cross.wv];
    v.rowwise() += P[layer.cross.bv].row(0);
    cross_keys_.push_back(std::move(k));
    cross_values_.push_back(std::move(v));
  }
}

IncrementalDecoder::State IncrementalDecoder::start() const {
  State s;
  const auto layers = model_.layout.decoder.size();
  s.keys.assign(layers, Matrix<float>(0, model_.config.model_dim));
  s.values.assign(layers, Matrix<float>(0, model_.config.model_dim));
  return s;
}

Eigen::VectorXf IncrementalDecoder::step(State& state, TokenId token) const {
  if (state.length >= model_.config.max_len) throw LengthError("decoder exceeded max_len");
  const auto& P = model_.params.values;
  const auto& L = model_.layout;
  const int heads = model_.config.heads;
  RowVec x = P[L.token_embedding].row(token) + P[L.decoder_positions].row(state.length);
  for (std::size_t l = 0; l < L.decoder.size(); ++l) {
    const auto& p = L.decoder[l];
    RowVec z = layer_norm_row(x, P[p.norm1_g], P[p.norm1_b]);
    const RowVec q = affine(z, P[p.self.wq], P[p.self.bq]);
    auto& keys = state.keys[l];
    auto& values = state.values[l];
    keys.conservativeResize(keys.rows() + 1, Eigen::NoChange);
    values.conservativeResize(values.rows() + 1, Eigen::NoChange);
    keys.row(keys.rows() - 1) = z * P[p.self.wk];
    values.row(values.rows() - 1) = affine(z, P[p.self.wv], P[p.self.bv]);
    x += affine(attend(q, keys, values, heads), P[p.self.wo], P[p.self.bo]);
    z = layer_norm_row(x, P[p.norm2_g], P[p.norm2_b]);
    const RowVec cq = affine(z, P[p.cross.wq], P[p.cross.bq]);
    x += affine(attend(cq, cross_keys_[l], cross_values_[l], heads), P[p.cross.wo], P[p.cross.bo]);
    z = layer_norm_row(x, P[p.norm3_g], P[p.norm3_b]);
    RowVec h = affine(z, P[p.ff.w1], P[p.ff.b1]);
    h = h.unaryExpr([](float v) { return Graph<float>::gelu_value(v); });
    x += affine(h, P[p.ff.w2], P[p.ff.b2]);
  }
  ++state.length;
  const RowVec out = layer_norm_row(x, P[L.decoder_norm_g], P[L.decoder_norm_b]);
  RowVec logits = affine(out, P[L.head_w], P[L.head_b]);
  const float mx = logits.maxCoeff();
  const float lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix().transpose();
}

Matrix<float> decoder_log_probs(const ModelBundle& model, std::span<const TokenId> source,
                                std::span<const TokenId> target) {
  Graph<float> g(model.params, nullptr);
  ForwardMode<float> mode;
  auto memory = encoder_forward<float>(g, model.layout, model.config, source, mode, nullptr);
  std::vector<TokenId> dec_in{special::kBos};
  dec_in.insert(dec_in.end(), target.begin(), target.end());
  auto h = decoder_forward<float>(g, model.layout, model.config, memory, dec_in, mode);
  Matrix<float> logits = g.value(g.linear(h, model.layout.head_w, model.layout.head_b));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const float mx = logits.row(r).maxCoeff();
    const float lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    logits.row(r).array() -= lse;
  }
  return logits;
}

}  // namespace lewis::nn
