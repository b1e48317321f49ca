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

#include "lewis/editor.hpp"

#include <algorithm>
#include <limits>

#include "lewis/errors.hpp"
#include "lewis/nn/decoding.hpp"

namespace lewis {
namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

void check_model(const nn::ModelBundle& model, nn::Role role, const Vocabulary& vocab) {
  if (model.role != role) {
    throw ConfigError("model.role", "expected " + std::string(nn::role_name(role)) + ", got " +
                                        std::string(nn::role_name(model.role)));
  }
  if (model.vocab_hash != vocab.hash()) throw VocabMismatch("model vocabulary hash differs");
}

std::vector<TokenId> encode_tokens(const TokenSeq& tokens, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t == special::kMaskSurface) {
      ids.push_back(special::kMask);
    } else {
      ids.push_back(vocab.id(t));
    }
  }
  return ids;
}

std::vector<TokenId> generator_source(const TokenSeq& x, Direction direction,
                                      const MaskedTarget& masked, const Vocabulary& vocab) {
  std::vector<TokenId> ids{special::style_marker(direction.target)};
  const auto xs = encode_tokens(x, vocab);
  ids.insert(ids.end(), xs.begin(), xs.end());
  ids.push_back(special::kSep);
  const auto ms = encode_tokens(masked.tokens, vocab);
  ids.insert(ids.end(), ms.begin(), ms.end());
  return ids;
}

std::vector<TokenId> marked_source(const TokenSeq& x, Direction direction, const Vocabulary& vocab) {
  std::vector<TokenId> ids{special::style_marker(direction.target)};
  const auto xs = encode_tokens(x, vocab);
  ids.insert(ids.end(), xs.begin(), xs.end());
  return ids;
}

void check_fits(std::size_t length, const nn::ModelBundle& model) {
  if (length > static_cast<std::size_t>(model.config.max_len)) {
    throw LengthError("input of " + std::to_string(length) + " tokens exceeds max_len " +
                      std::to_string(model.config.max_len));
  }
}

// Fill-segment grammar for the generator: content tokens, FSEP between
// segments, EOS after the last one.
nn::TokenMask segment_mask(std::size_t slots, std::size_t max_fill, bool structured) {
  return [=](const std::vector<TokenId>& prefix, Eigen::VectorXf& lp) {
    std::size_t seps = 0;
    std::size_t current = 0;
    for (TokenId t : prefix) {
      if (t == special::kFillSep) {
        ++seps;
        current = 0;
      } else {
        ++current;
      }
    }
    const float sep = lp(special::kFillSep);
    const float eos = lp(special::kEos);
    if (structured && current >= max_fill) {
      lp.setConstant(kNegInf);
    } else {
      lp.head(special::kCount).setConstant(kNegInf);
    }
    if (!structured) {
      lp(special::kFillSep) = sep;
      lp(special::kEos) = eos;
      return;
    }
    if (current >= 1 && seps + 1 < slots) lp(special::kFillSep) = sep;
    if (current >= 1 && seps + 1 == slots) lp(special::kEos) = eos;
  };
}

void score_candidates(std::vector<Candidate>& candidates, const StyleJudge* judge, Style target) {
  if (judge == nullptr) return;
  for (auto& c : candidates) c.cls_prob = judge->classify(c.text).probs[style_index(target)];
}

std::size_t choose(const std::vector<Candidate>& candidates, const EditorDecode& decode,
                   const StyleJudge* judge) {
  if (decode.rerank && judge == nullptr) throw ConfigError("decode.rerank", "reranking needs a classifier");
  return decode.rerank ? rerank_choice(candidates) : 0;
}

TagAccuracy tally(std::size_t ins_hit, std::size_t op_hit, std::size_t joint_hit, std::size_t total) {
  if (total == 0) return {};
  const auto n = static_cast<double>(total);
  return {static_cast<double>(ins_hit) / n, static_cast<double>(op_hit) / n,
          static_cast<double>(joint_hit) / n};
}

}  // namespace

Tagger::Tagger(nn::ModelBundle model, const Vocabulary& vocab) : model_(std::move(model)), vocab_(&vocab) {
  check_model(model_, nn::Role::kTagger, vocab);
}

TaggerOutput Tagger::tag(const TokenSeq& x, Direction direction) const {
  auto ids = marked_source(x, direction, *vocab_);
  ids.push_back(special::kEos);
  check_fits(ids.size(), model_);
  const auto enc = nn::encode(model_, ids, false);
  const nn::Matrix<float> rows = enc.hidden.bottomRows(static_cast<Eigen::Index>(x.size() + 1));
  const auto ins = nn::softmax(nn::apply_head(model_, rows, 0));
  const auto ops = nn::softmax(nn::apply_head(model_, rows, 1));
  TaggerOutput out;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.insert_probs.push_back(ins(r, 1));
    out.tags.insert_before.push_back(ins(r, 1) > ins(r, 0));
    out.op_probs.push_back({ops(r, 0), ops(r, 1), ops(r, 2)});
    CoarseOp op = CoarseOp::kKeep;
    if (i < n) {
      Eigen::Index best = 0;
      ops.row(r).maxCoeff(&best);
      op = static_cast<CoarseOp>(best);
    }
    out.tags.ops.push_back(op);
  }
  return out;
}

nn::TrainExample tagger_example(const EditRecord& record, const Vocabulary& vocab) {
  nn::TrainExample ex;
  ex.source = marked_source(record.source, record.direction, vocab);
  ex.source.push_back(special::kEos);
  const std::size_t n = record.source.size();
  ex.labels.push_back(-1);
  ex.labels2.push_back(-1);
  for (std::size_t i = 0; i <= n; ++i) {
    ex.labels.push_back(record.tags.insert_before[i] ? 1 : 0);
    ex.labels2.push_back(i < n ? static_cast<int>(record.tags.ops[i]) : -1);
  }
  return ex;
}

nn::TrainExample generator_example(const EditRecord& record, const Vocabulary& vocab) {
  nn::TrainExample ex;
  ex.source = generator_source(record.source, record.direction, record.masked, vocab);
  for (std::size_t s = 0; s < record.fills.size(); ++s) {
    if (s > 0) ex.target.push_back(special::kFillSep);
    const auto ids = encode_tokens(record.fills[s], vocab);
    ex.target.insert(ex.target.end(), ids.begin(), ids.end());
  }
  return ex;
}

nn::TrainExample seq2seq_example(const TokenSeq& source, const TokenSeq& target, Direction direction,
                                 const Vocabulary& vocab) {
  nn::TrainExample ex;
  ex.source = marked_source(source, direction, vocab);
  ex.target = encode_tokens(target, vocab);
  return ex;
}

TagAccuracy tag_accuracy(const Tagger& tagger, const std::vector<EditRecord>& records) {
  std::size_t ins = 0, op = 0, joint = 0, total = 0;
  for (const auto& r : records) {
    const auto out = tagger.tag(r.source, r.direction).tags;
    for (std::size_t i = 0; i < out.ops.size(); ++i) {
      const bool a = out.insert_before[i] == r.tags.insert_before[i];
      const bool b = out.ops[i] == r.tags.ops[i];
      ins += a;
      op += b;
      joint += a && b;
      ++total;
    }
  }
  return tally(ins, op, joint, total);
}

TaggerTraining train_tagger(const std::vector<EditRecord>& records,
                            const std::vector<EditRecord>& heldout, const Vocabulary& vocab,
                            const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                            std::uint64_t seed) {
  if (std::all_of(records.begin(), records.end(), [](const EditRecord& r) { return is_all_keep(r.tags); })) {
    throw DegenerateData("tagger data has no edits");
  }
  std::vector<nn::TrainExample> examples;
  examples.reserve(records.size());
  for (const auto& r : records) examples.push_back(tagger_example(r, vocab));
  TaggerTraining out{nn::create_model(nn::Role::kTagger, config, vocab, derive_seed(seed, {1})), {}, {}};
  out.loss_curve = nn::train(out.model, nn::Dataset::of(std::move(examples)), train_config,
                             derive_seed(seed, {2}))
                       .loss_curve;
  const Tagger tagger(out.model, vocab);
  out.heldout = tag_accuracy(tagger, heldout.empty() ? records : heldout);
  return out;
}

ModelTraining train_generator(const std::vector<EditRecord>& records, const Vocabulary& vocab,
                              const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                              std::uint64_t seed) {
  if (std::none_of(records.begin(), records.end(), [](const EditRecord& r) { return r.masked.slot_count > 0; })) {
    throw DegenerateData("generator data has no slots");
  }
  std::vector<nn::TrainExample> examples;
  examples.reserve(records.size());
  for (const auto& r : records) examples.push_back(generator_example(r, vocab));
  ModelTraining out{nn::create_model(nn::Role::kGenerator, config, vocab, derive_seed(seed, {1})), {}};
  out.loss_curve = nn::train(out.model, nn::Dataset::of(std::move(examples)), train_config,
                             derive_seed(seed, {2}))
                       .loss_curve;
  return out;
}

ModelTraining train_seq2seq(const std::vector<EditRecord>& records, const Vocabulary& vocab,
                            const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                            std::uint64_t seed) {
  if (records.empty()) throw DegenerateData("seq2seq data is empty");
  std::vector<nn::TrainExample> examples;
  examples.reserve(records.size());
  for (const auto& r : records) examples.push_back(seq2seq_example(r.source, r.target, r.direction, vocab));
  ModelTraining out{nn::create_model(nn::Role::kSeq2Seq, config, vocab, derive_seed(seed, {1})), {}};
  out.loss_curve = nn::train(out.model, nn::Dataset::of(std::move(examples)), train_config,
                             derive_seed(seed, {2}))
                       .loss_curve;
  return out;
}

std::size_t rerank_choice(const std::vector<Candidate>& candidates) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.cls_prob > b.cls_prob || (c.cls_prob == b.cls_prob && c.model_score > b.model_score)) best = i;
  }
  return best;
}

Editor::Editor(const Tagger& tagger, nn::ModelBundle generator, const Vocabulary& vocab,
               const StyleJudge* judge)
    : tagger_(&tagger), generator_(std::move(generator)), vocab_(&vocab), judge_(judge) {
  check_model(generator_, nn::Role::kGenerator, vocab);
}

TransferResult Editor::transfer(const TokenSeq& x, Direction direction, const EditorDecode& decode) const {
  return fill(x, direction, tagger_->tag(x, direction).tags, decode);
}

TransferResult Editor::fill(const TokenSeq& x, Direction direction, const DualTags& tags,
                            const EditorDecode& decode) const {
  TransferResult result;
  result.tags = tags;
  const MaskedTarget masked = apply_coarse(x, tags);
  const std::size_t slots = masked.slot_count;
  if (slots == 0) {
    result.candidates.push_back({reconstruct(x, tags, {}), 0.0, 0.0});
  } else {
    const auto source = generator_source(x, direction, masked, *vocab_);
    check_fits(source.size(), generator_);
    const auto enc = nn::encode(generator_, source, false);
    const nn::IncrementalDecoder decoder(generator_, enc.hidden);
    const std::size_t steps = slots * (decode.max_fill + 1);
    const auto beams = nn::beam_search(decoder, decode.beam, steps,
                                       segment_mask(slots, decode.max_fill, decode.structured));
    for (const auto& h : beams) {
      if (!h.finished) continue;
      std::vector<TokenSeq> fills(1);
      for (TokenId t : h.tokens) {
        if (t == special::kFillSep) {
          fills.emplace_back();
        } else {
          fills.back().push_back(vocab_->surface(t));
        }
      }
      const bool well_formed = fills.size() == slots &&
                               std::none_of(fills.begin(), fills.end(), [](const TokenSeq& f) { return f.empty(); });
      if (!well_formed) continue;
      result.candidates.push_back({reconstruct(x, tags, fills), h.score, 0.0});
    }
  }
  if (result.candidates.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (tags.ops[i] != CoarseOp::kDelete) result.output.push_back(x[i]);
    }
    result.fallback = true;
    return result;
  }
  score_candidates(result.candidates, judge_, direction.target);
  result.chosen = choose(result.candidates, decode, judge_);
  result.output = result.candidates[result.chosen].text;
  return result;
}

Seq2SeqTransfer::Seq2SeqTransfer(nn::ModelBundle model, const Vocabulary& vocab, const StyleJudge* judge)
    : model_(std::move(model)), vocab_(&vocab), judge_(judge) {
  check_model(model_, nn::Role::kSeq2Seq, vocab);
}

TransferResult Seq2SeqTransfer::transfer(const TokenSeq& x, Direction direction,
                                         const EditorDecode& decode) const {
  const auto source = marked_source(x, direction, *vocab_);
  check_fits(source.size(), model_);
  const auto enc = nn::encode(model_, source, false);
  const nn::IncrementalDecoder decoder(model_, enc.hidden);
  const std::size_t steps =
      std::min<std::size_t>(static_cast<std::size_t>(model_.config.max_len) - 1, 2 * x.size() + 8);
  const nn::TokenMask mask = [](const std::vector<TokenId>&, Eigen::VectorXf& lp) {
    const float eos = lp(special::kEos);
    lp.head(special::kCount).setConstant(kNegInf);
    lp(special::kEos) = eos;
  };
  TransferResult result;
  for (const auto& h : nn::beam_search(decoder, decode.beam, steps, mask)) {
    if (!h.finished || h.tokens.empty()) continue;
    result.candidates.push_back({vocab_->decode(h.tokens), h.score, 0.0});
  }
  if (result.candidates.empty()) {
    result.output = x;
    result.fallback = true;
    return result;
  }
  score_candidates(result.candidates, judge_, direction.target);
  result.chosen = choose(result.candidates, decode, judge_);
  result.output = result.candidates[result.chosen].text;
  return result;
}

TokenSeq lm_fill_baseline(const TokenSeq& x, const StyleJudge& judge, const Infiller& target_infiller,
                          const InfillDecode& decode, bool slot_cap) {
  const Template tmpl = judge.extract_template(x, slot_cap);
  if (tmpl.slot_count == 0) return x;
  try {
    return target_infiller.fill(tmpl, decode);
  } catch (const ConstraintFailure&) {
    return x;
  }
}

}  // namespace lewis
