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

#ifndef LEWIS_EDITOR_HPP_
#define LEWIS_EDITOR_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "lewis/classifier.hpp"
#include "lewis/editops.hpp"
#include "lewis/infill.hpp"
#include "lewis/nn/model.hpp"
#include "lewis/nn/train.hpp"
#include "lewis/synthesis.hpp"

namespace lewis {

struct TaggerOutput {
  DualTags tags;
  std::vector<double> insert_probs;             // P(insert before), N+1 entries
  std::vector<std::array<double, 3>> op_probs;  // keep/delete/replace, N+1 entries
};

struct TagAccuracy {
  double insert = 0.0;
  double op = 0.0;
  double joint = 0.0;  // positions where both heads are right
};

class Tagger {
 public:
  Tagger(nn::ModelBundle model, const Vocabulary& vocab);

  // Throws LengthError when x does not fit the model.
  TaggerOutput tag(const TokenSeq& x, Direction direction) const;
  const nn::ModelBundle& model() const { return model_; }

 private:
  nn::ModelBundle model_;
  const Vocabulary* vocab_;
};

// Encoder input [marker] x [EOS]; labels are -1 where a head does not apply.
nn::TrainExample tagger_example(const EditRecord& record, const Vocabulary& vocab);
// Encoder input [marker] x [SEP] x_c; target is the fills joined by FSEP.
nn::TrainExample generator_example(const EditRecord& record, const Vocabulary& vocab);
// Encoder input [marker] x; target y.
nn::TrainExample seq2seq_example(const TokenSeq& source, const TokenSeq& target, Direction direction,
                                 const Vocabulary& vocab);

TagAccuracy tag_accuracy(const Tagger& tagger, const std::vector<EditRecord>& records);

struct TaggerTraining {
  nn::ModelBundle model;
  TagAccuracy heldout;  // measured on the training records when heldout is empty
  std::vector<double> loss_curve;
};

// Throws DegenerateData when every record is all-KEEP (or there are none).
TaggerTraining train_tagger(const std::vector<EditRecord>& records,
                            const std::vector<EditRecord>& heldout, const Vocabulary& vocab,
                            const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                            std::uint64_t seed);

struct ModelTraining {
  nn::ModelBundle model;
  std::vector<double> loss_curve;
};

// Throws DegenerateData when no record has a slot.
ModelTraining train_generator(const std::vector<EditRecord>& records, const Vocabulary& vocab,
                              const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                              std::uint64_t seed);

// Plain encoder-decoder on (x -> y); throws DegenerateData on no records.
ModelTraining train_seq2seq(const std::vector<EditRecord>& records, const Vocabulary& vocab,
                            const nn::ModelConfig& config, const nn::TrainConfig& train_config,
                            std::uint64_t seed);

struct EditorDecode {
  std::size_t beam = 5;
  bool rerank = true;
  std::size_t max_fill = 4;
  // Keeps beam hypotheses well formed (one non-empty segment per slot).
  bool structured = true;
};

struct Candidate {
  TokenSeq text;
  double model_score = 0.0;
  double cls_prob = 0.0;  // target-style probability; 0 without a judge
};

struct TransferResult {
  TokenSeq output;
  std::vector<Candidate> candidates;  // surviving, in beam order
  std::size_t chosen = 0;
  DualTags tags;
  bool fallback = false;
};

// Picks the highest target-style probability; ties go to the earlier
// (higher model score) candidate.
std::size_t rerank_choice(const std::vector<Candidate>& candidates);

class Editor {
 public:
  // `judge` may be null when reranking is off.
  Editor(const Tagger& tagger, nn::ModelBundle generator, const Vocabulary& vocab,
         const StyleJudge* judge);

  TransferResult transfer(const TokenSeq& x, Direction direction, const EditorDecode& decode) const;
  // Generator step only, for given tags.
  TransferResult fill(const TokenSeq& x, Direction direction, const DualTags& tags,
                      const EditorDecode& decode) const;

 private:
  const Tagger* tagger_;
  nn::ModelBundle generator_;
  const Vocabulary* vocab_;
  const StyleJudge* judge_;
};

class Seq2SeqTransfer {
 public:
  Seq2SeqTransfer(nn::ModelBundle model, const Vocabulary& vocab, const StyleJudge* judge);
  TransferResult transfer(const TokenSeq& x, Direction direction, const EditorDecode& decode) const;

 private:
  nn::ModelBundle model_;
  const Vocabulary* vocab_;
  const StyleJudge* judge_;
};

// Template of x filled by the target-style infiller; x itself when the
// template has no slot or cannot be filled.
TokenSeq lm_fill_baseline(const TokenSeq& x, const StyleJudge& judge, const Infiller& target_infiller,
                          const InfillDecode& decode, bool slot_cap);

}  // namespace lewis

#endif  // LEWIS_EDITOR_HPP_
