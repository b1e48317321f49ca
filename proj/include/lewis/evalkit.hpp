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

#ifndef LEWIS_EVALKIT_HPP_
#define LEWIS_EVALKIT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lewis/classifier.hpp"
#include "lewis/corpus.hpp"

namespace lewis {

enum class BleuSmoothing { kNone, kAddEpsilon };

struct BleuConfig {
  int max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::kNone;
  double epsilon = 0.1;  // added to zero numerators under kAddEpsilon
};

// Scores are on a 0..100 scale. Throws EmptyInput on empty sequences.
double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, const BleuConfig& config = {});
// Micro-averaged n-gram counts with one brevity penalty. Throws ShapeError
// on a length mismatch.
double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                   const BleuConfig& config = {});
double self_bleu(const std::vector<TokenSeq>& outputs, const std::vector<TokenSeq>& sources,
                 const BleuConfig& config = {});

// Percentage of outputs classified as `target`. Throws EmptyInput.
double transfer_accuracy(const std::vector<TokenSeq>& outputs, const std::vector<Style>& targets,
                         const StyleJudge& judge);

struct EvalRow {
  TokenSeq source;
  TokenSeq output;
  std::optional<TokenSeq> reference;
  Style target = Style::k1;
  double bleu = 0.0;   // sentence BLEU vs reference, when present
  double sbleu = 0.0;  // sentence BLEU vs source
  double cls_prob = 0.0;
  bool correct = false;
};

struct EvalReport {
  std::string system;
  double accuracy = 0.0;
  double sbleu = 0.0;
  std::optional<double> bleu;
  std::vector<EvalRow> rows;
};

struct EvalInput {
  TokenSeq source;
  TokenSeq output;
  Style target = Style::k1;
  std::optional<TokenSeq> reference;
};

// Corpus metrics use the given config; per-row BLEU uses add-epsilon
// smoothing so that short sentences stay informative.
EvalReport evaluate(const std::string& system, const std::vector<EvalInput>& inputs,
                    const StyleJudge& judge, const BleuConfig& config = {});

std::string report_json(const EvalReport& report, const std::string& config_hash);
std::string report_csv(const EvalReport& report);

}  // namespace lewis

#endif  // LEWIS_EVALKIT_HPP_
