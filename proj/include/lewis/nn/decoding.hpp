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

#ifndef LEWIS_NN_DECODING_HPP_
#define LEWIS_NN_DECODING_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "lewis/nn/model.hpp"

namespace lewis::nn {

struct Hypothesis {
  std::vector<TokenId> tokens;  // emitted tokens, EOS excluded
  double score = 0.0;           // summed log-probability, EOS included
  bool finished = false;
};

// Sets disallowed next tokens to -inf given the tokens emitted so far.
using TokenMask = std::function<void(const std::vector<TokenId>& prefix, Eigen::VectorXf& log_probs)>;

// Beam search from BOS. Returns up to `beam` hypotheses, finished ones
// first, each group by descending score (stable on ties).
std::vector<Hypothesis> beam_search(const IncrementalDecoder& decoder, std::size_t beam,
                                    std::size_t max_steps, const TokenMask& mask);

// Ancestral sampling at `temperature`; temperature <= 0 is greedy
// (lowest id on ties).
Hypothesis sample(const IncrementalDecoder& decoder, std::size_t max_steps, double temperature,
                  Rng& rng, const TokenMask& mask);

}  // namespace lewis::nn

#endif  // LEWIS_NN_DECODING_HPP_
