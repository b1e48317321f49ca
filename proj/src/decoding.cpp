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

#include "lewis/nn/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lewis::nn {
namespace {

struct Live {
  Hypothesis hyp;
  IncrementalDecoder::State state;
  Eigen::VectorXf next;  // log-probs of the next token
};

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

}  // namespace

std::vector<Hypothesis> beam_search(const IncrementalDecoder& decoder, std::size_t beam,
                                    std::size_t max_steps, const TokenMask& mask) {
  beam = std::max<std::size_t>(1, beam);
  std::vector<Live> live(1);
  live[0].state = decoder.start();
  live[0].next = decoder.step(live[0].state, special::kBos);
  std::vector<Hypothesis> finished;

  for (std::size_t t = 0; t < max_steps && !live.empty() && finished.size() < beam; ++t) {
    struct Candidate {
      std::size_t parent;
      TokenId token;
      double score;
    };
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      Eigen::VectorXf masked = live[h].next;
      if (mask) mask(live[h].hyp.tokens, masked);
      std::vector<TokenId> ids;
      for (Eigen::Index k = 0; k < masked.size(); ++k) {
        if (masked(k) > kNegInf) ids.push_back(static_cast<TokenId>(k));
      }
      const std::size_t take = std::min(beam, ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take), ids.end(),
                        [&](TokenId a, TokenId b) {
                          if (masked(a) != masked(b)) return masked(a) > masked(b);
                          return a < b;
                        });
      for (std::size_t i = 0; i < take; ++i) {
        candidates.push_back({h, ids[i], live[h].hyp.score + static_cast<double>(live[h].next(ids[i]))});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<Live> next_live;
    for (const auto& c : candidates) {
      if (next_live.size() + finished.size() >= beam) break;
      const Live& parent = live[c.parent];
      if (c.token == special::kEos) {
        Hypothesis done = parent.hyp;
        done.score = c.score;
        done.finished = true;
        finished.push_back(std::move(done));
        continue;
      }
      Live child;
      child.hyp = parent.hyp;
      child.hyp.tokens.push_back(c.token);
      child.hyp.score = c.score;
      child.state = parent.state;
      if (child.state.length >= decoder.max_len()) continue;
      child.next = decoder.step(child.state, c.token);
      next_live.push_back(std::move(child));
    }
    live = std::move(next_live);
  }
  std::stable_sort(finished.begin(), finished.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  std::vector<Hypothesis> out = std::move(finished);
  std::stable_sort(live.begin(), live.end(),
                   [](const Live& a, const Live& b) { return a.hyp.score > b.hyp.score; });
  for (auto& l : live) {
    if (out.size() >= beam) break;
    out.push_back(std::move(l.hyp));
  }
  return out;
}

Hypothesis sample(const IncrementalDecoder& decoder, std::size_t max_steps, double temperature,
                  Rng& rng, const TokenMask& mask) {
  Hypothesis hyp;
  auto state = decoder.start();
  Eigen::VectorXf next = decoder.step(state, special::kBos);
  for (std::size_t t = 0; t < max_steps; ++t) {
    Eigen::VectorXf masked = next;
    if (mask) mask(hyp.tokens, masked);
    TokenId choice = -1;
    if (temperature <= 0.0) {
      float best = kNegInf;
      for (Eigen::Index k = 0; k < masked.size(); ++k) {
        if (masked(k) > best) {
          best = masked(k);
          choice = static_cast<TokenId>(k);
        }
      }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < masked.size(); ++k) mx = std::max(mx, static_cast<double>(masked(k)));
      if (std::isfinite(mx)) {
        std::vector<double> weights(static_cast<std::size_t>(masked.size()));
        double total = 0.0;
        for (Eigen::Index k = 0; k < masked.size(); ++k) {
          const double w = masked(k) > kNegInf ? std::exp((static_cast<double>(masked(k)) - mx) / temperature) : 0.0;
          weights[static_cast<std::size_t>(k)] = w;
          total += w;
        }
        double u = rng.uniform() * total;
        for (std::size_t k = 0; k < weights.size(); ++k) {
          if (weights[k] <= 0.0) continue;
          choice = static_cast<TokenId>(k);
          u -= weights[k];
          if (u < 0.0) break;
        }
      }
    }
    if (choice < 0) break;  // nothing allowed
    hyp.score += static_cast<double>(next(choice));
    if (choice == special::kEos) {
      hyp.finished = true;
      return hyp;
    }
    hyp.tokens.push_back(choice);
    if (state.length >= decoder.max_len()) break;
    next = decoder.step(state, choice);
  }
  return hyp;
}

}  // namespace lewis::nn
