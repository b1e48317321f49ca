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

#ifndef LEWIS_NN_TRAIN_HPP_
#define LEWIS_NN_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lewis/nn/model.hpp"
#include "lewis/nn/transformer.hpp"

namespace lewis::nn {

struct TrainConfig {
  std::size_t steps = 1000;
  std::size_t batch_size = 16;
  double lr = 3e-4;
  std::size_t warmup = 200;  // linear warmup, then constant
  double clip = 1.0;         // global gradient-norm clip; <= 0 disables
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int workers = 1;
};

// Examples are materialized on demand so noising can be resampled per
// step; `rng` is seeded from (seed, step, batch slot).
struct Dataset {
  std::size_t size = 0;
  std::function<TrainExample(std::size_t index, Rng& rng)> get;

  static Dataset of(std::vector<TrainExample> examples);
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean batch loss per step
};

// Adam over shuffled epochs. Deterministic for a fixed (seed, config, data,
// workers). Throws DivergenceError on a non-finite loss.
TrainResult train(ModelBundle& model, const Dataset& data, const TrainConfig& config,
                  std::uint64_t seed);

// Mean example loss with dropout off.
double evaluate_loss(const ModelBundle& model, std::span<const TrainExample> examples);

// scale * sum of example losses; gradients are accumulated into *grads when
// non-null. Dropout off.
template <typename T>
T loss_and_gradients(Role role, const Layout& layout, const ModelConfig& config,
                     const ParamSet<T>& params, std::span<const TrainExample> batch,
                     ParamSet<T>* grads, T scale = T(1));

// Max over `samples` random scalar parameters of
// |analytic - central difference| / (|analytic| + |fd| + 1e-12), in f64.
double gradient_check(const ModelBundle& model, std::span<const TrainExample> batch,
                      std::uint64_t seed, std::size_t samples = 100, double step = 1e-5);

}  // namespace lewis::nn

#endif  // LEWIS_NN_TRAIN_HPP_
