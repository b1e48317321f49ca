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

#include "lewis/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis::nn {

Dataset Dataset::of(std::vector<TrainExample> examples) {
  auto shared = std::make_shared<const std::vector<TrainExample>>(std::move(examples));
  Dataset d;
  d.size = shared->size();
  d.get = [shared](std::size_t i, Rng&) { return (*shared)[i]; };
  return d;
}

template <typename T>
T loss_and_gradients(Role role, const Layout& layout, const ModelConfig& config,
                     const ParamSet<T>& params, std::span<const TrainExample> batch,
                     ParamSet<T>* grads, T scale) {
  T total = 0;
  for (const auto& ex : batch) {
    Graph<T> g(params, grads);
    ForwardMode<T> mode;
    auto loss = example_loss<T>(g, role, layout, config, ex, mode);
    total += g.value(loss)(0, 0) * scale;
    if (grads != nullptr) g.backward(loss, scale);
  }
  return total;
}

template float loss_and_gradients<float>(Role, const Layout&, const ModelConfig&, const ParamSet<float>&,
                                         std::span<const TrainExample>, ParamSet<float>*, float);
template double loss_and_gradients<double>(Role, const Layout&, const ModelConfig&, const ParamSet<double>&,
                                           std::span<const TrainExample>, ParamSet<double>*, double);

TrainResult train(ModelBundle& model, const Dataset& data, const TrainConfig& config,
                  std::uint64_t seed) {
  if (data.size == 0) throw DegenerateData("training dataset is empty");
  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  const int workers = std::max(1, config.workers);

  ParamSet<float> m = ParamSet<float>::zeros(model.layout.shapes);
  ParamSet<float> v = ParamSet<float>::zeros(model.layout.shapes);
  std::vector<ParamSet<float>> grads(static_cast<std::size_t>(workers),
                                     ParamSet<float>::zeros(model.layout.shapes));
  std::vector<double> worker_loss(static_cast<std::size_t>(workers));

  std::vector<std::size_t> order(data.size);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(seed, {0x5eed}));
  shuffle_rng.shuffle(order);
  std::size_t cursor = 0;

  TrainResult result;
  result.loss_curve.reserve(config.steps);
  const float dropout = static_cast<float>(model.config.dropout);

  for (std::size_t step = 0; step < config.steps; ++step) {
    std::vector<std::size_t> picks(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      picks[b] = order[cursor++];
    }
    for (auto& gset : grads) gset.set_zero();
    std::fill(worker_loss.begin(), worker_loss.end(), 0.0);
    const float inv_batch = 1.0f / static_cast<float>(batch);

    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
      for (std::size_t b = w; b < batch; b += static_cast<std::size_t>(workers)) {
        Rng rng(derive_seed(seed, {step, b}));
        const TrainExample ex = data.get(picks[b], rng);
        Graph<float> g(model.params, &grads[w]);
        ForwardMode<float> mode{dropout, &rng};
        auto loss = example_loss<float>(g, model.role, model.layout, model.config, ex, mode);
        worker_loss[w] += static_cast<double>(g.value(loss)(0, 0)) * inv_batch;
        g.backward(loss, inv_batch);
      }
    });
    for (int w = 1; w < workers; ++w) {
      for (std::size_t i = 0; i < grads[0].values.size(); ++i) grads[0].values[i] += grads[static_cast<std::size_t>(w)].values[i];
    }
    const double loss = std::accumulate(worker_loss.begin(), worker_loss.end(), 0.0);
    if (!std::isfinite(loss)) {
      throw DivergenceError("non-finite loss at step " + std::to_string(step), step);
    }
    result.loss_curve.push_back(loss);

    auto& gsum = grads[0];
    if (config.clip > 0) {
      double sq = 0;
      for (const auto& gv : gsum.values) sq += static_cast<double>(gv.squaredNorm());
      const double norm = std::sqrt(sq);
      if (!std::isfinite(norm)) throw DivergenceError("non-finite gradient at step " + std::to_string(step), step);
      if (norm > config.clip) {
        const float f = static_cast<float>(config.clip / norm);
        for (auto& gv : gsum.values) gv *= f;
      }
    }
    const double warm = config.warmup == 0
                            ? 1.0
                            : std::min(1.0, static_cast<double>(step + 1) / static_cast<double>(config.warmup));
    const double lr = config.lr * warm;
    const double t = static_cast<double>(step + 1);
    const float c1 = static_cast<float>(1.0 - std::pow(config.beta1, t));
    const float c2 = static_cast<float>(1.0 - std::pow(config.beta2, t));
    const float b1 = static_cast<float>(config.beta1);
    const float b2 = static_cast<float>(config.beta2);
    const float eps = static_cast<float>(config.epsilon);
    const float lrf = static_cast<float>(lr);
    for (std::size_t i = 0; i < gsum.values.size(); ++i) {
      auto& p = model.params.values[i];
      auto& mi = m.values[i];
      auto& vi = v.values[i];
      const auto& gi = gsum.values[i];
      mi = b1 * mi + (1.0f - b1) * gi;
      vi = b2 * vi + (1.0f - b2) * gi.cwiseProduct(gi);
      p.array() -= lrf * (mi.array() / c1) / ((vi.array() / c2).sqrt() + eps);
    }
  }
  return result;
}

double evaluate_loss(const ModelBundle& model, std::span<const TrainExample> examples) {
  if (examples.empty()) return 0.0;
  const float total = loss_and_gradients<float>(model.role, model.layout, model.config, model.params,
                                                examples, nullptr, 1.0f);
  return static_cast<double>(total) / static_cast<double>(examples.size());
}

double gradient_check(const ModelBundle& model, std::span<const TrainExample> batch,
                      std::uint64_t seed, std::size_t samples, double step) {
  ParamSet<double> params = model.params.cast<double>();
  ParamSet<double> grads = ParamSet<double>::zeros(model.layout.shapes);
  loss_and_gradients<double>(model.role, model.layout, model.config, params, batch, &grads);
  Rng rng(seed);
  const std::size_t total = params.scalar_count();
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t k = rng.index(total);
    double& theta = params.flat(k);
    const double saved = theta;
    theta = saved + step;
    const double up = loss_and_gradients<double>(model.role, model.layout, model.config, params, batch, nullptr);
    theta = saved - step;
    const double down = loss_and_gradients<double>(model.role, model.layout, model.config, params, batch, nullptr);
    theta = saved;
    const double fd = (up - down) / (2.0 * step);
    const double analytic = grads.flat(k);
    const double rel = std::abs(analytic - fd) / (std::abs(analytic) + std::abs(fd) + 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace lewis::nn
