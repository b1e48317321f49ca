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

#ifndef LEWIS_NN_GRAPH_HPP_
#define LEWIS_NN_GRAPH_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lewis/corpus.hpp"
#include "lewis/errors.hpp"
#include "lewis/util.hpp"

namespace lewis::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParamShape {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

// Parameter tensors in a fixed order; also used for their gradients.
template <typename T>
struct ParamSet {
  std::vector<Matrix<T>> values;

  static ParamSet zeros(const std::vector<ParamShape>& shapes) {
    ParamSet p;
    p.values.reserve(shapes.size());
    for (const auto& s : shapes) p.values.push_back(Matrix<T>::Zero(s.rows, s.cols));
    return p;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values) n += static_cast<std::size_t>(v.size());
    return n;
  }

  // Flat view across tensors, in declaration order.
  T& flat(std::size_t k) {
    for (auto& v : values) {
      const auto sz = static_cast<std::size_t>(v.size());
      if (k < sz) return v.data()[k];
      k -= sz;
    }
    throw Error("flat parameter index out of range");
  }

  void set_zero() {
    for (auto& v : values) v.setZero();
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    out.values.reserve(values.size());
    for (const auto& v : values) out.values.push_back(v.template cast<U>());
    return out;
  }
};

// Reverse-mode tape. Every op computes its value eagerly and, when a
// gradient sink is attached, records a closure applying its analytic
// vector-Jacobian product. Parameter gradients accumulate into the sink.
template <typename T>
class Graph {
 public:
  using Mat = Matrix<T>;
  struct Var {
    std::size_t id = 0;
  };

  Graph(const ParamSet<T>& params, ParamSet<T>* grads) : params_(params), grads_(grads) {
    nodes_.reserve(256);
  }

  bool recording() const { return grads_ != nullptr; }
  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& param(std::size_t index) const { return params_.values[index]; }

  Var input(Mat m) { return push(std::move(m), nullptr); }

  // Token embedding rows plus learned positions 0..n-1.
  Var embed(std::span<const TokenId> ids, std::size_t token_table, std::size_t position_table) {
    const Mat& tok = param(token_table);
    const Mat& pos = param(position_table);
    const auto n = static_cast<Eigen::Index>(ids.size());
    if (n > pos.rows()) {
      throw LengthError("sequence of length " + std::to_string(n) + " exceeds max_len " +
                        std::to_string(pos.rows()));
    }
    Mat out(n, tok.cols());
    for (Eigen::Index r = 0; r < n; ++r) {
      const TokenId id = ids[static_cast<std::size_t>(r)];
      if (id < 0 || id >= tok.rows()) throw Error("token id outside embedding table");
      out.row(r) = tok.row(id) + pos.row(r);
    }
    Back back;
    if (recording()) {
      std::vector<TokenId> saved(ids.begin(), ids.end());
      back = [saved = std::move(saved), token_table, position_table](Graph& g, const Mat& dy) {
        Mat& dtok = g.grads_->values[token_table];
        Mat& dpos = g.grads_->values[position_table];
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
          dtok.row(saved[static_cast<std::size_t>(r)]) += dy.row(r);
          dpos.row(r) += dy.row(r);
        }
      };
    }
    return push(std::move(out), std::move(back));
  }

  // x W + b with W stored (in, out).
  Var linear(Var x, std::size_t weight, std::size_t bias) {
    const Mat& w = param(weight);
    const Mat& b = param(bias);
    Mat out = value(x) * w;
    out.rowwise() += b.row(0);
    Back back;
    if (recording()) {
      back = [xi = x.id, weight, bias](Graph& g, const Mat& dy) {
        const Mat& xv = g.nodes_[xi].value;
        g.grads_->values[weight].noalias() += xv.transpose() * dy;
        g.grads_->values[bias].row(0) += dy.colwise().sum();
        g.accumulate(xi, dy * g.param(weight).transpose());
      };
    }
    return push(std::move(out), std::move(back));
  }

  // x * W, no bias.
  Var matmul(Var x, std::size_t weight) {
    Mat out = value(x) * param(weight);
    Back back;
    if (recording()) {
      back = [xi = x.id, weight](Graph& g, const Mat& dy) {
        const Mat& xv = g.nodes_[xi].value;
        g.grads_->values[weight].noalias() += xv.transpose() * dy;
        g.accumulate(xi, dy * g.param(weight).transpose());
      };
    }
    return push(std::move(out), std::move(back));
  }

  Var layer_norm(Var x, std::size_t gain, std::size_t bias) {
    constexpr T kEps = T(1e-5);
    const Mat& xv = value(x);
    const auto cols = xv.cols();
    Mat xhat(xv.rows(), cols);
    Eigen::Matrix<T, Eigen::Dynamic, 1> rstd(xv.rows());
    for (Eigen::Index r = 0; r < xv.rows(); ++r) {
      const T mean = xv.row(r).mean();
      const T var = (xv.row(r).array() - mean).square().mean();
      rstd(r) = T(1) / std::sqrt(var + kEps);
      xhat.row(r) = (xv.row(r).array() - mean) * rstd(r);
    }
    Mat out = (xhat.array().rowwise() * param(gain).row(0).array()).matrix();
    out.rowwise() += param(bias).row(0);
    Back back;
    if (recording()) {
      back = [xi = x.id, gain, bias, xhat, rstd](Graph& g, const Mat& dy) {
        g.grads_->values[gain].row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
        g.grads_->values[bias].row(0) += dy.colwise().sum();
        const Mat dxhat = (dy.array().rowwise() * g.param(gain).row(0).array()).matrix();
        Mat dx(dy.rows(), dy.cols());
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
          const T m1 = dxhat.row(r).mean();
          const T m2 = (dxhat.row(r).array() * xhat.row(r).array()).mean();
          dx.row(r) = rstd(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
        }
        g.accumulate(xi, dx);
      };
    }
    return push(std::move(out), std::move(back));
  }

  // tanh-approximated GELU.
  Var gelu(Var x) {
    const Mat& xv = value(x);
    Mat out = xv.unaryExpr([](T v) { return gelu_value(v); });
    Back back;
    if (recording()) {
      back = [xi = x.id](Graph& g, const Mat& dy) {
        const Mat& xv = g.nodes_[xi].value;
        Mat dx = dy.cwiseProduct(xv.unaryExpr([](T v) { return gelu_slope(v); }));
        g.accumulate(xi, dx);
      };
    }
    return push(std::move(out), std::move(back));
  }

  Var add(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
      throw ShapeError("add: shape mismatch");
    }
    Mat out = value(a) + value(b);
    Back back;
    if (recording()) {
      back = [ai = a.id, bi = b.id](Graph& g, const Mat& dy) {
        g.accumulate(ai, dy);
        g.accumulate(bi, dy);
      };
    }
    return push(std::move(out), std::move(back));
  }

  Var scale(Var x, T factor) {
    Mat out = value(x) * factor;
    Back back;
    if (recording()) {
      back = [xi = x.id, factor](Graph& g, const Mat& dy) { g.accumulate(xi, dy * factor); };
    }
    return push(std::move(out), std::move(back));
  }

  // Inverted dropout; identity when rate is zero.
  Var dropout(Var x, T rate, Rng* rng) {
    if (rate <= T(0) || rng == nullptr) return x;
    const Mat& xv = value(x);
    Mat mask(xv.rows(), xv.cols());
    const T keep = T(1) - rate;
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      mask.data()[i] = rng->uniform() < static_cast<double>(keep) ? T(1) / keep : T(0);
    }
    Mat out = xv.cwiseProduct(mask);
    Back back;
    if (recording()) {
      back = [xi = x.id, mask = std::move(mask)](Graph& g, const Mat& dy) {
        g.accumulate(xi, dy.cwiseProduct(mask));
      };
    }
    return push(std::move(out), std::move(back));
  }

  // Multi-head scaled dot-product attention over already-projected q, k, v.
  // With `causal`, query i sees keys 0..i. Per-head probabilities
  // (query x key) are copied to *probs when given.
  Var attention(Var q, Var k, Var v, int heads, bool causal, std::vector<Mat>* probs) {
    const Mat& qv = value(q);
    const Mat& kv = value(k);
    const Mat& vv = value(v);
    const Eigen::Index d = qv.cols();
    const Eigen::Index dh = d / heads;
    const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
    std::vector<Mat> p(static_cast<std::size_t>(heads));
    Mat out(qv.rows(), d);
    for (int h = 0; h < heads; ++h) {
      const Eigen::Index c0 = h * dh;
      Mat s = (qv.middleCols(c0, dh) * kv.middleCols(c0, dh).transpose()) * inv_sqrt;
      if (causal) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
          for (Eigen::Index j = i + 1; j < s.cols(); ++j) s(i, j) = -std::numeric_limits<T>::infinity();
        }
      }
      softmax_rows(s);
      out.middleCols(c0, dh).noalias() = s * vv.middleCols(c0, dh);
      p[static_cast<std::size_t>(h)] = std::move(s);
    }
    if (probs != nullptr) *probs = p;
    Back back;
    if (recording()) {
      back = [qi = q.id, ki = k.id, vi = v.id, heads, inv_sqrt, p = std::move(p)](Graph& g,
                                                                             const Mat& dy) {
        const Mat& qv = g.nodes_[qi].value;
        const Mat& kv = g.nodes_[ki].value;
        const Mat& vv = g.nodes_[vi].value;
        const Eigen::Index dh = qv.cols() / heads;
        Mat dq = Mat::Zero(qv.rows(), qv.cols());
        Mat dk = Mat::Zero(kv.rows(), kv.cols());
        Mat dv = Mat::Zero(vv.rows(), vv.cols());
        for (int h = 0; h < heads; ++h) {
          const Eigen::Index c0 = h * dh;
          const Mat& ph = p[static_cast<std::size_t>(h)];
          const auto dyh = dy.middleCols(c0, dh);
          dv.middleCols(c0, dh).noalias() += ph.transpose() * dyh;
          const Mat dp = dyh * vv.middleCols(c0, dh).transpose();
          const auto row_dot = (dp.array() * ph.array()).rowwise().sum();
          const Mat ds = (ph.array() * (dp.array().colwise() - row_dot)).matrix() * inv_sqrt;
          dq.middleCols(c0, dh).noalias() += ds * kv.middleCols(c0, dh);
          dk.middleCols(c0, dh).noalias() += ds.transpose() * qv.middleCols(c0, dh);
        }
        g.accumulate(qi, dq);
        g.accumulate(ki, dk);
        g.accumulate(vi, dv);
      };
    }
    return push(std::move(out), std::move(back));
  }

  Var select_rows(Var x, std::vector<Eigen::Index> rows) {
    const Mat& xv = value(x);
    Mat out(static_cast<Eigen::Index>(rows.size()), xv.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = xv.row(rows[r]);
    Back back;
    if (recording()) {
      back = [xi = x.id, rows = std::move(rows), n = xv.rows()](Graph& g, const Mat& dy) {
        Mat dx = Mat::Zero(n, dy.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) dx.row(rows[r]) += dy.row(static_cast<Eigen::Index>(r));
        g.accumulate(xi, dx);
      };
    }
    return push(std::move(out), std::move(back));
  }

  // weight * sum of token cross-entropies over rows whose target is >= 0.
  // Produces a 1x1 node.
  Var cross_entropy(Var logits, std::span<const int> targets, T weight) {
    const Mat& lv = value(logits);
    if (static_cast<Eigen::Index>(targets.size()) != lv.rows()) throw ShapeError("cross_entropy: target count");
    Mat probs = lv;
    softmax_rows(probs);
    T loss = 0;
    for (Eigen::Index r = 0; r < lv.rows(); ++r) {
      const int t = targets[static_cast<std::size_t>(r)];
      if (t < 0) continue;
      if (t >= lv.cols()) throw ShapeError("cross_entropy: target out of range");
      loss -= std::log(std::max(probs(r, t), std::numeric_limits<T>::min()));
    }
    Mat out(1, 1);
    out(0, 0) = loss * weight;
    Back back;
    if (recording()) {
      std::vector<int> saved(targets.begin(), targets.end());
      back = [li = logits.id, saved = std::move(saved), weight, probs = std::move(probs)](
                 Graph& g, const Mat& dy) {
        Mat d = probs;
        for (Eigen::Index r = 0; r < d.rows(); ++r) {
          const int t = saved[static_cast<std::size_t>(r)];
          if (t < 0) {
            d.row(r).setZero();
          } else {
            d(r, t) -= T(1);
          }
        }
        g.accumulate(li, d * (weight * dy(0, 0)));
      };
    }
    return push(std::move(out), std::move(back));
  }

  // Seeds d(root)/d(root) = seed and propagates to inputs and parameters.
  void backward(Var root, T seed = T(1)) {
    if (!recording()) throw Error("backward on a graph without a gradient sink");
    nodes_[root.id].grad = Mat::Constant(nodes_[root.id].value.rows(), nodes_[root.id].value.cols(), seed);
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0 || !n.back) continue;
      n.back(*this, n.grad);
    }
  }

  static void softmax_rows(Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const T mx = m.row(r).maxCoeff();
      m.row(r) = (m.row(r).array() - mx).exp();
      m.row(r) /= m.row(r).sum();
    }
  }

  static T gelu_value(T v) {
    constexpr T c = T(0.7978845608028654);  // sqrt(2 / pi)
    return T(0.5) * v * (T(1) + std::tanh(c * (v + T(0.044715) * v * v * v)));
  }

  static T gelu_slope(T v) {
    constexpr T c = T(0.7978845608028654);
    const T t = std::tanh(c * (v + T(0.044715) * v * v * v));
    return T(0.5) * (T(1) + t) +
           T(0.5) * v * (T(1) - t * t) * c * (T(1) + T(3) * T(0.044715) * v * v);
  }

 private:
  using Back = std::function<void(Graph&, const Mat&)>;

  struct Node {
    Mat value;
    Mat grad;
    Back back;
  };

  Var push(Mat value, Back back) {
    nodes_.push_back(Node{std::move(value), Mat(), std::move(back)});
    return Var{nodes_.size() - 1};
  }

  void accumulate(std::size_t id, const Mat& g) {
    Mat& dst = nodes_[id].grad;
    if (dst.size() == 0) {
      dst = g;
    } else {
      dst += g;
    }
  }

  const ParamSet<T>& params_;
  ParamSet<T>* grads_;
  std::vector<Node> nodes_;
};

}  // namespace lewis::nn

#endif  // LEWIS_NN_GRAPH_HPP_
