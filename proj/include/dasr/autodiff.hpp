// Copyright (c) 2026 dasr Authors. All Rights Reserved.
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

#ifndef DASR_AUTODIFF_HPP_
#define DASR_AUTODIFF_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dasr/tensor.hpp"

namespace dasr {

// Reverse-mode autodiff over dense tensors.
//
// The graph is a DAG of Node objects linked through `parents`; an op node
// carries a closure that routes its output gradient to its parents. Backward
// topologically orders the nodes reachable from the loss and sweeps them in
// reverse, visiting each node exactly once. Forward is deterministic given
// inputs; parameters are leaves shared across graphs and are only mutated
// between graph executions.

// NaN/Inf detection on every forward output. Off by default; enable in
// debug/verification runs.
inline std::atomic<bool>& FiniteCheckFlag() {
  static std::atomic<bool> flag{false};
  return flag;
}
inline void SetFiniteChecks(bool on) { FiniteCheckFlag().store(on); }
inline bool FiniteChecksOn() { return FiniteCheckFlag().load(); }

template <typename Real>
struct Node {
  TensorT<Real> value;
  TensorT<Real> grad;  // empty until first needed
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad, accumulates into parents' grads.
  std::function<void(Node&)> backward;

  void EnsureGrad() {
    if (grad.data.empty()) grad = TensorT<Real>::Zeros(value.shape);
  }
};

template <typename Real>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<Real>> n) : node_(std::move(n)) {}

  static Var Constant(TensorT<Real> t) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(t);
    n->op = "const";
    return Var(std::move(n));
  }

  static Var Leaf(TensorT<Real> t, bool requires_grad) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(t);
    n->requires_grad = requires_grad;
    n->op = "leaf";
    return Var(std::move(n));
  }

  bool defined() const { return node_ != nullptr; }
  const TensorT<Real>& value() const { return node_->value; }
  TensorT<Real>& mutable_value() { return node_->value; }
  const TensorT<Real>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  const std::shared_ptr<Node<Real>>& node() const { return node_; }

  const Shape& shape() const { return node_->value.shape; }
  int64_t rows() const { return node_->value.rows(); }
  int64_t cols() const { return node_->value.cols(); }

 private:
  std::shared_ptr<Node<Real>> node_;
};

namespace detail {

template <typename Real>
void CheckForwardFinite(const TensorT<Real>& t, const char* op) {
  if (FiniteChecksOn() && !AllFinite(t)) {
    throw NumericError(std::string("non-finite value in forward op '") + op + "'");
  }
}

template <typename Real>
Var<Real> MakeOp(const char* op, TensorT<Real> value,
                 std::vector<Var<Real>> parents,
                 std::function<void(Node<Real>&)> backward) {
  CheckForwardFinite(value, op);
  auto n = std::make_shared<Node<Real>>();
  n->value = std::move(value);
  n->op = op;
  bool needs = false;
  n->parents.reserve(parents.size());
  for (auto& p : parents) {
    needs = needs || p.node()->requires_grad;
    n->parents.push_back(p.node());
  }
  if (needs) {
    n->requires_grad = true;
    n->backward = std::move(backward);
  }
  return Var<Real>(std::move(n));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Primitive ops
// ---------------------------------------------------------------------------

template <typename Real>
Var<Real> MatMul(const Var<Real>& a, const Var<Real>& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.shape[1] != B.shape[0]) {
    throw ShapeError("matmul: incompatible shapes " + ShapeStr(A.shape) + " x " +
                     ShapeStr(B.shape));
  }
  int64_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
  TensorT<Real> out({m, n});
  for (int64_t i = 0; i < m; ++i) {
    const Real* arow = &A.data[static_cast<size_t>(i * k)];
    Real* orow = &out.data[static_cast<size_t>(i * n)];
    for (int64_t kk = 0; kk < k; ++kk) {
      Real av = arow[kk];
      if (av == Real(0)) continue;
      const Real* brow = &B.data[static_cast<size_t>(kk * n)];
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return detail::MakeOp<Real>(
      "matmul", std::move(out), {a, b}, [m, k, n](Node<Real>& node) {
        auto& pa = *node.parents[0];
        auto& pb = *node.parents[1];
        const auto& G = node.grad;
        if (pa.requires_grad) {
          pa.EnsureGrad();
          // dA = G * B^T
          for (int64_t i = 0; i < m; ++i) {
            const Real* grow = &G.data[static_cast<size_t>(i * n)];
            Real* darow = &pa.grad.data[static_cast<size_t>(i * k)];
            for (int64_t kk = 0; kk < k; ++kk) {
              const Real* brow = &pb.value.data[static_cast<size_t>(kk * n)];
              Real acc = 0;
              for (int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              darow[kk] += acc;
            }
          }
        }
        if (pb.requires_grad) {
          pb.EnsureGrad();
          // dB = A^T * G
          for (int64_t kk = 0; kk < k; ++kk) {
            Real* dbrow = &pb.grad.data[static_cast<size_t>(kk * n)];
            for (int64_t i = 0; i < m; ++i) {
              Real av = pa.value.data[static_cast<size_t>(i * k + kk)];
              if (av == Real(0)) continue;
              const Real* grow = &G.data[static_cast<size_t>(i * n)];
              for (int64_t j = 0; j < n; ++j) dbrow[j] += av * grow[j];
            }
          }
        }
      });
}

// Add with limited broadcasting: same shape, scalar b, or row vector b
// (shape [1,n] or [n]) broadcast over the rows of a.
template <typename Real>
Var<Real> Add(const Var<Real>& a, const Var<Real>& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  enum class Mode { kSame, kScalar, kRow };
  Mode mode;
  if (A.shape == B.shape) {
    mode = Mode::kSame;
  } else if (B.is_scalar()) {
    mode = Mode::kScalar;
  } else if (B.rank() <= 2 && B.rows() == 1 && B.cols() == A.cols() &&
             A.numel() % A.cols() == 0) {
    mode = Mode::kRow;
  } else {
    throw ShapeError("add: incompatible shapes " + ShapeStr(A.shape) + " + " +
                     ShapeStr(B.shape));
  }
  TensorT<Real> out = A;
  int64_t cols = A.cols();
  switch (mode) {
    case Mode::kSame:
      for (int64_t i = 0; i < A.numel(); ++i) out.data[i] += B.data[i];
      break;
    case Mode::kScalar:
      for (int64_t i = 0; i < A.numel(); ++i) out.data[i] += B.data[0];
      break;
    case Mode::kRow:
      for (int64_t i = 0; i < A.numel(); ++i) out.data[i] += B.data[i % cols];
      break;
  }
  return detail::MakeOp<Real>(
      "add", std::move(out), {a, b}, [mode, cols](Node<Real>& node) {
        auto& pa = *node.parents[0];
        auto& pb = *node.parents[1];
        const auto& G = node.grad;
        if (pa.requires_grad) {
          pa.EnsureGrad();
          for (int64_t i = 0; i < G.numel(); ++i) pa.grad.data[i] += G.data[i];
        }
        if (pb.requires_grad) {
          pb.EnsureGrad();
          switch (mode) {
            case Mode::kSame:
              for (int64_t i = 0; i < G.numel(); ++i) pb.grad.data[i] += G.data[i];
              break;
            case Mode::kScalar:
              for (int64_t i = 0; i < G.numel(); ++i) pb.grad.data[0] += G.data[i];
              break;
            case Mode::kRow:
              for (int64_t i = 0; i < G.numel(); ++i)
                pb.grad.data[i % cols] += G.data[i];
              break;
          }
        }
      });
}

// Elementwise product; either side may be scalar.
template <typename Real>
Var<Real> Mul(const Var<Real>& a, const Var<Real>& b) {
  const auto& A = a.value();
  const auto& B = b.value();
  bool a_scalar = A.is_scalar() && !B.is_scalar();
  bool b_scalar = B.is_scalar() && !A.is_scalar();
  if (!(A.shape == B.shape || a_scalar || b_scalar)) {
    throw ShapeError("mul: incompatible shapes " + ShapeStr(A.shape) + " * " +
                     ShapeStr(B.shape));
  }
  const auto& big = a_scalar ? B : A;
  TensorT<Real> out(big.shape);
  for (int64_t i = 0; i < big.numel(); ++i) {
    Real av = a_scalar ? A.data[0] : A.data[i];
    Real bv = b_scalar ? B.data[0] : B.data[i];
    out.data[i] = av * bv;
  }
  return detail::MakeOp<Real>(
      "mul", std::move(out), {a, b}, [a_scalar, b_scalar](Node<Real>& node) {
        auto& pa = *node.parents[0];
        auto& pb = *node.parents[1];
        const auto& G = node.grad;
        if (pa.requires_grad) {
          pa.EnsureGrad();
          for (int64_t i = 0; i < G.numel(); ++i) {
            Real bv = b_scalar ? pb.value.data[0] : pb.value.data[i];
            if (a_scalar)
              pa.grad.data[0] += G.data[i] * bv;
            else
              pa.grad.data[i] += G.data[i] * bv;
          }
        }
        if (pb.requires_grad) {
          pb.EnsureGrad();
          for (int64_t i = 0; i < G.numel(); ++i) {
            Real av = a_scalar ? pa.value.data[0] : pa.value.data[i];
            if (b_scalar)
              pb.grad.data[0] += G.data[i] * av;
            else
              pb.grad.data[i] += G.data[i] * av;
          }
        }
      });
}

// Multiply by a compile-time constant (no gradient into the constant).
template <typename Real>
Var<Real> Scale(const Var<Real>& a, Real c) {
  TensorT<Real> out = a.value();
  for (Real& v : out.data) v *= c;
  return detail::MakeOp<Real>("mul", std::move(out), {a}, [c](Node<Real>& node) {
    auto& pa = *node.parents[0];
    if (!pa.requires_grad) return;
    pa.EnsureGrad();
    for (int64_t i = 0; i < node.grad.numel(); ++i)
      pa.grad.data[i] += node.grad.data[i] * c;
  });
}

template <typename Real>
Var<Real> Sub(const Var<Real>& a, const Var<Real>& b) {
  return Add(a, Scale(b, Real(-1)));
}

namespace detail {
template <typename Real, typename FwdFn, typename DerivFn>
Var<Real> PointwiseOp(const char* name, const Var<Real>& a, FwdFn f, DerivFn dfdx) {
  TensorT<Real> out(a.value().shape);
  for (int64_t i = 0; i < a.value().numel(); ++i)
    out.data[i] = f(a.value().data[i]);
  return MakeOp<Real>(name, std::move(out), {a}, [dfdx](Node<Real>& node) {
    auto& pa = *node.parents[0];
    if (!pa.requires_grad) return;
    pa.EnsureGrad();
    for (int64_t i = 0; i < node.grad.numel(); ++i) {
      pa.grad.data[i] +=
          node.grad.data[i] * dfdx(pa.value.data[i], node.value.data[i]);
    }
  });
}
}  // namespace detail

template <typename Real>
Var<Real> Sigmoid(const Var<Real>& a) {
  return detail::PointwiseOp<Real>(
      "sigmoid", a,
      [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

template <typename Real>
Var<Real> Tanh(const Var<Real>& a) {
  return detail::PointwiseOp<Real>(
      "tanh", a, [](Real x) { return std::tanh(x); },
      [](Real, Real y) { return Real(1) - y * y; });
}

template <typename Real>
Var<Real> Swish(const Var<Real>& a) {
  return detail::PointwiseOp<Real>(
      "swish", a,
      [](Real x) { return x / (Real(1) + std::exp(-x)); },
      [](Real x, Real) {
        Real s = Real(1) / (Real(1) + std::exp(-x));
        return s * (Real(1) + x * (Real(1) - s));
      });
}

namespace detail {
// Rowwise softmax of the last axis, numerically stabilized.
template <typename Real>
TensorT<Real> SoftmaxValue(const TensorT<Real>& x) {
  int64_t cols = x.cols();
  int64_t rows = x.numel() / cols;
  TensorT<Real> out(x.shape);
  for (int64_t r = 0; r < rows; ++r) {
    const Real* in = &x.data[static_cast<size_t>(r * cols)];
    Real* o = &out.data[static_cast<size_t>(r * cols)];
    Real mx = in[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    Real sum = 0;
    for (int64_t j = 0; j < cols; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (int64_t j = 0; j < cols; ++j) o[j] /= sum;
  }
  return out;
}
}  // namespace detail

template <typename Real>
Var<Real> Softmax(const Var<Real>& a) {
  TensorT<Real> out = detail::SoftmaxValue(a.value());
  int64_t cols = a.value().cols();
  return detail::MakeOp<Real>(
      "softmax", std::move(out), {a}, [cols](Node<Real>& node) {
        auto& pa = *node.parents[0];
        if (!pa.requires_grad) return;
        pa.EnsureGrad();
        int64_t rows = node.value.numel() / cols;
        for (int64_t r = 0; r < rows; ++r) {
          const Real* y = &node.value.data[static_cast<size_t>(r * cols)];
          const Real* g = &node.grad.data[static_cast<size_t>(r * cols)];
          Real* dx = &pa.grad.data[static_cast<size_t>(r * cols)];
          Real dot = 0;
          for (int64_t j = 0; j < cols; ++j) dot += g[j] * y[j];
          for (int64_t j = 0; j < cols; ++j) dx[j] += y[j] * (g[j] - dot);
        }
      });
}

template <typename Real>
Var<Real> LogSoftmax(const Var<Real>& a) {
  const auto& x = a.value();
  int64_t cols = x.cols();
  int64_t rows = x.numel() / cols;
  TensorT<Real> out(x.shape);
  for (int64_t r = 0; r < rows; ++r) {
    const Real* in = &x.data[static_cast<size_t>(r * cols)];
    Real* o = &out.data[static_cast<size_t>(r * cols)];
    Real mx = in[0];
    for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
    Real sum = 0;
    for (int64_t j = 0; j < cols; ++j) sum += std::exp(in[j] - mx);
    Real lse = mx + std::log(sum);
    for (int64_t j = 0; j < cols; ++j) o[j] = in[j] - lse;
  }
  return detail::MakeOp<Real>(
      "log_softmax", std::move(out), {a}, [cols](Node<Real>& node) {
        auto& pa = *node.parents[0];
        if (!pa.requires_grad) return;
        pa.EnsureGrad();
        int64_t rows = node.value.numel() / cols;
        for (int64_t r = 0; r < rows; ++r) {
          const Real* y = &node.value.data[static_cast<size_t>(r * cols)];
          const Real* g = &node.grad.data[static_cast<size_t>(r * cols)];
          Real* dx = &pa.grad.data[static_cast<size_t>(r * cols)];
          Real gsum = 0;
          for (int64_t j = 0; j < cols; ++j) gsum += g[j];
          for (int64_t j = 0; j < cols; ++j)
            dx[j] += g[j] - std::exp(y[j]) * gsum;
        }
      });
}

// Layer normalization over the last axis. gamma/beta hold one value per
// normalized feature.
template <typename Real>
Var<Real> LayerNorm(const Var<Real>& x, const Var<Real>& gamma,
                    const Var<Real>& beta, Real eps = Real(1e-6)) {
  const auto& X = x.value();
  int64_t cols = X.cols();
  if (gamma.value().numel() != cols || beta.value().numel() != cols) {
    throw ShapeError("layer_norm: gain/bias size must match feature dim");
  }
  int64_t rows = X.numel() / cols;
  TensorT<Real> out(X.shape);
  for (int64_t r = 0; r < rows; ++r) {
    const Real* in = &X.data[static_cast<size_t>(r * cols)];
    Real* o = &out.data[static_cast<size_t>(r * cols)];
    Real mean = 0;
    for (int64_t j = 0; j < cols; ++j) mean += in[j];
    mean /= static_cast<Real>(cols);
    Real var = 0;
    for (int64_t j = 0; j < cols; ++j) {
      Real d = in[j] - mean;
      var += d * d;
    }
    var /= static_cast<Real>(cols);
    Real inv = Real(1) / std::sqrt(var + eps);
    for (int64_t j = 0; j < cols; ++j) {
      o[j] = (in[j] - mean) * inv * gamma.value().data[j] + beta.value().data[j];
    }
  }
  return detail::MakeOp<Real>(
      "layer_norm", std::move(out), {x, gamma, beta},
      [cols, eps](Node<Real>& node) {
        auto& px = *node.parents[0];
        auto& pg = *node.parents[1];
        auto& pb = *node.parents[2];
        int64_t rows = node.value.numel() / cols;
        if (px.requires_grad) px.EnsureGrad();
        if (pg.requires_grad) pg.EnsureGrad();
        if (pb.requires_grad) pb.EnsureGrad();
        std::vector<Real> xhat(static_cast<size_t>(cols));
        for (int64_t r = 0; r < rows; ++r) {
          const Real* in = &px.value.data[static_cast<size_t>(r * cols)];
          const Real* g = &node.grad.data[static_cast<size_t>(r * cols)];
          Real mean = 0;
          for (int64_t j = 0; j < cols; ++j) mean += in[j];
          mean /= static_cast<Real>(cols);
          Real var = 0;
          for (int64_t j = 0; j < cols; ++j) {
            Real d = in[j] - mean;
            var += d * d;
          }
          var /= static_cast<Real>(cols);
          Real inv = Real(1) / std::sqrt(var + eps);
          for (int64_t j = 0; j < cols; ++j) xhat[j] = (in[j] - mean) * inv;
          if (pb.requires_grad) {
            for (int64_t j = 0; j < cols; ++j) pb.grad.data[j] += g[j];
          }
          if (pg.requires_grad) {
            for (int64_t j = 0; j < cols; ++j) pg.grad.data[j] += g[j] * xhat[j];
          }
          if (px.requires_grad) {
            Real gmean = 0, gxmean = 0;
            for (int64_t j = 0; j < cols; ++j) {
              Real gg = g[j] * pg.value.data[j];
              gmean += gg;
              gxmean += gg * xhat[j];
            }
            gmean /= static_cast<Real>(cols);
            gxmean /= static_cast<Real>(cols);
            Real* dx = &px.grad.data[static_cast<size_t>(r * cols)];
            for (int64_t j = 0; j < cols; ++j) {
              Real gg = g[j] * pg.value.data[j];
              dx[j] += (gg - gmean - xhat[j] * gxmean) * inv;
            }
          }
        }
      });
}

// Depthwise 1-D convolution over time. x is [T,D], w is [K,D], bias [1,D]
// (or undefined Var for none). Output[t,d] = sum_j x[t-left+j, d] * w[j,d],
// zero padded outside [0,T). left + right must equal K - 1; left/right set
// the past/future reach, so causal layers use right = 0.
template <typename Real>
Var<Real> Conv1dDepthwise(const Var<Real>& x, const Var<Real>& w,
                          const Var<Real>& bias, int left, int right) {
  const auto& X = x.value();
  const auto& W = w.value();
  if (X.rank() != 2 || W.rank() != 2 || X.shape[1] != W.shape[1]) {
    throw ShapeError("conv1d: x " + ShapeStr(X.shape) + " vs kernel " +
                     ShapeStr(W.shape));
  }
  int64_t K = W.shape[0];
  if (K < 1) throw ShapeError("conv1d: kernel size must be >= 1");
  if (left < 0 || right < 0 || left + right != K - 1) {
    throw ShapeError("conv1d: left+right padding must equal kernel-1");
  }
  int64_t T = X.shape[0], D = X.shape[1];
  TensorT<Real> out({T, D});
  for (int64_t t = 0; t < T; ++t) {
    Real* o = &out.data[static_cast<size_t>(t * D)];
    for (int64_t j = 0; j < K; ++j) {
      int64_t src = t - left + j;
      if (src < 0 || src >= T) continue;
      const Real* in = &X.data[static_cast<size_t>(src * D)];
      const Real* wr = &W.data[static_cast<size_t>(j * D)];
      for (int64_t d = 0; d < D; ++d) o[d] += in[d] * wr[d];
    }
  }
  bool has_bias = bias.defined();
  if (has_bias) {
    if (bias.value().numel() != D) throw ShapeError("conv1d: bias size mismatch");
    for (int64_t t = 0; t < T; ++t)
      for (int64_t d = 0; d < D; ++d)
        out.data[static_cast<size_t>(t * D + d)] += bias.value().data[d];
  }
  std::vector<Var<Real>> parents = {x, w};
  if (has_bias) parents.push_back(bias);
  return detail::MakeOp<Real>(
      "conv1d", std::move(out), std::move(parents),
      [K, T, D, left, has_bias](Node<Real>& node) {
        auto& px = *node.parents[0];
        auto& pw = *node.parents[1];
        const auto& G = node.grad;
        if (px.requires_grad) {
          px.EnsureGrad();
          for (int64_t t = 0; t < T; ++t) {
            const Real* g = &G.data[static_cast<size_t>(t * D)];
            for (int64_t j = 0; j < K; ++j) {
              int64_t src = t - left + j;
              if (src < 0 || src >= T) continue;
              Real* dx = &px.grad.data[static_cast<size_t>(src * D)];
              const Real* wr = &pw.value.data[static_cast<size_t>(j * D)];
              for (int64_t d = 0; d < D; ++d) dx[d] += g[d] * wr[d];
            }
          }
        }
        if (pw.requires_grad) {
          pw.EnsureGrad();
          for (int64_t t = 0; t < T; ++t) {
            const Real* g = &G.data[static_cast<size_t>(t * D)];
            for (int64_t j = 0; j < K; ++j) {
              int64_t src = t - left + j;
              if (src < 0 || src >= T) continue;
              const Real* in = &px.value.data[static_cast<size_t>(src * D)];
              Real* dw = &pw.grad.data[static_cast<size_t>(j * D)];
              for (int64_t d = 0; d < D; ++d) dw[d] += g[d] * in[d];
            }
          }
        }
        if (has_bias && node.parents[2]->requires_grad) {
          auto& pb = *node.parents[2];
          pb.EnsureGrad();
          for (int64_t t = 0; t < T; ++t)
            for (int64_t d = 0; d < D; ++d)
              pb.grad.data[d] += G.data[static_cast<size_t>(t * D + d)];
        }
      });
}

// Concatenate 2-D tensors along axis 0 (rows) or 1 (columns).
template <typename Real>
Var<Real> Concat(const std::vector<Var<Real>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  int64_t rows = parts[0].value().shape[0];
  int64_t cols = parts[0].value().cols();
  int64_t total = 0;
  for (const auto& p : parts) {
    const auto& s = p.value().shape;
    if (p.value().rank() != 2) throw ShapeError("concat: inputs must be 2-D");
    if (axis == 0 && s[1] != cols) throw ShapeError("concat: column mismatch");
    if (axis == 1 && s[0] != rows) throw ShapeError("concat: row mismatch");
    total += s[axis];
  }
  Shape out_shape = axis == 0 ? Shape{total, cols} : Shape{rows, total};
  TensorT<Real> out(out_shape);
  if (axis == 0) {
    int64_t r0 = 0;
    for (const auto& p : parts) {
      const auto& v = p.value();
      std::copy(v.data.begin(), v.data.end(),
                out.data.begin() + static_cast<size_t>(r0 * cols));
      r0 += v.shape[0];
    }
  } else {
    int64_t c0 = 0;
    for (const auto& p : parts) {
      const auto& v = p.value();
      for (int64_t r = 0; r < rows; ++r) {
        std::copy(v.data.begin() + static_cast<size_t>(r * v.shape[1]),
                  v.data.begin() + static_cast<size_t>((r + 1) * v.shape[1]),
                  out.data.begin() + static_cast<size_t>(r * total + c0));
      }
      c0 += v.shape[1];
    }
  }
  return detail::MakeOp<Real>(
      "concat", std::move(out), parts, [axis, rows, total](Node<Real>& node) {
        int64_t off = 0;
        for (auto& pp : node.parents) {
          auto& p = *pp;
          int64_t extent = p.value.shape[axis];
          if (p.requires_grad) {
            p.EnsureGrad();
            if (axis == 0) {
              int64_t cols = p.value.shape[1];
              for (int64_t i = 0; i < extent * cols; ++i)
                p.grad.data[i] += node.grad.data[static_cast<size_t>(off * cols + i)];
            } else {
              for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < extent; ++c)
                  p.grad.data[static_cast<size_t>(r * extent + c)] +=
                      node.grad.data[static_cast<size_t>(r * total + off + c)];
            }
          }
          off += extent;
        }
      });
}

// Contiguous 2-D slice along axis 0 or 1.
template <typename Real>
Var<Real> SliceOp(const Var<Real>& x, int axis, int64_t start, int64_t len) {
  const auto& X = x.value();
  if (X.rank() != 2) throw ShapeError("slice: input must be 2-D");
  if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  if (start < 0 || len < 1 || start + len > X.shape[axis]) {
    throw ShapeError("slice: range out of bounds");
  }
  int64_t rows = X.shape[0], cols = X.shape[1];
  Shape out_shape = axis == 0 ? Shape{len, cols} : Shape{rows, len};
  TensorT<Real> out(out_shape);
  if (axis == 0) {
    std::copy(X.data.begin() + static_cast<size_t>(start * cols),
              X.data.begin() + static_cast<size_t>((start + len) * cols),
              out.data.begin());
  } else {
    for (int64_t r = 0; r < rows; ++r)
      std::copy(X.data.begin() + static_cast<size_t>(r * cols + start),
                X.data.begin() + static_cast<size_t>(r * cols + start + len),
                out.data.begin() + static_cast<size_t>(r * len));
  }
  return detail::MakeOp<Real>(
      "slice", std::move(out), {x}, [axis, start, len, rows, cols](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        if (axis == 0) {
          for (int64_t i = 0; i < len * cols; ++i)
            p.grad.data[static_cast<size_t>(start * cols + i)] += node.grad.data[i];
        } else {
          for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < len; ++c)
              p.grad.data[static_cast<size_t>(r * cols + start + c)] +=
                  node.grad.data[static_cast<size_t>(r * len + c)];
        }
      });
}

template <typename Real>
Var<Real> Transpose(const Var<Real>& x) {
  const auto& X = x.value();
  if (X.rank() != 2) throw ShapeError("transpose: input must be 2-D");
  int64_t rows = X.shape[0], cols = X.shape[1];
  TensorT<Real> out({cols, rows});
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c)
      out.data[static_cast<size_t>(c * rows + r)] = X.data[static_cast<size_t>(r * cols + c)];
  return detail::MakeOp<Real>(
      "transpose", std::move(out), {x}, [rows, cols](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t c = 0; c < cols; ++c)
            p.grad.data[static_cast<size_t>(r * cols + c)] +=
                node.grad.data[static_cast<size_t>(c * rows + r)];
      });
}

// Row gather: out[i,:] = table[ids[i],:]. Used for embedding lookup and for
// time restacking. Gradient scatter-adds into the gathered rows.
template <typename Real>
Var<Real> GatherRows(const Var<Real>& table, const std::vector<int64_t>& ids) {
  const auto& T = table.value();
  if (T.rank() != 2) throw ShapeError("embed: table must be 2-D");
  if (ids.empty()) throw ShapeError("embed: empty index list");
  int64_t cols = T.shape[1];
  for (int64_t id : ids) {
    if (id < 0 || id >= T.shape[0])
      throw ShapeError("embed: index " + std::to_string(id) + " out of range");
  }
  TensorT<Real> out({static_cast<int64_t>(ids.size()), cols});
  for (size_t i = 0; i < ids.size(); ++i)
    std::copy(T.data.begin() + static_cast<size_t>(ids[i] * cols),
              T.data.begin() + static_cast<size_t>((ids[i] + 1) * cols),
              out.data.begin() + i * static_cast<size_t>(cols));
  return detail::MakeOp<Real>(
      "embed", std::move(out), {table}, [ids, cols](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        for (size_t i = 0; i < ids.size(); ++i)
          for (int64_t c = 0; c < cols; ++c)
            p.grad.data[static_cast<size_t>(ids[i] * cols + c)] +=
                node.grad.data[i * static_cast<size_t>(cols) + static_cast<size_t>(c)];
      });
}

// Flat-index gather shaped into out_shape; used for relative-position
// bias matrices built from a small learned table.
template <typename Real>
Var<Real> GatherFlat(const Var<Real>& src, const std::vector<int64_t>& ids,
                     Shape out_shape) {
  const auto& S = src.value();
  if (static_cast<int64_t>(ids.size()) != NumelOf(out_shape))
    throw ShapeError("gather: index count does not match output shape");
  for (int64_t id : ids)
    if (id < 0 || id >= S.numel()) throw ShapeError("gather: index out of range");
  TensorT<Real> out(out_shape);
  for (size_t i = 0; i < ids.size(); ++i) out.data[i] = S.data[static_cast<size_t>(ids[i])];
  return detail::MakeOp<Real>(
      "embed", std::move(out), {src}, [ids](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        for (size_t i = 0; i < ids.size(); ++i)
          p.grad.data[static_cast<size_t>(ids[i])] += node.grad.data[i];
      });
}

template <typename Real>
Var<Real> ReduceSum(const Var<Real>& x) {
  Real acc = 0;
  for (Real v : x.value().data) acc += v;
  return detail::MakeOp<Real>(
      "reduce_sum", TensorT<Real>::Scalar(acc), {x}, [](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        for (auto& g : p.grad.data) g += node.grad.data[0];
      });
}

template <typename Real>
Var<Real> ReduceMean(const Var<Real>& x) {
  Real acc = 0;
  for (Real v : x.value().data) acc += v;
  Real n = static_cast<Real>(x.value().numel());
  return detail::MakeOp<Real>(
      "reduce_mean", TensorT<Real>::Scalar(acc / n), {x}, [n](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        for (auto& g : p.grad.data) g += node.grad.data[0] / n;
      });
}

// Custom-op escape hatch for modules with analytic gradients (e.g. the
// transducer loss). `backward` follows the same contract as primitive ops.
template <typename Real>
Var<Real> CustomOp(const char* name, TensorT<Real> value,
                   std::vector<Var<Real>> parents,
                   std::function<void(Node<Real>&)> backward) {
  return detail::MakeOp<Real>(name, std::move(value), std::move(parents),
                              std::move(backward));
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

// Reverse sweep from a scalar loss. Builds the topological order of the
// reachable subgraph (each node exactly once), seeds d(loss)/d(loss) = 1 and
// applies each node's backward closure in reverse order. Gradients accumulate
// into leaf nodes; leaves never reached keep empty (= zero) grads.
template <typename Real>
void Backward(const Var<Real>& loss) {
  if (!loss.defined()) throw ValidationError("backward: undefined loss");
  if (!loss.value().is_scalar())
    throw ShapeError("backward: loss must be scalar, got " + ShapeStr(loss.shape()));
  if (!std::isfinite(static_cast<double>(loss.value().data[0])))
    throw NumericError("backward: loss is not finite");
  if (!loss.requires_grad()) return;

  std::vector<Node<Real>*> order;
  std::unordered_set<Node<Real>*> visited;
  // Iterative post-order DFS; parents are pushed in declaration order so the
  // resulting sweep order is deterministic.
  std::vector<std::pair<Node<Real>*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<Real>* parent = node->parents[next].get();
      ++next;
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->EnsureGrad();
  loss.node()->grad.data[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Real>* node = *it;
    if (!node->backward) continue;
    node->EnsureGrad();
    node->backward(*node);
    if (FiniteChecksOn() && !AllFinite(node->grad)) {
      throw NumericError(std::string("non-finite gradient at op '") + node->op + "'");
    }
  }
}

}  // namespace dasr

#endif  // DASR_AUTODIFF_HPP_
