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

#ifndef DASR_LAYERS_HPP_
#define DASR_LAYERS_HPP_

#include <string>
#include <vector>

#include "dasr/autodiff.hpp"
#include "dasr/params.hpp"

namespace dasr {

template <typename Real>
struct Dense {
  Var<Real> w;
  Var<Real> b;  // undefined when bias-free

  Dense() = default;
  Dense(ParamHost<Real>& host, const std::string& prefix, int64_t in, int64_t out,
        bool bias = true) {
    w = host.Create(prefix + "/w", {in, out}, Init::kXavier);
    if (bias) b = host.Create(prefix + "/b", {1, out}, Init::kZeros);
  }

  Var<Real> operator()(const Var<Real>& x) const {
    Var<Real> y = MatMul(x, w);
    if (b.defined()) y = Add(y, b);
    return y;
  }
};

template <typename Real>
struct LayerNormLayer {
  Var<Real> gamma;
  Var<Real> beta;

  LayerNormLayer() = default;
  LayerNormLayer(ParamHost<Real>& host, const std::string& prefix, int64_t dim) {
    gamma = host.Create(prefix + "/gamma", {1, dim}, Init::kOnes);
    beta = host.Create(prefix + "/beta", {1, dim}, Init::kZeros);
  }

  Var<Real> operator()(const Var<Real>& x) const { return LayerNorm(x, gamma, beta); }
};

template <typename Real>
struct FeedForward {
  Dense<Real> in;
  Dense<Real> out;

  FeedForward() = default;
  FeedForward(ParamHost<Real>& host, const std::string& prefix, int64_t dim,
              int64_t hidden) {
    in = Dense<Real>(host, prefix + "/in", dim, hidden);
    out = Dense<Real>(host, prefix + "/out", hidden, dim);
  }

  Var<Real> operator()(const Var<Real>& x) const { return out(Swish(in(x))); }
};

// Relative-position bucket for self-attention bias. Offsets are clamped to a
// fixed window; larger spans share the edge bucket.
constexpr int kRelPosMaxPast = 31;
constexpr int kRelPosMaxFuture = 8;
constexpr int kRelPosBuckets = kRelPosMaxPast + kRelPosMaxFuture + 1;

inline int64_t RelPosBucket(int64_t offset) {  // offset = query index - key index
  if (offset > kRelPosMaxPast) offset = kRelPosMaxPast;
  if (offset < -kRelPosMaxFuture) offset = -kRelPosMaxFuture;
  return offset + kRelPosMaxFuture;
}

// Multi-head scaled dot-product attention. Queries and memory share the
// model dimension (callers project foreign contexts first). Self-attention
// adds a learned relative-position bias per head; `lookahead` bounds how far
// past the query index a key may sit (0 = causal, -1 = unbounded).
template <typename Real>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamHost<Real>& host, const std::string& prefix, int64_t dim,
                     int heads, bool relative_bias)
      : dim_(dim), heads_(heads) {
    if (heads < 1 || dim % heads != 0)
      throw ValidationError("attention: dim must be divisible by heads");
    wq_ = Dense<Real>(host, prefix + "/q", dim, dim);
    wk_ = Dense<Real>(host, prefix + "/k", dim, dim);
    wv_ = Dense<Real>(host, prefix + "/v", dim, dim);
    wo_ = Dense<Real>(host, prefix + "/o", dim, dim);
    if (relative_bias)
      rel_bias_ = host.Create(prefix + "/rel_bias", {heads, kRelPosBuckets}, Init::kZeros);
  }

  Var<Real> Self(const Var<Real>& x, int lookahead) const {
    return Attend(x, x, lookahead, /*positional=*/true);
  }

  Var<Real> Cross(const Var<Real>& queries, const Var<Real>& memory) const {
    return Attend(queries, memory, /*lookahead=*/-1, /*positional=*/false);
  }

 private:
  Var<Real> Attend(const Var<Real>& q_in, const Var<Real>& kv_in, int lookahead,
                   bool positional) const {
    int64_t tq = q_in.rows();
    int64_t tk = kv_in.rows();
    int64_t dk = dim_ / heads_;
    Var<Real> q = wq_(q_in);
    Var<Real> k = wk_(kv_in);
    Var<Real> v = wv_(kv_in);

    Var<Real> mask;
    if (lookahead >= 0) {
      TensorT<Real> m({tq, tk});
      for (int64_t i = 0; i < tq; ++i)
        for (int64_t j = 0; j < tk; ++j)
          m.at(i, j) = j > i + lookahead ? Real(-1e30) : Real(0);
      mask = Var<Real>::Constant(std::move(m));
    }

    std::vector<Var<Real>> heads_out;
    heads_out.reserve(static_cast<size_t>(heads_));
    Real scale = Real(1) / std::sqrt(static_cast<Real>(dk));
    for (int h = 0; h < heads_; ++h) {
      Var<Real> qh = SliceOp(q, 1, h * dk, dk);
      Var<Real> kh = SliceOp(k, 1, h * dk, dk);
      Var<Real> vh = SliceOp(v, 1, h * dk, dk);
      Var<Real> scores = Scale(MatMul(qh, Transpose(kh)), scale);
      if (positional && rel_bias_.defined()) {
        std::vector<int64_t> ids(static_cast<size_t>(tq * tk));
        for (int64_t i = 0; i < tq; ++i)
          for (int64_t j = 0; j < tk; ++j)
            ids[static_cast<size_t>(i * tk + j)] =
                h * kRelPosBuckets + RelPosBucket(i - j);
        scores = Add(scores, GatherFlat(rel_bias_, ids, {tq, tk}));
      }
      if (mask.defined()) scores = Add(scores, mask);
      heads_out.push_back(MatMul(Softmax(scores), vh));
    }
    Var<Real> ctx = heads_ == 1 ? heads_out[0] : Concat(heads_out, 1);
    return wo_(ctx);
  }

  int64_t dim_ = 0;
  int heads_ = 0;
  Dense<Real> wq_, wk_, wv_, wo_;
  Var<Real> rel_bias_;
};

}  // namespace dasr

#endif  // DASR_LAYERS_HPP_
