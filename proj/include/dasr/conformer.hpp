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

#ifndef DASR_CONFORMER_HPP_
#define DASR_CONFORMER_HPP_

#include <string>

#include "dasr/layers.hpp"

namespace dasr {

// Conformer block: half-step feed-forward, self-attention, convolution,
// half-step feed-forward, final normalization.
//
// `lookahead` controls the temporal contract. 0 gives a strictly causal
// layer (left-only attention, left-padded depthwise convolution); k > 0
// lets attention see k future positions and caps the convolution's right
// reach at k, so the layer's future receptive field is exactly k.
template <typename Real>
class ConformerLayer {
 public:
  ConformerLayer() = default;
  ConformerLayer(ParamHost<Real>& host, const std::string& prefix, int64_t dim,
                 int heads, int conv_kernel, int ffn_multiplier, int lookahead)
      : lookahead_(lookahead), kernel_(conv_kernel) {
    if (conv_kernel < 1 || conv_kernel % 2 == 0)
      throw ValidationError("conformer: conv kernel must be odd and >= 1");
    if (lookahead < 0) throw ValidationError("conformer: lookahead must be >= 0");
    int64_t hidden = dim * ffn_multiplier;
    ffn1_ln_ = LayerNormLayer<Real>(host, prefix + "/ffn1_ln", dim);
    ffn1_ = FeedForward<Real>(host, prefix + "/ffn1", dim, hidden);
    attn_ln_ = LayerNormLayer<Real>(host, prefix + "/attn_ln", dim);
    attn_ = MultiHeadAttention<Real>(host, prefix + "/attn", dim, heads,
                                     /*relative_bias=*/true);
    conv_ln_ = LayerNormLayer<Real>(host, prefix + "/conv_ln", dim);
    conv_pw1_ = Dense<Real>(host, prefix + "/conv/pw1", dim, 2 * dim);
    conv_dw_w_ = host.Create(prefix + "/conv/dw_w", {conv_kernel, dim}, Init::kXavier);
    conv_dw_b_ = host.Create(prefix + "/conv/dw_b", {1, dim}, Init::kZeros);
    conv_norm_ = LayerNormLayer<Real>(host, prefix + "/conv/norm", dim);
    conv_pw2_ = Dense<Real>(host, prefix + "/conv/pw2", dim, dim);
    ffn2_ln_ = LayerNormLayer<Real>(host, prefix + "/ffn2_ln", dim);
    ffn2_ = FeedForward<Real>(host, prefix + "/ffn2", dim, hidden);
    out_ln_ = LayerNormLayer<Real>(host, prefix + "/out_ln", dim);

    int half = (conv_kernel - 1) / 2;
    conv_right_ = lookahead == 0 ? 0 : std::min(half, lookahead);
    conv_left_ = conv_kernel - 1 - conv_right_;
  }

  Var<Real> Forward(const Var<Real>& x) const {
    Var<Real> y = Add(x, Scale(ffn1_(ffn1_ln_(x)), Real(0.5)));
    y = Add(y, attn_.Self(attn_ln_(y), lookahead_));
    y = Add(y, ConvModule(conv_ln_(y)));
    y = Add(y, Scale(ffn2_(ffn2_ln_(y)), Real(0.5)));
    return out_ln_(y);
  }

  int lookahead() const { return lookahead_; }

 private:
  Var<Real> ConvModule(const Var<Real>& x) const {
    int64_t dim = x.cols();
    Var<Real> gates = conv_pw1_(x);
    Var<Real> a = SliceOp(gates, 1, 0, dim);
    Var<Real> g = SliceOp(gates, 1, dim, dim);
    Var<Real> glu = Mul(a, Sigmoid(g));
    Var<Real> conv = Conv1dDepthwise(glu, conv_dw_w_, conv_dw_b_, conv_left_, conv_right_);
    return conv_pw2_(Swish(conv_norm_(conv)));
  }

  int lookahead_ = 0;
  int kernel_ = 0;
  int conv_left_ = 0;
  int conv_right_ = 0;
  LayerNormLayer<Real> ffn1_ln_, attn_ln_, conv_ln_, conv_norm_, ffn2_ln_, out_ln_;
  FeedForward<Real> ffn1_, ffn2_;
  MultiHeadAttention<Real> attn_;
  Dense<Real> conv_pw1_, conv_pw2_;
  Var<Real> conv_dw_w_, conv_dw_b_;
};

}  // namespace dasr

#endif  // DASR_CONFORMER_HPP_
