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

#ifndef DASR_ENCODER_HPP_
#define DASR_ENCODER_HPP_

#include <string>
#include <vector>

#include "dasr/config.hpp"
#include "dasr/conformer.hpp"

namespace dasr {

struct EncoderGeometry {
  int causal_layers = 12;
  int pre_stack_layers = 3;  // conformer layers before the time stacking
  int wide_layers = 1;       // layers at 2x dim right after stacking
  int64_t dim = 512;
  int64_t wide_dim = 1024;  // must equal 2*dim (stacking concatenates pairs)
  int noncausal_layers = 5;
  int64_t noncausal_dim = 512;
  int right_context_total = 15;  // future frames across the whole cascade
  int heads = 8;
  int conv_kernel = 15;
  int noncausal_conv_kernel = 7;
  int ffn_multiplier = 4;
  int64_t input_dim = 240;

  static EncoderGeometry FromConfig(const RunConfig& cfg) {
    EncoderGeometry g;
    g.causal_layers = static_cast<int>(cfg.GetInt("encoder.causal_layers"));
    g.pre_stack_layers = static_cast<int>(cfg.GetInt("encoder.pre_stack_layers"));
    g.wide_layers = static_cast<int>(cfg.GetInt("encoder.wide_layers"));
    g.dim = cfg.GetInt("encoder.dim");
    g.wide_dim = cfg.GetInt("encoder.wide_layer_dim");
    g.noncausal_layers = static_cast<int>(cfg.GetInt("encoder.noncausal_layers"));
    g.noncausal_dim = cfg.GetInt("encoder.noncausal_dim");
    if (g.noncausal_dim == 0) g.noncausal_dim = g.dim;
    g.right_context_total = static_cast<int>(cfg.GetInt("encoder.right_context_frames"));
    g.heads = static_cast<int>(cfg.GetInt("encoder.heads"));
    g.conv_kernel = static_cast<int>(cfg.GetInt("encoder.conv_kernel"));
    g.noncausal_conv_kernel = static_cast<int>(cfg.GetInt("encoder.noncausal_conv_kernel"));
    g.ffn_multiplier = static_cast<int>(cfg.GetInt("encoder.ffn_multiplier"));
    g.Validate();
    return g;
  }

  void Validate() const {
    if (wide_dim != 2 * dim)
      throw ValidationError("encoder: wide_layer_dim must equal 2*dim (stacked pairs)");
    if (pre_stack_layers + wide_layers > causal_layers)
      throw ValidationError("encoder: causal_layers smaller than block structure");
    if (noncausal_layers > 0 && right_context_total % noncausal_layers != 0)
      throw ValidationError(
          "encoder: right_context_frames must divide evenly across non-causal layers");
  }

  int LookaheadPerNoncausalLayer() const {
    return noncausal_layers > 0 ? right_context_total / noncausal_layers : 0;
  }
};

// Causal conformer encoder with a cascaded non-causal encoder on top.
//
// Causal stack: input projection, `pre_stack_layers` causal conformer layers
// at `dim`, a stacking layer concatenating two neighboring encodings in time
// (halving the frame rate to 60 ms), `wide_layers` causal conformer layers
// at 2*dim, a projection back to `dim`, and the remaining causal layers.
// The cascade adds `noncausal_layers` conformer layers whose per-layer
// lookahead splits `right_context_total` evenly.
template <typename Real>
class AudioEncoder {
 public:
  AudioEncoder(ParamHost<Real>& host, const std::string& prefix,
               const EncoderGeometry& geom)
      : geom_(geom) {
    geom.Validate();
    input_proj_ = Dense<Real>(host, prefix + "/input_proj", geom.input_dim, geom.dim);
    int layer = 0;
    for (int i = 0; i < geom.pre_stack_layers; ++i, ++layer)
      pre_.emplace_back(host, prefix + "/causal" + std::to_string(layer), geom.dim,
                        geom.heads, geom.conv_kernel, geom.ffn_multiplier, 0);
    for (int i = 0; i < geom.wide_layers; ++i, ++layer)
      wide_.emplace_back(host, prefix + "/causal" + std::to_string(layer), geom.wide_dim,
                         geom.heads, geom.conv_kernel, geom.ffn_multiplier, 0);
    post_stack_proj_ = Dense<Real>(host, prefix + "/post_stack_proj", geom.wide_dim,
                                   geom.dim);
    int remaining = geom.causal_layers - geom.pre_stack_layers - geom.wide_layers;
    for (int i = 0; i < remaining; ++i, ++layer)
      rest_.emplace_back(host, prefix + "/causal" + std::to_string(layer), geom.dim,
                         geom.heads, geom.conv_kernel, geom.ffn_multiplier, 0);

    int lookahead = geom.LookaheadPerNoncausalLayer();
    if (geom.noncausal_dim != geom.dim) {
      cascade_in_proj_ =
          Dense<Real>(host, prefix + "/cascade_in_proj", geom.dim, geom.noncausal_dim);
      cascade_out_proj_ =
          Dense<Real>(host, prefix + "/cascade_out_proj", geom.noncausal_dim, geom.dim);
    }
    for (int i = 0; i < geom.noncausal_layers; ++i)
      cascade_.emplace_back(host, prefix + "/noncausal" + std::to_string(i),
                            geom.noncausal_dim, geom.heads, geom.noncausal_conv_kernel,
                            geom.ffn_multiplier, lookahead);
  }

  // stacked: [T, input_dim] at 30 ms. Returns [ceil(T/2), dim] at 60 ms.
  Var<Real> EncodeCausal(const Var<Real>& stacked) const {
    if (stacked.cols() != geom_.input_dim)
      throw ShapeError("encoder: expected input dim " + std::to_string(geom_.input_dim));
    Var<Real> x = input_proj_(stacked);
    for (const auto& l : pre_) x = l.Forward(x);
    x = StackPairs(x);
    for (const auto& l : wide_) x = l.Forward(x);
    x = post_stack_proj_(x);
    for (const auto& l : rest_) x = l.Forward(x);
    return x;
  }

  // causal: [T', dim]. Returns the non-causal encodings e, same shape.
  Var<Real> EncodeCascade(const Var<Real>& causal) const {
    Var<Real> x = causal;
    if (cascade_in_proj_.w.defined()) x = cascade_in_proj_(x);
    for (const auto& l : cascade_) x = l.Forward(x);
    if (cascade_out_proj_.w.defined()) x = cascade_out_proj_(x);
    return x;
  }

  const EncoderGeometry& geometry() const { return geom_; }

 private:
  // Concatenates frames (2t, 2t+1) -> one frame at half rate; the trailing
  // odd frame pairs with itself.
  static Var<Real> StackPairs(const Var<Real>& x) {
    int64_t t_in = x.rows();
    int64_t t_out = (t_in + 1) / 2;
    std::vector<int64_t> even(static_cast<size_t>(t_out));
    std::vector<int64_t> odd(static_cast<size_t>(t_out));
    for (int64_t t = 0; t < t_out; ++t) {
      even[static_cast<size_t>(t)] = 2 * t;
      odd[static_cast<size_t>(t)] = std::min(2 * t + 1, t_in - 1);
    }
    return Concat<Real>({GatherRows(x, even), GatherRows(x, odd)}, 1);
  }

  EncoderGeometry geom_;
  Dense<Real> input_proj_;
  Dense<Real> post_stack_proj_;
  Dense<Real> cascade_in_proj_, cascade_out_proj_;
  std::vector<ConformerLayer<Real>> pre_, wide_, rest_, cascade_;
};

}  // namespace dasr

#endif  // DASR_ENCODER_HPP_
