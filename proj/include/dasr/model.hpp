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

#ifndef DASR_MODEL_HPP_
#define DASR_MODEL_HPP_

#include <string>

#include "dasr/encoder.hpp"
#include "dasr/frontend.hpp"
#include "dasr/transducer.hpp"

namespace dasr {

// First-pass multilingual transducer: cascaded conformer encoder, prediction
// network, joint network. Nothing here reads language metadata.
template <typename Real>
class FirstPassModel {
 public:
  FirstPassModel(ParamHost<Real>& host, const RunConfig& cfg, int64_t vocab_size)
      : enc_geom_(EncoderGeometry::FromConfig(cfg)),
        trans_geom_(TransducerGeometry::FromConfig(cfg, vocab_size)),
        encoder_(host, "first_pass/encoder", enc_geom_),
        pred_(host, "first_pass/pred", trans_geom_),
        joint_(host, "first_pass/joint", enc_geom_.dim, trans_geom_) {}

  struct Encoded {
    Var<Real> causal;     // [T', dim] @60ms
    Var<Real> noncausal;  // [T', dim], frame t sees causal frames <= t + right context
  };

  // stacked: 30-ms stacked features (T x 240 at paper scale).
  Encoded Encode(const FeatureMatrix& stacked) const {
    Var<Real> x = Var<Real>::Constant(stacked.frames.template Cast<Real>());
    Var<Real> causal = encoder_.EncodeCausal(x);
    Var<Real> noncausal = encoder_.EncodeCascade(causal);
    return {causal, noncausal};
  }

  Var<Real> EncodeCausalOnly(const FeatureMatrix& stacked) const {
    Var<Real> x = Var<Real>::Constant(stacked.frames.template Cast<Real>());
    return encoder_.EncodeCausal(x);
  }

  const AudioEncoder<Real>& encoder() const { return encoder_; }
  const PredictionNetwork<Real>& pred() const { return pred_; }
  const JointNetwork<Real>& joint() const { return joint_; }
  const EncoderGeometry& enc_geometry() const { return enc_geom_; }
  const TransducerGeometry& trans_geometry() const { return trans_geom_; }

 private:
  EncoderGeometry enc_geom_;
  TransducerGeometry trans_geom_;
  AudioEncoder<Real> encoder_;
  PredictionNetwork<Real> pred_;
  JointNetwork<Real> joint_;
};

}  // namespace dasr

#endif  // DASR_MODEL_HPP_
