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

#include "dasr/frontend.hpp"

#include <algorithm>

namespace dasr {

FeatureMatrix StackFrames(const FeatureMatrix& raw, int factor) {
  if (factor < 1) throw ValidationError("stack_frames: factor must be >= 1");
  int64_t t_in = raw.frames.shape[0];
  int64_t d_in = raw.frames.shape[1];
  if (t_in < 1) throw ValidationError("stack_frames: empty input");
  int64_t t_out = (t_in + factor - 1) / factor;
  FeatureMatrix out;
  out.utterance_id = raw.utterance_id;
  out.language_id = raw.language_id;
  out.frame_rate_ms = raw.frame_rate_ms * factor;
  out.frames = Tensor32({t_out, d_in * factor});
  for (int64_t t = 0; t < t_out; ++t) {
    for (int64_t k = 0; k < factor; ++k) {
      int64_t src = std::min(t * factor + k, t_in - 1);
      std::copy(raw.frames.data.begin() + static_cast<size_t>(src * d_in),
                raw.frames.data.begin() + static_cast<size_t>((src + 1) * d_in),
                out.frames.data.begin() + static_cast<size_t>(t * d_in * factor + k * d_in));
    }
  }
  return out;
}

FeatureMatrix SpecAugment(const FeatureMatrix& feats, const SpecAugmentConfig& cfg,
                          SeededRng& rng) {
  int64_t t = feats.frames.shape[0];
  int64_t d = feats.frames.shape[1];
  if (cfg.max_freq >= d)
    throw ValidationError("spec_augment: max_freq must be smaller than the feature dim");
  FeatureMatrix out = feats;
  for (int i = 0; i < cfg.freq_masks; ++i) {
    int64_t width = rng.UniformInt(0, cfg.max_freq);
    int64_t f0 = rng.UniformInt(0, d - width);
    for (int64_t r = 0; r < t; ++r)
      for (int64_t f = f0; f < f0 + width; ++f) out.frames.at(r, f) = 0.0f;
  }
  for (int i = 0; i < cfg.time_masks; ++i) {
    int64_t width = std::min<int64_t>(rng.UniformInt(0, cfg.max_time), t);
    int64_t t0 = rng.UniformInt(0, t - width);
    for (int64_t r = t0; r < t0 + width; ++r)
      for (int64_t f = 0; f < d; ++f) out.frames.at(r, f) = 0.0f;
  }
  return out;
}

}  // namespace dasr
