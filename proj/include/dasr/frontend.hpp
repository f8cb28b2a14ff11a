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

#ifndef DASR_FRONTEND_HPP_
#define DASR_FRONTEND_HPP_

#include <string>

#include "dasr/rng.hpp"
#include "dasr/tensor.hpp"

namespace dasr {

// Acoustic feature frames for one utterance. language_id is metadata used by
// the corpus and the scorer only; no model operation reads it.
struct FeatureMatrix {
  std::string utterance_id;
  std::string language_id;
  int frame_rate_ms = 10;
  Tensor32 frames;  // T x D, row major

  int64_t num_frames() const { return frames.shape[0]; }
  int64_t dim() const { return frames.shape[1]; }
};

// Stacks `factor` neighboring 10-ms frames into one wider vector, dropping
// the frame rate by the same factor. The trailing partial stack repeats the
// last frame. Pure reindexing: every output cell is a copy of an input cell.
FeatureMatrix StackFrames(const FeatureMatrix& raw, int factor = 3);

struct SpecAugmentConfig {
  int freq_masks = 2;
  int max_freq = 27;  // maximum width of one frequency mask, in bins
  int time_masks = 2;
  int max_time = 50;  // maximum width of one time mask, in frames
};

// Zeroes random frequency bands and time spans. Widths are uniform on
// [0, max] inclusive, positions uniform over valid offsets; draw order is
// frequency masks (width then offset, each mask in turn) followed by time
// masks. Training-time only; evaluation paths never call this.
FeatureMatrix SpecAugment(const FeatureMatrix& feats, const SpecAugmentConfig& cfg,
                          SeededRng& rng);

}  // namespace dasr

#endif  // DASR_FRONTEND_HPP_
