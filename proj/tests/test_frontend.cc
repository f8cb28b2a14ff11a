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

#include <filesystem>
#include <set>

#include "doctest.h"

#include "dasr/features_io.hpp"
#include "dasr/frontend.hpp"

using namespace dasr;

namespace {

FeatureMatrix MakeFeatures(int64_t t, int64_t d, float base = 0.0f) {
  FeatureMatrix f;
  f.utterance_id = "utt";
  f.language_id = "alpha";
  f.frame_rate_ms = 10;
  f.frames = Tensor32({t, d});
  for (int64_t i = 0; i < t; ++i)
    for (int64_t j = 0; j < d; ++j) f.frames.at(i, j) = base + static_cast<float>(i * d + j);
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("frontend");

TEST_CASE("stack_frames shapes and rates") {
  auto out = StackFrames(MakeFeatures(9, 80));
  CHECK(out.frames.shape == Shape{3, 240});
  CHECK(out.frame_rate_ms == 30);

  auto one = StackFrames(MakeFeatures(1, 80));
  CHECK(one.frames.shape == Shape{1, 240});
}

TEST_CASE("stack_frames repeats the last frame into a partial stack") {
  auto raw = MakeFeatures(10, 4);
  auto out = StackFrames(raw);
  CHECK(out.frames.shape == Shape{4, 12});
  // Fourth stack covers raw frames {9, clamp(10), clamp(11)} = {9, 9, 9}.
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t j = 0; j < 4; ++j)
      CHECK(out.frames.at(3, k * 4 + j) == raw.frames.at(9, j));
  // A full stack is a pure copy of its three source frames.
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t j = 0; j < 4; ++j)
      CHECK(out.frames.at(1, k * 4 + j) == raw.frames.at(3 + k, j));
  // T=1: the single frame fills the whole stack.
  auto single = StackFrames(MakeFeatures(1, 4));
  for (int64_t k = 0; k < 3; ++k)
    for (int64_t j = 0; j < 4; ++j)
      CHECK(single.frames.at(0, k * 4 + j) == static_cast<float>(j));
}

TEST_CASE("stack_frames is pure reindexing") {
  auto raw = MakeFeatures(11, 8);
  auto out = StackFrames(raw);
  std::set<float> input_values(raw.frames.data.begin(), raw.frames.data.end());
  for (float v : out.frames.data) CHECK(input_values.count(v) == 1);
}

TEST_CASE("stack_frames rejects a zero factor") {
  FeatureMatrix f = MakeFeatures(3, 80);
  CHECK_THROWS_AS(StackFrames(f, 0), ValidationError);
}

TEST_CASE("spec_augment with zero maxima is the identity") {
  SpecAugmentConfig cfg;
  cfg.max_freq = 0;
  cfg.max_time = 0;
  auto raw = MakeFeatures(20, 80);
  SeededRng rng(3);
  auto out = SpecAugment(raw, cfg, rng);
  for (int64_t i = 0; i < raw.frames.numel(); ++i)
    CHECK(out.frames.data[i] == raw.frames.data[i]);
}

TEST_CASE("spec_augment bounds and banded structure") {
  SpecAugmentConfig cfg;  // paper defaults: 2x27 frequency, 2x50 time
  auto raw = MakeFeatures(100, 80, 1.0f);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    auto out = SpecAugment(raw, cfg, rng);
    CHECK(out.frames.shape == raw.frames.shape);
    // Fully-zeroed frequency bins <= 2*27; fully-zeroed frames <= 2*50.
    int zero_cols = 0;
    for (int64_t j = 0; j < 80; ++j) {
      bool all_zero = true;
      for (int64_t i = 0; i < 100 && all_zero; ++i) all_zero = out.frames.at(i, j) == 0.0f;
      if (all_zero) ++zero_cols;
    }
    CHECK(zero_cols <= 54);
    int zero_rows = 0;
    for (int64_t i = 0; i < 100; ++i) {
      bool all_zero = true;
      for (int64_t j = 0; j < 80 && all_zero; ++j) all_zero = out.frames.at(i, j) == 0.0f;
      if (all_zero) ++zero_rows;
    }
    CHECK(zero_rows <= 100);

    // Changed cells lie on a union of <=2 full-height column bands and <=2
    // full-width row bands: a changed cell's row or column must be entirely
    // zero across the mask union.
    for (int64_t i = 0; i < 100; ++i) {
      for (int64_t j = 0; j < 80; ++j) {
        if (out.frames.at(i, j) == raw.frames.at(i, j)) continue;
        CHECK(out.frames.at(i, j) == 0.0f);
        bool row_zero = true, col_zero = true;
        for (int64_t jj = 0; jj < 80; ++jj)
          if (out.frames.at(i, jj) == raw.frames.at(i, jj)) row_zero = false;
        for (int64_t ii = 0; ii < 100; ++ii)
          if (out.frames.at(ii, j) == raw.frames.at(ii, j)) col_zero = false;
        CHECK((row_zero || col_zero));
      }
    }
  }

  SeededRng r1(13), r2(13);
  auto a = SpecAugment(raw, cfg, r1);
  auto b = SpecAugment(raw, cfg, r2);
  for (int64_t i = 0; i < a.frames.numel(); ++i) CHECK(a.frames.data[i] == b.frames.data[i]);
}

TEST_CASE("spec_augment rejects masks as wide as the feature dim") {
  SpecAugmentConfig cfg;
  cfg.max_freq = 80;
  auto raw = MakeFeatures(10, 80);
  SeededRng rng(1);
  CHECK_THROWS_AS(SpecAugment(raw, cfg, rng), ValidationError);
}

TEST_CASE("feature file roundtrip through manifest and blob") {
  auto dir = std::filesystem::temp_directory_path() / "dasr_feat_test";
  std::filesystem::create_directories(dir);
  std::string base = (dir / "train").string();
  auto a = MakeFeatures(7, 5);
  a.utterance_id = "a";
  auto b = MakeFeatures(3, 5, 100.0f);
  b.utterance_id = "b";
  b.language_id = "beta";
  {
    FeatureWriter writer(base);
    writer.Append(a);
    writer.Append(b);
  }
  FeatureReader reader(base);
  REQUIRE(reader.entries().size() == 2);
  CHECK(reader.entries()[1].language_id == "beta");
  auto loaded = reader.Load(1);
  CHECK(loaded.frames.shape == b.frames.shape);
  for (int64_t i = 0; i < b.frames.numel(); ++i)
    CHECK(loaded.frames.data[i] == b.frames.data[i]);
  CHECK(reader.IndexOf("a") == 0);
  CHECK(reader.IndexOf("missing") == -1);
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
