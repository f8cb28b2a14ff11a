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

#ifndef DASR_RUNNER_HPP_
#define DASR_RUNNER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "dasr/config.hpp"
#include "dasr/wer.hpp"

namespace dasr {

// High-level pipeline entry points shared by the CLI and the test harnesses.
// Every run is bit-reproducible for a fixed seed: randomness is derived
// statelessly from (seed, purpose, step, index), work is reduced in
// utterance-index order, and run directories receive an echo of the
// effective configuration.

void RunGenData(const std::string& spec_path, const std::string& out_dir, uint64_t seed);

struct TrainResult {
  double final_loss = 0;
  int64_t steps = 0;
  std::string ckpt_train;  // parameters + optimizer + EMA, resumable
  std::string ckpt_eval;   // evaluation weights (EMA) under canonical names
};

TrainResult RunTrainFirstPass(const RunConfig& cfg, const std::string& data_dir,
                              const std::string& out_dir,
                              const std::string& resume_ckpt = "");

TrainResult RunTrainDelib(const RunConfig& cfg, const std::string& first_pass_ckpt,
                          const std::string& vocab_path, const std::string& data_dir,
                          const std::string& out_dir,
                          const std::string& resume_ckpt = "");

struct DecodeResult {
  std::string nbest_path;
  std::string top1_path;
};

DecodeResult RunDecode(const RunConfig& cfg, const std::string& ckpt,
                       const std::string& vocab_path, const std::string& data_dir,
                       const std::string& split, int beam, const std::string& source,
                       const std::string& out_dir, int workers = 1);

struct RescoreResult {
  std::string nbest_path;      // reranked n-best
  std::string selection_path;  // per-utterance chosen hypothesis text
};

RescoreResult RunRescore(const RunConfig& cfg, const std::string& delib_ckpt,
                         const std::string& vocab_path, const std::string& nbest_path,
                         const std::string& data_dir, const std::string& split,
                         double lambda, const std::string& out_dir, int workers = 1);

// hyp: id\ttext (or id\tlanguage\ttext); ref: transcripts file.
WerReport RunEvaluate(const std::string& hyp_path, const std::string& ref_path,
                      const std::string& languages_tsv, const std::string& out_tsv = "");

struct ParamCountReport {
  int64_t total = 0;
  int64_t first_pass = 0;
  int64_t first_pass_encoder = 0;
  int64_t first_pass_noncausal = 0;
  int64_t delib_total = 0;
  int64_t delib_text_encoder = 0;
  int64_t delib_decoder = 0;
  std::vector<std::pair<std::string, int64_t>> by_component;
};

// Analytic parameter count, built through the same constructors as a real
// model but without allocating tensor storage.
ParamCountReport RunParams(const RunConfig& cfg);

std::string FormatParamCount(int64_t count);

}  // namespace dasr

#endif  // DASR_RUNNER_HPP_
