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

#ifndef DASR_SYNTH_HPP_
#define DASR_SYNTH_HPP_

#include <string>
#include <vector>

#include "dasr/common.hpp"

namespace dasr {

// Synthetic language: a word inventory disjoint from every other language,
// a bigram grammar over it, and one acoustic template per word. Utterance
// features concatenate per-word templates (3-5 frames each) plus Gaussian
// noise, so language identity is recoverable from the tokens yet never
// handed to the model.
struct LanguageSpec {
  std::string name;
  bool logographic = false;
  int lexicon_size = 30;
  int min_tokens = 3;
  int max_tokens = 8;
  int min_frames = 3;
  int max_frames = 5;
  double noise_sigma = 0.35;
  int train_size = 0;
  int dev_size = 0;
  int test_size = 0;
};

struct CorpusSpec {
  std::vector<LanguageSpec> languages;
  int feature_dim = 80;
  // Per-split noise scale factors; the dev split uses noiseless templates so
  // a trained first pass can be judged against clean acoustics.
  double train_noise_scale = 1.0;
  double dev_noise_scale = 0.0;
  double test_noise_scale = 1.0;

  // Three languages, 1000/600/400 utterances, the third logographic.
  static CorpusSpec Default();
  static CorpusSpec FromJsonFile(const std::string& path);
  std::string ToJson() const;
};

// Writes {train,dev,test}.{manifest,bin,text}, languages.tsv and spec.json
// under out_dir. Deterministic: the same spec and seed produce byte-identical
// files.
void GenerateCorpus(const CorpusSpec& spec, const std::string& out_dir, uint64_t seed);

// Languages flagged logographic in a corpus directory's languages.tsv.
std::vector<std::string> ReadLogographicLanguages(const std::string& languages_tsv);

}  // namespace dasr

#endif  // DASR_SYNTH_HPP_
