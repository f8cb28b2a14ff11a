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

#ifndef DASR_TOKENIZER_HPP_
#define DASR_TOKENIZER_HPP_

#include <string>
#include <utility>
#include <vector>

#include "dasr/common.hpp"

namespace dasr {

// One pooled subword inventory shared by every language. Ids are dense;
// the first four are reserved and never produced by segmentation.
struct WordpieceVocab {
  static constexpr int kBlankId = 0;
  static constexpr int kSosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kUnkId = 3;
  static constexpr int kNumReserved = 4;

  std::vector<std::string> pieces;

  int size() const { return static_cast<int>(pieces.size()); }
  const std::string& PieceOf(int id) const;
  // Lookup for segmentation; reserved pieces are not matchable. -1 if absent.
  int PieceId(const std::string& piece) const;

  void Save(const std::string& path) const;
  static WordpieceVocab Load(const std::string& path);
};

struct TokenSequence {
  std::vector<int> ids;
  std::string language_id;  // metadata only
};

// Lowercases ASCII letters and collapses whitespace runs to single spaces.
std::string NormalizeText(const std::string& text);

// Splits a UTF-8 string into codepoint substrings.
std::vector<std::string> SplitUtf8(const std::string& text);

struct CorpusText {
  std::string text;
  bool logographic = false;
};

// Frequency-greedy pair merging (BPE style) over whitespace-split words.
// Word-initial characters carry a boundary marker so decoding can restore
// spaces. Words seen fewer than `count_threshold` times contribute only
// their characters to the statistics; logographic text contributes
// characters only and is never merged. Merges repeat until `target_size`
// pieces exist or no adjacent pair occurs at least twice, choosing at each
// step the most frequent pair with a lexicographic tie-break, so training
// is deterministic for a given corpus.
WordpieceVocab TrainWordpieces(const std::vector<CorpusText>& corpus, int target_size,
                               int count_threshold = 20);

// Greedy longest-match segmentation, left to right within each word.
// Logographic text is pre-split to characters and emits exactly one token
// per character. Unmappable characters become unk (counted via unk_count).
TokenSequence Segment(const std::string& text, const WordpieceVocab& vocab,
                      bool logographic = false, int* unk_count = nullptr);

// Inverse of Segment for unk-free sequences. A terminal eos is stripped;
// any other reserved id raises ValidationError.
std::string Decode(const std::vector<int>& ids, const WordpieceVocab& vocab);

}  // namespace dasr

#endif  // DASR_TOKENIZER_HPP_
