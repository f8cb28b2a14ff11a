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

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"

#include "dasr/rng.hpp"
#include "dasr/tokenizer.hpp"

using namespace dasr;

namespace {

const std::string kMarker = "\xe2\x96\x81";

std::vector<CorpusText> RepeatWord(const std::string& word, int count) {
  return std::vector<CorpusText>(static_cast<size_t>(count), CorpusText{word, false});
}

// Independent reimplementation of the documented merge procedure, used as
// the oracle for the trainer: character inventory from all words
// (lexicographic), pair statistics from words at or above the threshold,
// merge the most frequent pair (lexicographic tie-break) until the target
// size is reached or no pair repeats.
std::vector<std::string> ReferenceTrain(const std::vector<std::pair<std::string, int>>& words,
                                        int target, int threshold) {
  auto symbols_of = [](const std::string& word) {
    std::vector<std::string> syms;
    auto chars = SplitUtf8(word);
    for (size_t i = 0; i < chars.size(); ++i)
      syms.push_back(i == 0 ? kMarker + chars[i] : chars[i]);
    return syms;
  };
  std::set<std::string> charset;
  for (const auto& [word, count] : words)
    for (const auto& s : symbols_of(word)) charset.insert(s);
  std::vector<std::string> pieces = {"<blank>", "<s>", "</s>", "<unk>"};
  pieces.insert(pieces.end(), charset.begin(), charset.end());

  std::vector<std::vector<std::string>> reps;
  std::vector<int> counts;
  for (const auto& [word, count] : words) {
    if (count < threshold) continue;
    reps.push_back(symbols_of(word));
    counts.push_back(count);
  }
  while (static_cast<int>(pieces.size()) < target) {
    std::map<std::pair<std::string, std::string>, int64_t> stats;
    for (size_t w = 0; w < reps.size(); ++w)
      for (size_t i = 0; i + 1 < reps[w].size(); ++i)
        stats[{reps[w][i], reps[w][i + 1]}] += counts[w];
    std::pair<std::string, std::string> best;
    int64_t best_count = 0;
    for (const auto& [pair, c] : stats) {
      if (c > best_count) {
        best_count = c;
        best = pair;
      }
    }
    if (best_count < 2) break;
    pieces.push_back(best.first + best.second);
    for (auto& rep : reps) {
      std::vector<std::string> merged;
      for (size_t i = 0; i < rep.size();) {
        if (i + 1 < rep.size() && rep[i] == best.first && rep[i + 1] == best.second) {
          merged.push_back(best.first + best.second);
          i += 2;
        } else {
          merged.push_back(rep[i]);
          ++i;
        }
      }
      rep = std::move(merged);
    }
  }
  return pieces;
}

}  // namespace

TEST_SUITE_BEGIN("tokenizer");

TEST_CASE("count threshold gates whole-word pieces") {
  std::vector<CorpusText> corpus;
  for (int i = 0; i < 25; ++i) corpus.push_back({"aa", false});
  for (int i = 0; i < 19; ++i) corpus.push_back({"bb", false});
  auto vocab = TrainWordpieces(corpus, 64, 20);
  CHECK(vocab.PieceId(kMarker + "aa") >= 0);   // eligible whole word
  CHECK(vocab.PieceId(kMarker + "bb") == -1);  // below threshold: characters only
  CHECK(vocab.PieceId(kMarker + "b") >= 0);
  CHECK(vocab.PieceId("b") >= 0);
  auto seq = Segment("bb", vocab);
  CHECK(seq.ids.size() == 2);
}

TEST_CASE("single repeated word yields reserved + characters + the word") {
  auto vocab = TrainWordpieces(RepeatWord("abc", 30), 64, 20);
  std::set<std::string> expected = {"<blank>", "<s>",          "</s>",       "<unk>",
                                    kMarker + "a", "b",        "c",          kMarker + "ab",
                                    kMarker + "abc"};
  std::set<std::string> got(vocab.pieces.begin(), vocab.pieces.end());
  CHECK(got == expected);
}

TEST_CASE("merge loop matches an independent reimplementation") {
  // Fixed 200-word synthetic corpus with Zipf-ish counts.
  SeededRng rng(77);
  std::vector<std::pair<std::string, int>> words;
  const std::string letters = "abcdefgh";
  std::set<std::string> seen;
  while (words.size() < 200) {
    int len = static_cast<int>(rng.UniformInt(2, 6));
    std::string w;
    for (int i = 0; i < len; ++i)
      w.push_back(letters[static_cast<size_t>(rng.UniformInt(0, 7))]);
    if (!seen.insert(w).second) continue;
    int count = static_cast<int>(rng.UniformInt(1, 120));
    words.emplace_back(w, count);
  }
  std::vector<CorpusText> corpus;
  for (const auto& [w, c] : words)
    for (int i = 0; i < c; ++i) corpus.push_back({w, false});

  auto vocab = TrainWordpieces(corpus, 64, 20);
  auto expected = ReferenceTrain(words, 64, 20);
  REQUIRE(vocab.pieces.size() == expected.size());
  for (size_t i = 0; i < expected.size(); ++i) CHECK(vocab.pieces[i] == expected[i]);
  CHECK(vocab.size() <= 64);
}

TEST_CASE("training is deterministic") {
  std::vector<CorpusText> corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.push_back({"hello world", false});
    corpus.push_back({"hollow word", false});
  }
  auto a = TrainWordpieces(corpus, 48, 20);
  auto b = TrainWordpieces(corpus, 48, 20);
  CHECK(a.pieces == b.pieces);
}

TEST_CASE("target size too small for character coverage") {
  CHECK_THROWS_AS(TrainWordpieces(RepeatWord("abcdefghij", 30), 8, 20), ValidationError);
}

TEST_CASE("segment greedy longest match") {
  WordpieceVocab vocab;
  vocab.pieces = {"<blank>", "<s>", "</s>", "<unk>",
                  kMarker + "a", "a", "b", "ab", kMarker + "ab", kMarker + "abab"};
  auto seq = Segment("abab", vocab);
  REQUIRE(seq.ids.size() == 1);
  CHECK(vocab.PieceOf(seq.ids[0]) == kMarker + "abab");
  // Without the whole-word piece, the longest available prefix wins.
  WordpieceVocab small;
  small.pieces = {"<blank>", "<s>", "</s>", "<unk>", kMarker + "a", "a", "b", "ab"};
  auto seq2 = Segment("abab", small);
  REQUIRE(seq2.ids.size() == 3);
  CHECK(small.PieceOf(seq2.ids[0]) == kMarker + "a");
  CHECK(small.PieceOf(seq2.ids[1]) == "b");
  CHECK(small.PieceOf(seq2.ids[2]) == "ab");
}

TEST_CASE("logographic text segments to characters even when a piece exists") {
  WordpieceVocab vocab;
  std::string x = "\xe4\xb8\x80", y = "\xe4\xb8\x81";  // two CJK codepoints
  vocab.pieces = {"<blank>", "<s>", "</s>", "<unk>",
                  kMarker + x, kMarker + x + y, x, y};
  auto seq = Segment(x + y, vocab, /*logographic=*/true);
  REQUIRE(seq.ids.size() == 2);
  CHECK(vocab.PieceOf(seq.ids[0]) == kMarker + x);
  CHECK(vocab.PieceOf(seq.ids[1]) == y);
  CHECK(Decode(seq.ids, vocab) == x + y);
  // Greedy (non-logographic) segmentation would take the two-char piece.
  auto greedy = Segment(x + y, vocab, /*logographic=*/false);
  REQUIRE(greedy.ids.size() == 1);
}

TEST_CASE("unmappable characters become unk and are counted") {
  WordpieceVocab vocab;
  vocab.pieces = {"<blank>", "<s>", "</s>", "<unk>", kMarker + "a", "a"};
  int unks = 0;
  auto seq = Segment("aza", vocab, false, &unks);
  CHECK(unks == 1);
  REQUIRE(seq.ids.size() == 3);
  CHECK(seq.ids[1] == WordpieceVocab::kUnkId);
}

TEST_CASE("decode basics") {
  WordpieceVocab vocab;
  vocab.pieces = {"<blank>", "<s>", "</s>", "<unk>", kMarker + "ab", "c", kMarker + "d"};
  CHECK(Decode({}, vocab) == "");
  CHECK(Decode({4, 5, 6}, vocab) == "abc d");
  CHECK(Decode({4, 5, 6, WordpieceVocab::kEosId}, vocab) == "abc d");  // terminal eos stripped
  CHECK_THROWS_AS(Decode({4, WordpieceVocab::kEosId, 5}, vocab), ValidationError);
  CHECK_THROWS_AS(Decode({4, WordpieceVocab::kBlankId}, vocab), ValidationError);
}

TEST_CASE("roundtrip and zero unk rate on a mixed corpus") {
  std::vector<CorpusText> corpus;
  std::vector<std::string> texts = {"the cat sat", "the hat", "a cat ate", "the the the"};
  for (int rep = 0; rep < 25; ++rep)
    for (const auto& t : texts) corpus.push_back({t, false});
  std::string logo = "\xe4\xb8\x80\xe4\xb8\x81\xe4\xb8\x82";
  for (int rep = 0; rep < 25; ++rep) corpus.push_back({logo, true});

  auto vocab = TrainWordpieces(corpus, 96, 20);
  for (const auto& item : corpus) {
    int unks = -1;
    auto seq = Segment(item.text, vocab, item.logographic, &unks);
    CHECK(unks == 0);
    for (int id : seq.ids) CHECK(id != WordpieceVocab::kBlankId);
    CHECK(Decode(seq.ids, vocab) == NormalizeText(item.text));
  }
}

TEST_CASE("vocab file roundtrip") {
  auto vocab = TrainWordpieces(RepeatWord("hello", 30), 32, 20);
  auto path = std::filesystem::temp_directory_path() / "dasr_vocab_test.txt";
  vocab.Save(path.string());
  auto loaded = WordpieceVocab::Load(path.string());
  CHECK(loaded.pieces == vocab.pieces);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
