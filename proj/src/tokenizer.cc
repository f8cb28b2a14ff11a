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

#include "dasr/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

namespace dasr {

namespace {

const char* kMarker = "\xe2\x96\x81";  // U+2581, word-boundary prefix

const char* kReservedNames[4] = {"<blank>", "<s>", "</s>", "<unk>"};

std::vector<std::string> SplitWords(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Word -> symbol sequence with the boundary marker fused onto the first
// character.
std::vector<std::string> WordSymbols(const std::string& word) {
  std::vector<std::string> chars = SplitUtf8(word);
  std::vector<std::string> symbols;
  symbols.reserve(chars.size());
  for (size_t i = 0; i < chars.size(); ++i)
    symbols.push_back(i == 0 ? kMarker + chars[i] : chars[i]);
  return symbols;
}

}  // namespace

std::string NormalizeText(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> SplitUtf8(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((c & 0x80) == 0)
      len = 1;
    else if ((c & 0xe0) == 0xc0)
      len = 2;
    else if ((c & 0xf0) == 0xe0)
      len = 3;
    else if ((c & 0xf8) == 0xf0)
      len = 4;
    if (i + len > text.size()) len = text.size() - i;
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

const std::string& WordpieceVocab::PieceOf(int id) const {
  if (id < 0 || id >= size())
    throw ValidationError("vocab: id out of range: " + std::to_string(id));
  return pieces[static_cast<size_t>(id)];
}

int WordpieceVocab::PieceId(const std::string& piece) const {
  for (int i = kNumReserved; i < size(); ++i)
    if (pieces[static_cast<size_t>(i)] == piece) return i;
  return -1;
}

void WordpieceVocab::Save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("vocab: cannot open " + path);
  for (const auto& p : pieces) os << p << '\n';
}

WordpieceVocab WordpieceVocab::Load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("vocab: cannot open " + path);
  WordpieceVocab vocab;
  std::string line;
  while (std::getline(is, line)) vocab.pieces.push_back(line);
  if (vocab.size() < kNumReserved)
    throw ValidationError("vocab: file too short: " + path);
  for (int i = 0; i < kNumReserved; ++i) {
    if (vocab.pieces[static_cast<size_t>(i)] != kReservedNames[i])
      throw ValidationError("vocab: reserved symbol mismatch at line " + std::to_string(i));
  }
  return vocab;
}

WordpieceVocab TrainWordpieces(const std::vector<CorpusText>& corpus, int target_size,
                               int count_threshold) {
  if (corpus.empty()) throw ValidationError("wordpieces: empty corpus");

  // Word counts in first-seen order. Logographic words explode into
  // per-character units that never participate in merges.
  std::vector<std::pair<std::string, int64_t>> words;
  std::unordered_map<std::string, size_t> word_index;
  auto add_word = [&](const std::string& w) {
    auto it = word_index.find(w);
    if (it == word_index.end()) {
      word_index[w] = words.size();
      words.emplace_back(w, 1);
    } else {
      words[it->second].second += 1;
    }
  };

  std::set<std::string> char_pieces;
  for (const auto& item : corpus) {
    std::string norm = NormalizeText(item.text);
    for (const auto& word : SplitWords(norm)) {
      auto symbols = WordSymbols(word);
      for (const auto& s : symbols) char_pieces.insert(s);
      if (item.logographic) {
        // Single-symbol pseudo-words: characters enter the inventory but no
        // pair ever forms across them.
        continue;
      }
      add_word(word);
    }
  }
  if (char_pieces.empty()) throw ValidationError("wordpieces: corpus has no words");

  WordpieceVocab vocab;
  for (const char* r : kReservedNames) vocab.pieces.emplace_back(r);
  for (const auto& c : char_pieces) vocab.pieces.push_back(c);
  if (vocab.size() > target_size) {
    throw ValidationError("wordpieces: target_size " + std::to_string(target_size) +
                          " too small to cover " + std::to_string(char_pieces.size()) +
                          " characters plus reserved symbols");
  }

  // Words below the count threshold contribute characters only.
  std::vector<std::vector<std::string>> reps;
  std::vector<int64_t> rep_counts;
  for (const auto& [word, count] : words) {
    if (count < count_threshold) continue;
    reps.push_back(WordSymbols(word));
    rep_counts.push_back(count);
  }

  while (vocab.size() < target_size) {
    std::map<std::pair<std::string, std::string>, int64_t> pair_counts;
    for (size_t w = 0; w < reps.size(); ++w) {
      const auto& rep = reps[w];
      for (size_t i = 0; i + 1 < rep.size(); ++i)
        pair_counts[{rep[i], rep[i + 1]}] += rep_counts[w];
    }
    std::pair<std::string, std::string> best;
    int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {  // map order breaks ties lexicographically
        best_count = count;
        best = pair;
      }
    }
    if (best_count < 2) break;
    std::string merged = best.first + best.second;
    vocab.pieces.push_back(merged);
    for (auto& rep : reps) {
      std::vector<std::string> next;
      next.reserve(rep.size());
      size_t i = 0;
      while (i < rep.size()) {
        if (i + 1 < rep.size() && rep[i] == best.first && rep[i + 1] == best.second) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(rep[i]);
          ++i;
        }
      }
      rep = std::move(next);
    }
  }
  return vocab;
}

TokenSequence Segment(const std::string& text, const WordpieceVocab& vocab,
                      bool logographic, int* unk_count) {
  std::string norm = NormalizeText(text);
  if (norm.empty()) throw ValidationError("segment: text empty after normalization");
  TokenSequence seq;
  int unks = 0;

  // Piece set for longest-match lookup; reserved symbols excluded.
  size_t max_piece_len = 1;
  std::unordered_map<std::string, int> piece_ids;
  for (int i = WordpieceVocab::kNumReserved; i < vocab.size(); ++i) {
    piece_ids[vocab.pieces[static_cast<size_t>(i)]] = i;
    max_piece_len = std::max(max_piece_len, vocab.pieces[static_cast<size_t>(i)].size());
  }

  for (const auto& word : SplitWords(norm)) {
    if (logographic) {
      auto chars = SplitUtf8(word);
      for (size_t i = 0; i < chars.size(); ++i) {
        std::string piece = i == 0 ? kMarker + chars[i] : chars[i];
        auto it = piece_ids.find(piece);
        if (it == piece_ids.end()) {
          seq.ids.push_back(WordpieceVocab::kUnkId);
          ++unks;
        } else {
          seq.ids.push_back(it->second);
        }
      }
      continue;
    }
    std::string unit = kMarker + word;
    size_t pos = 0;
    while (pos < unit.size()) {
      size_t try_len = std::min(max_piece_len, unit.size() - pos);
      int match_id = -1;
      size_t match_len = 0;
      for (size_t len = try_len; len >= 1; --len) {
        auto it = piece_ids.find(unit.substr(pos, len));
        if (it != piece_ids.end()) {
          match_id = it->second;
          match_len = len;
          break;
        }
      }
      if (match_id < 0) {
        seq.ids.push_back(WordpieceVocab::kUnkId);
        ++unks;
        // Skip one codepoint (plus the marker when it leads the unit).
        size_t skip = pos == 0 ? 3 : 0;  // marker bytes
        pos += skip;
        if (pos < unit.size())
          pos += SplitUtf8(unit.substr(pos, 4))[0].size();
      } else {
        seq.ids.push_back(match_id);
        pos += match_len;
      }
    }
  }
  if (unk_count != nullptr) *unk_count = unks;
  return seq;
}

std::string Decode(const std::vector<int>& ids, const WordpieceVocab& vocab) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    int id = ids[i];
    if (id == WordpieceVocab::kEosId && i + 1 == ids.size()) break;  // terminal eos
    if (id < WordpieceVocab::kNumReserved)
      throw ValidationError("decode: reserved id " + std::to_string(id) +
                            " inside sequence");
    const std::string& piece = vocab.PieceOf(id);
    if (piece.rfind(kMarker, 0) == 0) {
      if (!out.empty()) out.push_back(' ');
      out.append(piece.substr(3));
    } else {
      out.append(piece);
    }
  }
  return out;
}

}  // namespace dasr
