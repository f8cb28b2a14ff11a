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

#ifndef DASR_SEARCH_HPP_
#define DASR_SEARCH_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dasr/transducer.hpp"

namespace dasr {

struct Hypothesis {
  std::vector<int> tokens;  // blank-free wordpiece ids
  double first_pass_logp = 0.0;
  std::optional<double> delib_logp;
};

// Ranked first-pass hypotheses: sorted by first_pass_logp descending,
// deduplicated on the token sequence.
struct NBestList {
  std::vector<Hypothesis> hyps;
};

// N-best file format: utt_id\trank\tfirst_pass_logp\tspace-joined piece ids,
// rank counting from 1.
void WriteNBest(const std::string& path,
                const std::vector<std::pair<std::string, NBestList>>& items);
std::vector<std::pair<std::string, NBestList>> ReadNBest(const std::string& path);

namespace detail {

// Reserved non-blank symbols (sos/eos/unk) are never proposed as labels.
constexpr int kFirstLabelId = WordpieceVocab::kNumReserved;

template <typename Real>
struct LiveHyp {
  std::vector<int> tokens;
  double score = 0.0;
  typename PredictionNetwork<Real>::State state;
  Var<Real> pred_proj_row;  // joint-projected prediction output for this history
};

template <typename Real>
LiveHyp<Real> RootHyp(const PredictionNetwork<Real>& pred, const JointNetwork<Real>& joint) {
  LiveHyp<Real> root;
  auto [out, state] = pred.Step(WordpieceVocab::kSosId, pred.InitialState());
  root.state = state;
  root.pred_proj_row = joint.ProjectPred(out);
  return root;
}

}  // namespace detail

// Label-synchronous transducer beam search over one utterance.
//
// Every expansion round scores blank (which finishes the hypothesis for this
// frame) against label extensions, merges duplicate label histories keeping
// the best alignment score, and prunes the union back to `beam` candidates.
// With beam=1 this reduces exactly to greedy per-frame argmax decoding.
// Emissions per frame are capped so decoding always terminates.
template <typename Real>
NBestList BeamSearch(const PredictionNetwork<Real>& pred, const JointNetwork<Real>& joint,
                     const Var<Real>& enc, int beam, int max_symbols_per_frame = 5) {
  if (beam < 1) throw ValidationError("beam_search: beam must be >= 1");
  if (enc.rows() < 1) throw ValidationError("beam_search: empty encoding");
  using Live = detail::LiveHyp<Real>;

  Var<Real> enc_proj = joint.ProjectEnc(enc);
  int64_t vocab = joint.vocab();
  std::vector<Live> beams{detail::RootHyp(pred, joint)};

  struct Candidate {
    double score;
    std::vector<int> tokens;
    bool done;       // took blank at this frame
    size_t src;      // index into agenda (pending candidates only)
    int label;       // pending candidates only
  };
  auto cand_less = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.done != b.done) return a.done;  // blank (id 0) wins ties
    if (a.tokens != b.tokens) return a.tokens < b.tokens;
    return a.label < b.label;
  };

  for (int64_t t = 0; t < enc.rows(); ++t) {
    Var<Real> enc_row = SliceOp(enc_proj, 0, t, 1);
    // Hypotheses that took blank at this frame, max-merged by label history.
    // The prediction state is a function of the history alone, so the state
    // travels with the map entry.
    std::map<std::vector<int>, Live> done;
    std::vector<Live> agenda = std::move(beams);
    beams.clear();

    for (int round = 0; round <= max_symbols_per_frame; ++round) {
      std::vector<Candidate> cands;
      for (const auto& [tokens, live] : done)
        cands.push_back({live.score, tokens, true, 0, -1});
      for (size_t i = 0; i < agenda.size(); ++i) {
        const auto& logp = joint.RowLogProbs(enc_row, agenda[i].pred_proj_row).value();
        cands.push_back({agenda[i].score + static_cast<double>(logp.data[WordpieceVocab::kBlankId]),
                         agenda[i].tokens, true, i, -1});
        if (round < max_symbols_per_frame) {
          for (int v = detail::kFirstLabelId; v < vocab; ++v) {
            cands.push_back({agenda[i].score + static_cast<double>(logp.data[static_cast<size_t>(v)]),
                             agenda[i].tokens, false, i, v});
          }
        }
      }
      std::sort(cands.begin(), cands.end(), cand_less);

      // Prune the union of finished and pending candidates to the beam,
      // merging duplicate label histories (best score wins).
      std::map<std::vector<int>, Live> next_done;
      std::vector<Live> next_agenda;
      std::map<std::vector<int>, bool> seen_pending;
      int kept = 0;
      for (const auto& c : cands) {
        if (kept >= beam) break;
        if (c.done) {
          if (next_done.count(c.tokens)) continue;  // lower-scored duplicate
          auto prev = done.find(c.tokens);
          Live live;
          if (prev != done.end() && prev->second.score == c.score) {
            live = prev->second;  // carried over from an earlier round
          } else {
            live = agenda[c.src];
            live.score = c.score;
          }
          next_done.emplace(c.tokens, std::move(live));
          ++kept;
        } else {
          std::vector<int> extended = c.tokens;
          extended.push_back(c.label);
          if (seen_pending.count(extended)) continue;
          seen_pending[extended] = true;
          Live ext;
          ext.tokens = std::move(extended);
          ext.score = c.score;
          auto [out, state] = pred.Step(c.label, agenda[c.src].state);
          ext.state = std::move(state);
          ext.pred_proj_row = joint.ProjectPred(out);
          next_agenda.push_back(std::move(ext));
          ++kept;
        }
      }
      done = std::move(next_done);
      agenda = std::move(next_agenda);
      if (agenda.empty()) break;
    }

    if (done.empty())
      throw NumericError("beam_search: all hypotheses pruned");  // unreachable: blank always expandable
    for (auto& [tokens, live] : done) beams.push_back(std::move(live));
    std::sort(beams.begin(), beams.end(), [](const Live& a, const Live& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.tokens < b.tokens;
    });
  }

  NBestList out;
  for (const auto& live : beams)
    out.hyps.push_back({live.tokens, live.score, std::nullopt});
  return out;
}

// Greedy frame-by-frame argmax decoding: at each frame repeatedly take the
// argmax over blank and label symbols, advancing to the next frame on blank.
template <typename Real>
std::vector<int> GreedyDecode(const PredictionNetwork<Real>& pred,
                              const JointNetwork<Real>& joint, const Var<Real>& enc,
                              int max_symbols_per_frame = 5) {
  if (enc.rows() < 1) throw ValidationError("greedy: empty encoding");
  Var<Real> enc_proj = joint.ProjectEnc(enc);
  auto live = detail::RootHyp(pred, joint);
  int64_t vocab = joint.vocab();
  for (int64_t t = 0; t < enc.rows(); ++t) {
    Var<Real> enc_row = SliceOp(enc_proj, 0, t, 1);
    for (int emitted = 0; emitted < max_symbols_per_frame; ++emitted) {
      const auto& logp = joint.RowLogProbs(enc_row, live.pred_proj_row).value();
      int best = WordpieceVocab::kBlankId;
      for (int v = detail::kFirstLabelId; v < vocab; ++v) {
        if (logp.data[static_cast<size_t>(v)] > logp.data[static_cast<size_t>(best)]) best = v;
      }
      if (best == WordpieceVocab::kBlankId) break;
      live.tokens.push_back(best);
      auto [out, state] = pred.Step(best, live.state);
      live.state = std::move(state);
      live.pred_proj_row = joint.ProjectPred(out);
    }
  }
  return live.tokens;
}

struct FrameSampleResult {
  std::vector<int> frame_tokens;  // one symbol per encoder frame, blank included
  std::vector<int> stripped;      // blank-free sequence fed to the text encoder
};

// Per-frame softmax sampling: one categorical draw per encoder frame at
// (t, u(t)), where u advances past sampled non-blank labels. The
// frame-aligned output always has exactly one symbol per frame.
template <typename Real>
FrameSampleResult FrameSample(const PredictionNetwork<Real>& pred,
                              const JointNetwork<Real>& joint, const Var<Real>& enc,
                              SeededRng& rng, double temperature = 1.0) {
  if (temperature <= 0.0) throw ValidationError("frame_sample: temperature must be > 0");
  if (enc.rows() < 1) throw ValidationError("frame_sample: empty encoding");
  Var<Real> enc_proj = joint.ProjectEnc(enc);
  auto live = detail::RootHyp(pred, joint);
  FrameSampleResult result;
  int64_t vocab = joint.vocab();
  std::vector<double> weights(static_cast<size_t>(vocab));
  for (int64_t t = 0; t < enc.rows(); ++t) {
    Var<Real> enc_row = SliceOp(enc_proj, 0, t, 1);
    const auto& logp = joint.RowLogProbs(enc_row, live.pred_proj_row).value();
    double mx = -1e300;
    for (int64_t v = 0; v < vocab; ++v)
      mx = std::max(mx, static_cast<double>(logp.data[static_cast<size_t>(v)]) / temperature);
    for (int64_t v = 0; v < vocab; ++v)
      weights[static_cast<size_t>(v)] =
          std::exp(static_cast<double>(logp.data[static_cast<size_t>(v)]) / temperature - mx);
    int draw = rng.Categorical(weights);
    result.frame_tokens.push_back(draw);
    if (draw != WordpieceVocab::kBlankId) {
      result.stripped.push_back(draw);
      auto [out, state] = pred.Step(draw, live.state);
      live.state = std::move(state);
      live.pred_proj_row = joint.ProjectPred(out);
    }
  }
  return result;
}

}  // namespace dasr

#endif  // DASR_SEARCH_HPP_
