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

#ifndef DASR_TRANSDUCER_HPP_
#define DASR_TRANSDUCER_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dasr/config.hpp"
#include "dasr/lstm.hpp"
#include "dasr/tokenizer.hpp"

namespace dasr {

inline double NegInf() { return -std::numeric_limits<double>::infinity(); }

inline double LogSumExp2(double a, double b) {
  if (a == NegInf()) return b;
  if (b == NegInf()) return a;
  double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct TransducerGeometry {
  int pred_layers = 2;
  int64_t pred_dim = 2048;
  int64_t pred_proj = 640;
  int64_t joint_dim = 640;
  int64_t vocab = 16384;

  static TransducerGeometry FromConfig(const RunConfig& cfg, int64_t vocab_size) {
    TransducerGeometry g;
    g.pred_layers = static_cast<int>(cfg.GetInt("transducer.pred_layers"));
    g.pred_dim = cfg.GetInt("transducer.pred_dim");
    g.pred_proj = cfg.GetInt("transducer.pred_proj");
    g.joint_dim = cfg.GetInt("transducer.joint_dim");
    g.vocab = vocab_size;
    return g;
  }
};

// Label-conditioned prediction network: embedding plus a stack of projected
// LSTM layers. State u depends only on labels < u; position 0 is the
// start-of-sequence state.
template <typename Real>
class PredictionNetwork {
 public:
  struct State {
    std::vector<typename LstmLayer<Real>::State> layers;
  };

  PredictionNetwork() = default;
  PredictionNetwork(ParamHost<Real>& host, const std::string& prefix,
                    const TransducerGeometry& geom)
      : geom_(geom) {
    embed_ = host.Create(prefix + "/embed", {geom.vocab, geom.pred_proj},
                         Init::kEmbedNormal);
    for (int l = 0; l < geom.pred_layers; ++l)
      lstm_.emplace_back(host, prefix + "/lstm" + std::to_string(l), geom.pred_proj,
                         geom.pred_dim, geom.pred_proj);
  }

  State InitialState() const {
    State s;
    for (const auto& l : lstm_) s.layers.push_back(l.InitialState());
    return s;
  }

  // One step conditioned on `label` (use sos for the first step).
  std::pair<Var<Real>, State> Step(int label, const State& state) const {
    CheckLabel(label);
    Var<Real> x = GatherRows(embed_, {static_cast<int64_t>(label)});
    State next;
    next.layers.reserve(lstm_.size());
    for (size_t l = 0; l < lstm_.size(); ++l) {
      auto [h, s] = lstm_[l].Step(x, state.layers[l]);
      next.layers.push_back(s);
      x = h;
    }
    return {x, next};
  }

  // All prediction states for a blank-free label sequence: [U+1, pred_proj],
  // row u conditioned on labels[0..u).
  Var<Real> Forward(const std::vector<int>& labels) const {
    std::vector<int64_t> ids;
    ids.reserve(labels.size() + 1);
    ids.push_back(WordpieceVocab::kSosId);
    for (int label : labels) {
      CheckLabel(label);
      ids.push_back(static_cast<int64_t>(label));
    }
    Var<Real> x = GatherRows(embed_, ids);
    for (const auto& l : lstm_) x = l.Forward(x);
    return x;
  }

 private:
  void CheckLabel(int label) const {
    if (label == WordpieceVocab::kBlankId)
      throw ValidationError("prediction network: blank in label history");
    if (label < 0 || label >= geom_.vocab)
      throw ValidationError("prediction network: label out of vocabulary");
  }

  TransducerGeometry geom_;
  Var<Real> embed_;
  std::vector<LstmLayer<Real>> lstm_;
};

// Single feed-forward joint over projected encoder and prediction states,
// followed by the output softmax over the full vocabulary (blank included).
template <typename Real>
class JointNetwork {
 public:
  JointNetwork() = default;
  JointNetwork(ParamHost<Real>& host, const std::string& prefix, int64_t enc_dim,
               const TransducerGeometry& geom)
      : geom_(geom) {
    enc_proj_ = Dense<Real>(host, prefix + "/enc_proj", enc_dim, geom.joint_dim);
    pred_proj_ = Dense<Real>(host, prefix + "/pred_proj", geom.pred_proj,
                             geom.joint_dim, /*bias=*/false);
    out_ = Dense<Real>(host, prefix + "/out", geom.joint_dim, geom.vocab);
  }

  Var<Real> ProjectEnc(const Var<Real>& enc) const { return enc_proj_(enc); }
  Var<Real> ProjectPred(const Var<Real>& pred) const { return pred_proj_(pred); }

  // Log-probabilities over the vocabulary for one (t, u) cell given
  // already-projected rows.
  Var<Real> RowLogProbs(const Var<Real>& enc_proj_row, const Var<Real>& pred_proj_row) const {
    return LogSoftmax(out_(Tanh(Add(pred_proj_row, enc_proj_row))));
  }

  // Full alignment lattice as [T*(U+1), V] rowwise log-distributions;
  // row index is t*(U+1)+u. Cell (t,u) depends only on encoder frame t and
  // prediction state u.
  Var<Real> FullLattice(const Var<Real>& enc, const Var<Real>& pred_states) const {
    Var<Real> eproj = ProjectEnc(enc);
    Var<Real> pproj = ProjectPred(pred_states);
    int64_t t_len = enc.rows();
    std::vector<Var<Real>> blocks;
    blocks.reserve(static_cast<size_t>(t_len));
    for (int64_t t = 0; t < t_len; ++t)
      blocks.push_back(Add(pproj, SliceOp(eproj, 0, t, 1)));
    Var<Real> joint = t_len == 1 ? blocks[0] : Concat(blocks, 0);
    return LogSoftmax(out_(Tanh(joint)));
  }

  int64_t vocab() const { return geom_.vocab; }

 private:
  TransducerGeometry geom_;
  Dense<Real> enc_proj_, pred_proj_, out_;
};

// Diagnostics from the transducer loss DP, in 64-bit regardless of Real.
struct RnntDiagnostics {
  std::vector<double> alpha;  // [T, U+1] row major
  std::vector<double> beta;   // [T, U+1]
  double total_from_alpha = 0;
  double total_from_beta = 0;
  int64_t t_len = 0;
  int64_t u_len = 0;  // U+1
};

// Transducer loss: -log sum over all monotonic blank-augmented alignments.
//
// lattice is the [T*(U+1), V] log-probability tensor from FullLattice.
// The loss node's backward writes the analytic gradient with respect to the
// lattice log-probabilities via the alpha/beta recursions.
template <typename Real>
Var<Real> RnntLoss(const Var<Real>& lattice, int64_t t_len,
                   const std::vector<int>& labels, RnntDiagnostics* diag = nullptr,
                   int blank = WordpieceVocab::kBlankId) {
  const auto& L = lattice.value();
  int64_t u_len = static_cast<int64_t>(labels.size()) + 1;  // U+1
  int64_t vocab = L.cols();
  if (t_len < 1) throw ValidationError("rnnt_loss: need at least one frame");
  if (L.rank() != 2 || L.rows() != t_len * u_len)
    throw ShapeError("rnnt_loss: lattice rows must be T*(U+1)");
  for (int label : labels) {
    if (label == blank) throw ValidationError("rnnt_loss: blank inside labels");
    if (label < 0 || label >= vocab)
      throw ValidationError("rnnt_loss: label out of vocabulary");
  }
  if (!AllFinite(L)) throw NumericError("rnnt_loss: non-finite lattice");

  auto lp = [&](int64_t t, int64_t u, int v) -> double {
    return static_cast<double>(L.at(t * u_len + u, v));
  };

  // Forward variable: alpha(t,u) = log P(consumed t frames, emitted u labels).
  std::vector<double> alpha(static_cast<size_t>(t_len * u_len), NegInf());
  alpha[0] = 0.0;
  for (int64_t t = 0; t < t_len; ++t) {
    for (int64_t u = 0; u < u_len; ++u) {
      if (t == 0 && u == 0) continue;
      double from_blank = t > 0 ? alpha[static_cast<size_t>((t - 1) * u_len + u)] +
                                      lp(t - 1, u, blank)
                                : NegInf();
      double from_label = u > 0 ? alpha[static_cast<size_t>(t * u_len + u - 1)] +
                                      lp(t, u - 1, labels[static_cast<size_t>(u - 1)])
                                : NegInf();
      alpha[static_cast<size_t>(t * u_len + u)] = LogSumExp2(from_blank, from_label);
    }
  }
  double total_alpha =
      alpha[static_cast<size_t>(t_len * u_len - 1)] + lp(t_len - 1, u_len - 1, blank);

  // Backward variable: beta(t,u) = log P(completing from (t,u)), including
  // the final blank at (T-1, U).
  std::vector<double> beta(static_cast<size_t>(t_len * u_len), NegInf());
  for (int64_t t = t_len - 1; t >= 0; --t) {
    for (int64_t u = u_len - 1; u >= 0; --u) {
      if (t == t_len - 1 && u == u_len - 1) {
        beta[static_cast<size_t>(t * u_len + u)] = lp(t, u, blank);
        continue;
      }
      double via_blank = t + 1 < t_len ? lp(t, u, blank) +
                                             beta[static_cast<size_t>((t + 1) * u_len + u)]
                                       : NegInf();
      double via_label = u + 1 < u_len
                             ? lp(t, u, labels[static_cast<size_t>(u)]) +
                                   beta[static_cast<size_t>(t * u_len + u + 1)]
                             : NegInf();
      beta[static_cast<size_t>(t * u_len + u)] = LogSumExp2(via_blank, via_label);
    }
  }
  double total_beta = beta[0];

  if (diag != nullptr) {
    diag->alpha = alpha;
    diag->beta = beta;
    diag->total_from_alpha = total_alpha;
    diag->total_from_beta = total_beta;
    diag->t_len = t_len;
    diag->u_len = u_len;
  }
  if (!std::isfinite(total_beta))
    throw NumericError("rnnt_loss: no alignment has finite probability");

  double loss = -total_beta;
  std::vector<int> labels_copy = labels;
  return CustomOp<Real>(
      "rnnt_loss", TensorT<Real>::Scalar(static_cast<Real>(loss)), {lattice},
      [t_len, u_len, blank, labels_copy, alpha, beta, total_beta](Node<Real>& node) {
        auto& p = *node.parents[0];
        if (!p.requires_grad) return;
        p.EnsureGrad();
        Real gout = node.grad.data[0];
        int64_t vocab = p.value.shape[1];
        for (int64_t t = 0; t < t_len; ++t) {
          for (int64_t u = 0; u < u_len; ++u) {
            double a = alpha[static_cast<size_t>(t * u_len + u)];
            if (a == NegInf()) continue;
            size_t row = static_cast<size_t>((t * u_len + u) * vocab);
            double lp_blank = static_cast<double>(p.value.data[row + static_cast<size_t>(blank)]);
            // Occupancy of the blank transition out of (t,u).
            double beta_next_blank;
            if (t == t_len - 1 && u == u_len - 1)
              beta_next_blank = 0.0;
            else if (t + 1 < t_len)
              beta_next_blank = beta[static_cast<size_t>((t + 1) * u_len + u)];
            else
              beta_next_blank = NegInf();
            if (beta_next_blank != NegInf()) {
              double occ = std::exp(a + lp_blank + beta_next_blank - total_beta);
              p.grad.data[row + static_cast<size_t>(blank)] -=
                  static_cast<Real>(occ) * gout;
            }
            if (u + 1 < u_len) {
              int label = labels_copy[static_cast<size_t>(u)];
              double lp_label = static_cast<double>(p.value.data[row + static_cast<size_t>(label)]);
              double beta_next = beta[static_cast<size_t>(t * u_len + u + 1)];
              if (beta_next != NegInf()) {
                double occ = std::exp(a + lp_label + beta_next - total_beta);
                p.grad.data[row + static_cast<size_t>(label)] -=
                    static_cast<Real>(occ) * gout;
              }
            }
          }
        }
      });
}

enum class EncoderSource { kCausal, kNoncausal };

// Per-utterance draw of the encoder source fed to the transducer during
// training: causal with probability p_causal, non-causal otherwise.
// Evaluation paths must pass an explicit source instead of sampling.
inline EncoderSource SelectEncoderSource(SeededRng& rng, double p_causal = 0.4,
                                         double p_noncausal = 0.6) {
  if (p_causal < 0 || p_noncausal < 0 ||
      std::abs(p_causal + p_noncausal - 1.0) > 1e-9)
    throw ValidationError("select_encoder_source: probabilities must sum to 1");
  return rng.Uniform() < p_causal ? EncoderSource::kCausal : EncoderSource::kNoncausal;
}

}  // namespace dasr

#endif  // DASR_TRANSDUCER_HPP_
