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

#ifndef DASR_DELIB_HPP_
#define DASR_DELIB_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "dasr/conformer.hpp"
#include "dasr/lstm.hpp"
#include "dasr/search.hpp"

namespace dasr {

struct DelibGeometry {
  enum class TextEncKind { kBiLstm, kConformer };
  TextEncKind text_kind = TextEncKind::kBiLstm;
  int text_layers = 2;
  int64_t text_dim = 2048;  // bilstm: total cell across directions; conformer: layer dim
  int64_t text_proj = 1024;  // bilstm output dim (split across directions)
  int64_t embed_dim = 512;
  int text_lookahead = 4;  // conformer text encoder: total future tokens
  int text_heads = 8;
  int text_conv_kernel = 7;
  int dec_layers = 4;
  int64_t dec_hidden = 2048;
  int64_t dec_proj = 512;
  int dec_heads = 8;
  int64_t max_positions = 256;
  double lambda = 0.0;
  double label_smoothing = 0.1;
  int64_t vocab = 16384;

  static DelibGeometry FromConfig(const RunConfig& cfg, int64_t vocab_size) {
    DelibGeometry g;
    std::string kind = cfg.GetStr("delib.text_encoder.kind");
    if (kind == "bilstm")
      g.text_kind = TextEncKind::kBiLstm;
    else if (kind == "conformer")
      g.text_kind = TextEncKind::kConformer;
    else
      throw ValidationError("delib: unknown text encoder kind '" + kind + "'");
    g.text_layers = static_cast<int>(cfg.GetInt("delib.text_encoder.layers"));
    g.text_dim = cfg.GetInt("delib.text_encoder.dim");
    g.text_proj = cfg.GetInt("delib.text_encoder.proj");
    g.embed_dim = cfg.GetInt("delib.text_encoder.embed_dim");
    g.text_lookahead = static_cast<int>(cfg.GetInt("delib.text_encoder.lookahead"));
    g.text_heads = static_cast<int>(cfg.GetInt("delib.text_encoder.heads"));
    g.text_conv_kernel = static_cast<int>(cfg.GetInt("delib.text_encoder.conv_kernel"));
    g.dec_layers = static_cast<int>(cfg.GetInt("delib.decoder.layers"));
    g.dec_hidden = cfg.GetInt("delib.decoder.hidden");
    g.dec_proj = cfg.GetInt("delib.decoder.proj");
    g.dec_heads = static_cast<int>(cfg.GetInt("delib.decoder.heads"));
    g.max_positions = cfg.GetInt("delib.decoder.max_positions");
    g.lambda = cfg.GetFloat("delib.lambda");
    g.label_smoothing = cfg.GetFloat("delib.label_smoothing");
    g.vocab = vocab_size;
    if (g.dec_proj % g.dec_heads != 0)
      throw ValidationError("delib: decoder proj must be divisible by heads");
    if (g.lambda < 0.0 || g.lambda > 1.0)
      throw ValidationError("delib: lambda must lie in [0,1]");
    return g;
  }

  int64_t TextOutDim() const {
    return text_kind == TextEncKind::kBiLstm ? text_proj : text_dim;
  }
};

// Multilingual text encoder over sampled first-pass hypotheses. The
// bidirectional LSTM sees the whole sequence from both directions; the
// conformer variant is causal except for a fixed total lookahead carried by
// its first layer, so position s never depends on tokens beyond s+lookahead.
// An empty hypothesis is represented by a learned null-context vector.
template <typename Real>
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(ParamHost<Real>& host, const std::string& prefix, const DelibGeometry& geom)
      : geom_(geom) {
    embed_ = host.Create(prefix + "/embed", {geom.vocab, geom.embed_dim},
                         Init::kEmbedNormal);
    null_ctx_ = host.Create(prefix + "/null_ctx", {1, geom.TextOutDim()}, Init::kXavier);
    if (geom.text_kind == DelibGeometry::TextEncKind::kBiLstm) {
      if (geom.text_dim % 2 != 0 || geom.text_proj % 2 != 0)
        throw ValidationError("delib: bilstm dim and proj must be even");
      int64_t cell = geom.text_dim / 2;
      int64_t proj = geom.text_proj / 2;
      int64_t in = geom.embed_dim;
      for (int l = 0; l < geom.text_layers; ++l) {
        fwd_.emplace_back(host, prefix + "/fwd" + std::to_string(l), in, cell, proj);
        bwd_.emplace_back(host, prefix + "/bwd" + std::to_string(l), in, cell, proj);
        in = geom.text_proj;
      }
    } else {
      in_proj_ = Dense<Real>(host, prefix + "/in_proj", geom.embed_dim, geom.text_dim);
      for (int l = 0; l < geom.text_layers; ++l) {
        int lookahead = l == 0 ? geom.text_lookahead : 0;
        conformer_.emplace_back(host, prefix + "/layer" + std::to_string(l), geom.text_dim,
                                geom.text_heads, geom.text_conv_kernel,
                                /*ffn_multiplier=*/4, lookahead);
      }
    }
  }

  // tokens: blank-stripped frame_sample output. Returns [S, TextOutDim]
  // (the null-context vector when S = 0).
  Var<Real> Forward(const std::vector<int>& tokens) const {
    if (tokens.empty()) return null_ctx_;
    std::vector<int64_t> ids(tokens.begin(), tokens.end());
    Var<Real> x = GatherRows(embed_, ids);
    if (geom_.text_kind == DelibGeometry::TextEncKind::kBiLstm) {
      int64_t s_len = x.rows();
      std::vector<int64_t> rev(static_cast<size_t>(s_len));
      for (int64_t i = 0; i < s_len; ++i) rev[static_cast<size_t>(i)] = s_len - 1 - i;
      for (size_t l = 0; l < fwd_.size(); ++l) {
        Var<Real> f = fwd_[l].Forward(x);
        Var<Real> b = GatherRows(bwd_[l].Forward(GatherRows(x, rev)), rev);
        x = Concat<Real>({f, b}, 1);
      }
      return x;
    }
    x = in_proj_(x);
    for (const auto& layer : conformer_) x = layer.Forward(x);
    return x;
  }

 private:
  DelibGeometry geom_;
  Var<Real> embed_;
  Var<Real> null_ctx_;
  std::vector<LstmLayer<Real>> fwd_, bwd_;
  Dense<Real> in_proj_;
  std::vector<ConformerLayer<Real>> conformer_;
};

// One deliberation decoder layer: causal self-attention, cross-attention to
// the audio encodings, cross-attention to the encoded hypothesis text, then
// the feed-forward block. Pre-norm residual wiring.
template <typename Real>
class TransformerDecoderLayer {
 public:
  TransformerDecoderLayer() = default;
  TransformerDecoderLayer(ParamHost<Real>& host, const std::string& prefix,
                          int64_t dim, int64_t hidden, int heads) {
    self_ln_ = LayerNormLayer<Real>(host, prefix + "/self_ln", dim);
    self_attn_ = MultiHeadAttention<Real>(host, prefix + "/self_attn", dim, heads,
                                          /*relative_bias=*/false);
    audio_ln_ = LayerNormLayer<Real>(host, prefix + "/audio_ln", dim);
    audio_attn_ = MultiHeadAttention<Real>(host, prefix + "/audio_attn", dim, heads,
                                           /*relative_bias=*/false);
    text_ln_ = LayerNormLayer<Real>(host, prefix + "/text_ln", dim);
    text_attn_ = MultiHeadAttention<Real>(host, prefix + "/text_attn", dim, heads,
                                          /*relative_bias=*/false);
    ffn_ln_ = LayerNormLayer<Real>(host, prefix + "/ffn_ln", dim);
    ffn_ = FeedForward<Real>(host, prefix + "/ffn", dim, hidden);
  }

  Var<Real> Forward(const Var<Real>& x, const Var<Real>& audio_ctx,
                    const Var<Real>& text_ctx, bool use_text) const {
    Var<Real> y = Add(x, self_attn_.Self(self_ln_(x), /*lookahead=*/0));
    y = Add(y, audio_attn_.Cross(audio_ln_(y), audio_ctx));
    if (use_text) y = Add(y, text_attn_.Cross(text_ln_(y), text_ctx));
    y = Add(y, ffn_(ffn_ln_(y)));
    return y;
  }

 private:
  LayerNormLayer<Real> self_ln_, audio_ln_, text_ln_, ffn_ln_;
  MultiHeadAttention<Real> self_attn_, audio_attn_, text_attn_;
  FeedForward<Real> ffn_;
};

// Two-source transformer rescoring decoder.
template <typename Real>
class DelibDecoder {
 public:
  DelibDecoder() = default;
  DelibDecoder(ParamHost<Real>& host, const std::string& prefix,
               const DelibGeometry& geom, int64_t audio_dim)
      : geom_(geom) {
    embed_ = host.Create(prefix + "/embed", {geom.vocab, geom.dec_proj},
                         Init::kEmbedNormal);
    pos_ = host.Create(prefix + "/pos", {geom.max_positions, geom.dec_proj},
                       Init::kEmbedNormal);
    audio_proj_ = Dense<Real>(host, prefix + "/audio_proj", audio_dim, geom.dec_proj);
    text_proj_ = Dense<Real>(host, prefix + "/text_proj", geom.TextOutDim(),
                             geom.dec_proj);
    for (int l = 0; l < geom.dec_layers; ++l)
      layers_.emplace_back(host, prefix + "/layer" + std::to_string(l), geom.dec_proj,
                           geom.dec_hidden, geom.dec_heads);
    final_ln_ = LayerNormLayer<Real>(host, prefix + "/final_ln", geom.dec_proj);
    out_ = Dense<Real>(host, prefix + "/out", geom.dec_proj, geom.vocab);
  }

  struct Context {
    Var<Real> audio;  // audio encodings projected to decoder dim
    Var<Real> text;   // encoded hypothesis text projected to decoder dim
  };

  Context PrepareContext(const Var<Real>& audio_enc, const Var<Real>& text_enc) const {
    if (audio_enc.rows() < 1) throw ValidationError("delib: empty audio context");
    return {audio_proj_(audio_enc), text_proj_(text_enc)};
  }

  // inputs: [sos, y1, ..., yU]. Output row i is the log-distribution of the
  // token following inputs[0..i]. Causal masking keeps row i independent of
  // inputs beyond i.
  Var<Real> ForwardLogProbs(const std::vector<int>& inputs, const Context& ctx,
                            bool use_text = true) const {
    if (inputs.empty()) throw ValidationError("delib: empty decoder input");
    std::vector<int64_t> ids;
    std::vector<int64_t> pos_ids;
    ids.reserve(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i] < 0 || inputs[i] >= geom_.vocab)
        throw ValidationError("delib: token out of vocabulary");
      ids.push_back(inputs[i]);
      pos_ids.push_back(std::min<int64_t>(static_cast<int64_t>(i), geom_.max_positions - 1));
    }
    Var<Real> x = Add(GatherRows(embed_, ids), GatherRows(pos_, pos_ids));
    for (const auto& layer : layers_) x = layer.Forward(x, ctx.audio, ctx.text, use_text);
    return LogSoftmax(out_(final_ln_(x)));
  }

  const DelibGeometry& geometry() const { return geom_; }

 private:
  DelibGeometry geom_;
  Var<Real> embed_, pos_;
  Dense<Real> audio_proj_, text_proj_;
  std::vector<TransformerDecoderLayer<Real>> layers_;
  LayerNormLayer<Real> final_ln_;
  Dense<Real> out_;
};

// Deliberation rescorer: text encoder + two-source decoder. Only these
// parameters train during second-pass optimization; the first pass stays
// frozen.
template <typename Real>
class DelibModel {
 public:
  DelibModel(ParamHost<Real>& host, const RunConfig& cfg, int64_t vocab_size,
             int64_t audio_dim)
      : geom_(DelibGeometry::FromConfig(cfg, vocab_size)),
        text_encoder_(host, "delib/text_enc", geom_),
        decoder_(host, "delib/dec", geom_, audio_dim) {}

  using Context = typename DelibDecoder<Real>::Context;

  // audio_enc: the non-causal encodings e. sampled: blank-stripped
  // frame_sample output (both training and inference).
  Context PrepareContext(const Var<Real>& audio_enc, const std::vector<int>& sampled) const {
    return decoder_.PrepareContext(audio_enc, text_encoder_.Forward(sampled));
  }

  // Teacher-forced hypothesis log-probability: sum of log P(token_i | ...)
  // plus log P(eos | full hypothesis). All positions are computed in one
  // masked forward pass, so scoring is token-parallel.
  double ScoreHypothesis(const std::vector<int>& tokens, const Context& ctx) const {
    if (tokens.empty()) throw ValidationError("delib: cannot score empty hypothesis");
    Var<Real> logp = ForwardForTargets(tokens, ctx);
    const auto& L = logp.value();
    std::vector<int> targets = WithEos(tokens);
    double score = 0.0;
    for (size_t i = 0; i < targets.size(); ++i)
      score += static_cast<double>(L.at(static_cast<int64_t>(i), targets[i]));
    return score;
  }

  // Label-smoothed cross entropy against the ground-truth transcript,
  // averaged per target token. Returns the loss node for backward.
  Var<Real> TrainLoss(const std::vector<int>& truth, const Context& ctx) const {
    if (truth.empty()) throw ValidationError("delib: empty training target");
    Var<Real> logp = ForwardForTargets(truth, ctx);
    std::vector<int> targets = WithEos(truth);
    int64_t n = static_cast<int64_t>(targets.size());
    int64_t vocab = geom_.vocab;
    double eps = geom_.label_smoothing;
    TensorT<Real> q({n, vocab});
    Real off = static_cast<Real>(eps / static_cast<double>(vocab));
    Real on = static_cast<Real>(1.0 - eps + eps / static_cast<double>(vocab));
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t v = 0; v < vocab; ++v) q.at(i, v) = off;
      q.at(i, targets[static_cast<size_t>(i)]) = on;
    }
    Var<Real> weighted = Mul(logp, Var<Real>::Constant(std::move(q)));
    return Scale(ReduceSum(weighted), static_cast<Real>(-1.0 / static_cast<double>(n)));
  }

  const DelibGeometry& geometry() const { return geom_; }
  const DelibDecoder<Real>& decoder() const { return decoder_; }
  const TextEncoder<Real>& text_encoder() const { return text_encoder_; }

  Var<Real> ForwardForTargets(const std::vector<int>& tokens, const Context& ctx,
                              bool use_text = true) const {
    std::vector<int> inputs;
    inputs.reserve(tokens.size() + 1);
    inputs.push_back(WordpieceVocab::kSosId);
    inputs.insert(inputs.end(), tokens.begin(), tokens.end());
    return decoder_.ForwardLogProbs(inputs, ctx, use_text);
  }

  static std::vector<int> WithEos(const std::vector<int>& tokens) {
    std::vector<int> targets = tokens;
    targets.push_back(WordpieceVocab::kEosId);
    return targets;
  }

 private:
  DelibGeometry geom_;
  TextEncoder<Real> text_encoder_;
  DelibDecoder<Real> decoder_;
};

// Reranks an n-best list by (1-lambda) * delib_logp + lambda *
// first_pass_logp. Ties keep the original first-pass order; the result is a
// permutation of the input.
inline NBestList Rescore(const NBestList& nbest, const std::vector<double>& delib_scores,
                         double lambda) {
  if (nbest.hyps.empty()) throw ValidationError("rescore: empty n-best");
  if (delib_scores.size() != nbest.hyps.size())
    throw ValidationError("rescore: score count mismatch");
  if (lambda < 0.0 || lambda > 1.0)
    throw ValidationError("rescore: lambda must lie in [0,1]");
  std::vector<size_t> order(nbest.hyps.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    double ka = (1.0 - lambda) * delib_scores[a] + lambda * nbest.hyps[a].first_pass_logp;
    double kb = (1.0 - lambda) * delib_scores[b] + lambda * nbest.hyps[b].first_pass_logp;
    return ka > kb;
  });
  NBestList out;
  out.hyps.reserve(nbest.hyps.size());
  for (size_t i : order) {
    Hypothesis hyp = nbest.hyps[i];
    hyp.delib_logp = delib_scores[i];
    out.hyps.push_back(std::move(hyp));
  }
  return out;
}

}  // namespace dasr

#endif  // DASR_DELIB_HPP_
