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

#include "dasr/runner.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <thread>

#include "dasr/delib.hpp"
#include "dasr/model.hpp"
#include "dasr/optim.hpp"
#include "dasr/search.hpp"
#include "dasr/synth.hpp"

namespace dasr {

namespace {

namespace fs = std::filesystem;

// Runs fn(i) for i in [0, n) over `workers` threads; results land in index
// order so downstream output is deterministic regardless of scheduling.
template <typename Result>
std::vector<Result> ParallelMapOrdered(size_t n, int workers,
                                       const std::function<Result(size_t)>& fn) {
  std::vector<Result> results(n);
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= n) break;
      results[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(static_cast<size_t>(count));
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

struct CorpusSplit {
  std::vector<FeatureMatrix> features;  // raw 10-ms frames, preloaded
  std::vector<Transcript> transcripts;  // aligned by index with features
  std::vector<std::vector<int>> token_ids;
  std::set<std::string> logographic;
};

CorpusSplit LoadSplit(const std::string& data_dir, const std::string& split,
                      const WordpieceVocab* vocab) {
  CorpusSplit out;
  for (const auto& lang : ReadLogographicLanguages(data_dir + "/languages.tsv"))
    out.logographic.insert(lang);
  FeatureReader reader(data_dir + "/" + split);
  auto transcripts = ReadTranscripts(data_dir + "/" + split + ".text");
  std::map<std::string, const Transcript*> by_id;
  for (const auto& t : transcripts) by_id[t.utterance_id] = &t;
  for (size_t i = 0; i < reader.entries().size(); ++i) {
    out.features.push_back(reader.Load(i));
    auto it = by_id.find(reader.entries()[i].utterance_id);
    if (it == by_id.end())
      throw ValidationError("corpus: transcript missing for " +
                            reader.entries()[i].utterance_id);
    out.transcripts.push_back(*it->second);
    if (vocab != nullptr) {
      bool logo = out.logographic.count(it->second->language_id) > 0;
      out.token_ids.push_back(Segment(it->second->text, *vocab, logo).ids);
    }
  }
  return out;
}

SpecAugmentConfig SpecAugFromConfig(const RunConfig& cfg) {
  SpecAugmentConfig sa;
  sa.freq_masks = static_cast<int>(cfg.GetInt("frontend.freq_masks"));
  sa.max_freq = static_cast<int>(cfg.GetInt("frontend.max_freq"));
  sa.time_masks = static_cast<int>(cfg.GetInt("frontend.time_masks"));
  sa.max_time = static_cast<int>(cfg.GetInt("frontend.max_time"));
  return sa;
}

void AppendAll(NamedTensorList& dst, const NamedTensorList& src) {
  for (const auto& item : src) dst.push_back(item);
}

std::string DirName(const std::string& path) {
  fs::path p(path);
  return p.parent_path().string();
}

std::vector<std::pair<std::string, std::string>> ReadSelection(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("evaluate: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw ValidationError("evaluate: malformed hypothesis line: " + line);
    size_t t2 = line.find('\t', t1 + 1);
    // Accept id\ttext and id\tlanguage\ttext.
    std::string text =
        t2 == std::string::npos ? line.substr(t1 + 1) : line.substr(t2 + 1);
    out.emplace_back(line.substr(0, t1), text);
  }
  return out;
}

}  // namespace

void RunGenData(const std::string& spec_path, const std::string& out_dir, uint64_t seed) {
  CorpusSpec spec =
      spec_path.empty() ? CorpusSpec::Default() : CorpusSpec::FromJsonFile(spec_path);
  GenerateCorpus(spec, out_dir, seed);
}

TrainResult RunTrainFirstPass(const RunConfig& cfg, const std::string& data_dir,
                              const std::string& out_dir,
                              const std::string& resume_ckpt) {
  fs::create_directories(out_dir);
  cfg.SaveEcho(out_dir + "/config.txt");
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("train.seed"));

  // The pooled multilingual wordpiece inventory comes from the training
  // transcripts; it rides along with every checkpoint of this run.
  auto transcripts = ReadTranscripts(data_dir + "/train.text");
  std::set<std::string> logographic;
  for (const auto& lang : ReadLogographicLanguages(data_dir + "/languages.tsv"))
    logographic.insert(lang);
  std::vector<CorpusText> corpus_texts;
  corpus_texts.reserve(transcripts.size());
  for (const auto& t : transcripts)
    corpus_texts.push_back({t.text, logographic.count(t.language_id) > 0});
  WordpieceVocab vocab =
      TrainWordpieces(corpus_texts, static_cast<int>(cfg.GetInt("vocab.size")),
                      static_cast<int>(cfg.GetInt("vocab.count_threshold")));
  vocab.Save(out_dir + "/vocab.txt");

  CorpusSplit train = LoadSplit(data_dir, "train", &vocab);
  if (train.features.empty()) throw ValidationError("train: empty corpus");

  ParamStore<float> store(seed);
  FirstPassModel<float> model(store, cfg, vocab.size());
  auto optimizer = MakeOptimizer<float>(cfg.GetStr("train.optimizer"));
  ScheduleConfig schedule = ScheduleConfig::FromConfig(cfg);
  EmaTracker<float> ema(store, cfg.GetFloat("train.ema_decay"));
  double grad_cap = cfg.GetFloat("train.grad_cap");
  int64_t batch_size = cfg.GetInt("train.batch_size");
  int64_t total_steps = cfg.GetInt("train.steps");
  int64_t ckpt_every = cfg.GetInt("train.checkpoint_every");
  bool specaug_on = cfg.GetBool("frontend.specaug");
  SpecAugmentConfig sa = SpecAugFromConfig(cfg);
  double p_causal = cfg.GetFloat("train.causal_prob");
  double p_noncausal = cfg.GetFloat("train.noncausal_prob");

  if (!resume_ckpt.empty()) {
    NamedTensorList items = LoadCheckpoint(resume_ckpt);
    store.ImportFloat32(items, "first_pass/");
    optimizer->ImportState(items);
    ema.ImportState(items);
  }
  int64_t start_step = optimizer->step_count();

  auto save_train_ckpt = [&](const std::string& path) {
    NamedTensorList items = store.ExportFloat32();
    AppendAll(items, ema.ExportState());
    AppendAll(items, optimizer->ExportState());
    SaveCheckpoint(path, items);
  };

  std::ofstream loss_log(out_dir + "/loss.log", resume_ckpt.empty()
                                                    ? std::ios::trunc
                                                    : std::ios::app);
  double last_loss = 0;
  size_t n_utts = train.features.size();
  for (int64_t step = start_step + 1; step <= total_steps; ++step) {
    double lr = LrAt(step, schedule);
    store.ZeroGrads();
    SeededRng batch_rng = DeriveRng(seed, "batch", static_cast<uint64_t>(step));
    double loss_acc = 0;
    for (int64_t b = 0; b < batch_size; ++b) {
      size_t idx = static_cast<size_t>(
          batch_rng.UniformInt(0, static_cast<int64_t>(n_utts) - 1));
      FeatureMatrix raw = train.features[idx];
      if (specaug_on) {
        SeededRng sa_rng = DeriveRng(seed, "specaug", static_cast<uint64_t>(step),
                                     static_cast<uint64_t>(b));
        raw = SpecAugment(raw, sa, sa_rng);
      }
      FeatureMatrix stacked = StackFrames(raw);
      auto enc = model.Encode(stacked);
      SeededRng src_rng =
          DeriveRng(seed, "src", static_cast<uint64_t>(step), static_cast<uint64_t>(b));
      EncoderSource src = SelectEncoderSource(src_rng, p_causal, p_noncausal);
      const Var<float>& e = src == EncoderSource::kCausal ? enc.causal : enc.noncausal;
      const std::vector<int>& labels = train.token_ids[idx];
      Var<float> pred_states = model.pred().Forward(labels);
      Var<float> lattice = model.joint().FullLattice(e, pred_states);
      Var<float> loss = RnntLoss(lattice, e.rows(), labels);
      double per_label = static_cast<double>(loss.value().data[0]) /
                         static_cast<double>(labels.size() + 1);
      loss_acc += per_label;
      // Mean over the batch of per-label losses; backward in batch order so
      // gradient accumulation is bit-reproducible.
      Backward(Scale(loss, static_cast<float>(
                               1.0 / (static_cast<double>(batch_size) *
                                      static_cast<double>(labels.size() + 1)))));
    }
    optimizer->Step(store, lr, grad_cap);
    ema.Update(store);
    last_loss = loss_acc / static_cast<double>(batch_size);
    char line[128];
    std::snprintf(line, sizeof(line), "%lld\t%.6f\t%.8f", static_cast<long long>(step),
                  last_loss, lr);
    loss_log << line << '\n';
    if (ckpt_every > 0 && step % ckpt_every == 0)
      save_train_ckpt(out_dir + "/ckpt_train.bin");
  }
  loss_log.flush();

  TrainResult result;
  result.final_loss = last_loss;
  result.steps = total_steps;
  result.ckpt_train = out_dir + "/ckpt_train.bin";
  result.ckpt_eval = out_dir + "/ckpt_eval.bin";
  save_train_ckpt(result.ckpt_train);
  SaveCheckpoint(result.ckpt_eval, ema.ExportState(/*prefix=*/""));
  return result;
}

TrainResult RunTrainDelib(const RunConfig& cfg, const std::string& first_pass_ckpt,
                          const std::string& vocab_path, const std::string& data_dir,
                          const std::string& out_dir, const std::string& resume_ckpt) {
  fs::create_directories(out_dir);
  cfg.SaveEcho(out_dir + "/config.txt");
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("train.seed"));

  std::string vpath = vocab_path.empty() ? DirName(first_pass_ckpt) + "/vocab.txt"
                                         : vocab_path;
  WordpieceVocab vocab = WordpieceVocab::Load(vpath);
  vocab.Save(out_dir + "/vocab.txt");

  CorpusSplit train = LoadSplit(data_dir, "train", &vocab);
  if (train.features.empty()) throw ValidationError("train: empty corpus");

  // Frozen first pass: parameters are loaded once and never receive
  // gradients; its tensors are exported back out byte-identical.
  ParamStore<float> fp_store(seed, /*trainable=*/false);
  FirstPassModel<float> first_pass(fp_store, cfg, vocab.size());
  NamedTensorList fp_items = LoadCheckpoint(first_pass_ckpt);
  fp_store.ImportFloat32(fp_items, "first_pass/");

  ParamStore<float> delib_store(seed + 1);
  DelibModel<float> delib(delib_store, cfg, vocab.size(),
                          first_pass.enc_geometry().dim);
  auto optimizer = MakeOptimizer<float>(cfg.GetStr("train.optimizer"));
  ScheduleConfig schedule = ScheduleConfig::FromConfig(cfg);
  EmaTracker<float> ema(delib_store, cfg.GetFloat("train.ema_decay"));
  double grad_cap = cfg.GetFloat("train.grad_cap");
  int64_t batch_size = cfg.GetInt("train.batch_size");
  int64_t total_steps = cfg.GetInt("train.steps");
  int64_t ckpt_every = cfg.GetInt("train.checkpoint_every");

  if (!resume_ckpt.empty()) {
    NamedTensorList items = LoadCheckpoint(resume_ckpt);
    delib_store.ImportFloat32(items, "delib/");
    optimizer->ImportState(items);
    ema.ImportState(items);
  }
  int64_t start_step = optimizer->step_count();

  auto save_train_ckpt = [&](const std::string& path) {
    NamedTensorList items = fp_store.ExportFloat32();
    AppendAll(items, delib_store.ExportFloat32());
    AppendAll(items, ema.ExportState());
    AppendAll(items, optimizer->ExportState());
    SaveCheckpoint(path, items);
  };
  auto save_eval_ckpt = [&](const std::string& path) {
    NamedTensorList items = fp_store.ExportFloat32();
    AppendAll(items, ema.ExportState(/*prefix=*/""));
    SaveCheckpoint(path, items);
  };

  std::ofstream loss_log(out_dir + "/loss.log", resume_ckpt.empty()
                                                    ? std::ios::trunc
                                                    : std::ios::app);
  double last_loss = 0;
  size_t n_utts = train.features.size();
  for (int64_t step = start_step + 1; step <= total_steps; ++step) {
    double lr = LrAt(step, schedule);
    delib_store.ZeroGrads();
    SeededRng batch_rng = DeriveRng(seed, "batch", static_cast<uint64_t>(step));
    double loss_acc = 0;
    for (int64_t b = 0; b < batch_size; ++b) {
      size_t idx = static_cast<size_t>(
          batch_rng.UniformInt(0, static_cast<int64_t>(n_utts) - 1));
      FeatureMatrix stacked = StackFrames(train.features[idx]);
      auto enc = first_pass.Encode(stacked);
      // Hypothesis feed: per-frame sampling through the frozen first pass.
      SeededRng sample_rng = DeriveRng(seed, "sample", static_cast<uint64_t>(step),
                                       static_cast<uint64_t>(b));
      auto sampled = FrameSample(first_pass.pred(), first_pass.joint(), enc.noncausal,
                                 sample_rng);
      auto ctx = delib.PrepareContext(enc.noncausal, sampled.stripped);
      Var<float> loss = delib.TrainLoss(train.token_ids[idx], ctx);
      loss_acc += static_cast<double>(loss.value().data[0]);
      Backward(Scale(loss, static_cast<float>(1.0 / static_cast<double>(batch_size))));
    }
    optimizer->Step(delib_store, lr, grad_cap);
    ema.Update(delib_store);
    last_loss = loss_acc / static_cast<double>(batch_size);
    char line[128];
    std::snprintf(line, sizeof(line), "%lld\t%.6f\t%.8f", static_cast<long long>(step),
                  last_loss, lr);
    loss_log << line << '\n';
    if (ckpt_every > 0 && step % ckpt_every == 0)
      save_train_ckpt(out_dir + "/ckpt_train.bin");
  }
  loss_log.flush();

  TrainResult result;
  result.final_loss = last_loss;
  result.steps = total_steps;
  result.ckpt_train = out_dir + "/ckpt_train.bin";
  result.ckpt_eval = out_dir + "/ckpt_eval.bin";
  save_train_ckpt(result.ckpt_train);
  save_eval_ckpt(result.ckpt_eval);
  return result;
}

DecodeResult RunDecode(const RunConfig& cfg, const std::string& ckpt,
                       const std::string& vocab_path, const std::string& data_dir,
                       const std::string& split, int beam, const std::string& source,
                       const std::string& out_dir, int workers) {
  if (source != "causal" && source != "noncausal")
    throw ValidationError("decode: source must be causal or noncausal");
  fs::create_directories(out_dir);
  std::string vpath = vocab_path.empty() ? DirName(ckpt) + "/vocab.txt" : vocab_path;
  WordpieceVocab vocab = WordpieceVocab::Load(vpath);

  ParamStore<float> store(/*init_seed=*/0, /*trainable=*/false);
  FirstPassModel<float> model(store, cfg, vocab.size());
  store.ImportFloat32(LoadCheckpoint(ckpt), "first_pass/");

  CorpusSplit data = LoadSplit(data_dir, split, nullptr);
  int max_sym = static_cast<int>(cfg.GetInt("decode.max_symbols_per_frame"));

  auto decode_one = [&](size_t i) -> NBestList {
    FeatureMatrix stacked = StackFrames(data.features[i]);
    Var<float> enc;
    if (source == "causal") {
      enc = model.EncodeCausalOnly(stacked);
    } else {
      enc = model.Encode(stacked).noncausal;
    }
    return BeamSearch(model.pred(), model.joint(), enc, beam, max_sym);
  };
  std::vector<NBestList> nbests =
      ParallelMapOrdered<NBestList>(data.features.size(), workers, decode_one);

  DecodeResult result;
  result.nbest_path = out_dir + "/nbest.tsv";
  result.top1_path = out_dir + "/top1.tsv";
  std::vector<std::pair<std::string, NBestList>> items;
  for (size_t i = 0; i < nbests.size(); ++i)
    items.emplace_back(data.features[i].utterance_id, std::move(nbests[i]));
  WriteNBest(result.nbest_path, items);
  std::ofstream top1(result.top1_path, std::ios::trunc);
  for (const auto& [utt, nbest] : items) {
    top1 << utt << '\t'
         << (nbest.hyps.empty() ? "" : Decode(nbest.hyps[0].tokens, vocab)) << '\n';
  }
  return result;
}

RescoreResult RunRescore(const RunConfig& cfg, const std::string& delib_ckpt,
                         const std::string& vocab_path, const std::string& nbest_path,
                         const std::string& data_dir, const std::string& split,
                         double lambda, const std::string& out_dir, int workers) {
  fs::create_directories(out_dir);
  std::string vpath = vocab_path.empty() ? DirName(delib_ckpt) + "/vocab.txt" : vocab_path;
  WordpieceVocab vocab = WordpieceVocab::Load(vpath);

  ParamStore<float> store(/*init_seed=*/0, /*trainable=*/false);
  FirstPassModel<float> first_pass(store, cfg, vocab.size());
  DelibModel<float> delib(store, cfg, vocab.size(), first_pass.enc_geometry().dim);
  store.ImportFloat32(LoadCheckpoint(delib_ckpt));

  CorpusSplit data = LoadSplit(data_dir, split, nullptr);
  std::map<std::string, size_t> feature_index;
  for (size_t i = 0; i < data.features.size(); ++i)
    feature_index[data.features[i].utterance_id] = i;

  auto nbest_items = ReadNBest(nbest_path);
  for (const auto& [utt, nbest] : nbest_items) {
    if (!feature_index.count(utt))
      throw ValidationError("rescore: utterance " + utt + " not in feature manifest");
  }
  uint64_t seed = static_cast<uint64_t>(cfg.GetInt("train.seed"));

  auto rescore_one = [&](size_t i) -> NBestList {
    const auto& [utt, nbest] = nbest_items[i];
    const FeatureMatrix& raw = data.features[feature_index.at(utt)];
    auto enc = first_pass.Encode(StackFrames(raw));
    // Sampling stays deterministic per utterance id, independent of file
    // order and worker scheduling.
    SeededRng sample_rng = DeriveRng(seed, "rescore_sample/" + utt);
    auto sampled =
        FrameSample(first_pass.pred(), first_pass.joint(), enc.noncausal, sample_rng);
    auto ctx = delib.PrepareContext(enc.noncausal, sampled.stripped);
    std::vector<double> scores;
    scores.reserve(nbest.hyps.size());
    for (const auto& hyp : nbest.hyps)
      scores.push_back(hyp.tokens.empty() ? -1e30
                                          : delib.ScoreHypothesis(hyp.tokens, ctx));
    return Rescore(nbest, scores, lambda);
  };
  std::vector<NBestList> rescored =
      ParallelMapOrdered<NBestList>(nbest_items.size(), workers, rescore_one);

  RescoreResult result;
  result.nbest_path = out_dir + "/rescored_nbest.tsv";
  result.selection_path = out_dir + "/selection.tsv";
  std::vector<std::pair<std::string, NBestList>> items;
  for (size_t i = 0; i < rescored.size(); ++i)
    items.emplace_back(nbest_items[i].first, std::move(rescored[i]));
  WriteNBest(result.nbest_path, items);
  std::ofstream sel(result.selection_path, std::ios::trunc);
  for (const auto& [utt, nbest] : items) {
    sel << utt << '\t'
        << (nbest.hyps.empty() ? "" : Decode(nbest.hyps[0].tokens, vocab)) << '\n';
  }
  return result;
}

WerReport RunEvaluate(const std::string& hyp_path, const std::string& ref_path,
                      const std::string& languages_tsv, const std::string& out_tsv) {
  auto refs = ReadTranscripts(ref_path);
  std::map<std::string, std::string> hyp_by_id;
  for (const auto& [utt, text] : ReadSelection(hyp_path)) hyp_by_id[utt] = text;
  std::set<std::string> logographic;
  if (!languages_tsv.empty()) {
    for (const auto& lang : ReadLogographicLanguages(languages_tsv))
      logographic.insert(lang);
  }
  WerReport report = ScoreCorpus(refs, hyp_by_id, logographic);
  if (!out_tsv.empty()) {
    std::ofstream os(out_tsv, std::ios::trunc);
    os << RenderTsv(report);
  }
  return report;
}

ParamCountReport RunParams(const RunConfig& cfg) {
  int64_t vocab = cfg.GetInt("vocab.size");
  ParamCounter<float> counter;
  FirstPassModel<float> first_pass(counter, cfg, vocab);
  DelibModel<float> delib(counter, cfg, vocab, first_pass.enc_geometry().dim);
  ParamCountReport report;
  report.total = counter.total();
  report.first_pass = counter.TotalUnder("first_pass/");
  report.first_pass_encoder = counter.TotalUnder("first_pass/encoder/");
  report.first_pass_noncausal = counter.TotalUnder("first_pass/encoder/noncausal");
  report.delib_total = counter.TotalUnder("delib/");
  report.delib_text_encoder = counter.TotalUnder("delib/text_enc/");
  report.delib_decoder = counter.TotalUnder("delib/dec/");
  report.by_component = counter.entries();
  return report;
}

std::string FormatParamCount(int64_t count) {
  char buf[64];
  if (count >= 1000000) {
    std::snprintf(buf, sizeof(buf), "%lld (%lldM)", static_cast<long long>(count),
                  static_cast<long long>((count + 500000) / 1000000));
  } else {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(count));
  }
  return buf;
}

}  // namespace dasr
