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
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dasr/runner.hpp"

namespace {

// Exit codes: 0 success, 2 validation error, 3 runtime numeric failure.
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

dasr::RunConfig LoadConfig(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  dasr::RunConfig cfg =
      config_path.empty() ? dasr::RunConfig::Defaults() : dasr::RunConfig::FromFile(config_path);
  for (const auto& o : overrides) cfg.ApplyOverride(o);
  return cfg;
}

// decode/rescore default to the config echoed into the checkpoint's run dir.
std::string SiblingConfig(const std::string& ckpt) {
  std::filesystem::path p(ckpt);
  auto candidate = p.parent_path() / "config.txt";
  return std::filesystem::exists(candidate) ? candidate.string() : std::string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dasr: two-pass multilingual speech recognition at desk scale"};
  app.require_subcommand(1);

  std::vector<std::string> overrides;
  app.add_option("--set", overrides, "config override key=value (repeatable)")
      ->take_all();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic multilingual corpus");
  std::string gen_spec, gen_out;
  uint64_t gen_seed = 42;
  gen->add_option("--spec", gen_spec, "corpus spec json (default: builtin 3 languages)");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generation seed");

  // train-first-pass
  auto* tfp = app.add_subcommand("train-first-pass", "train the transducer first pass");
  std::string tfp_config, tfp_data, tfp_out, tfp_resume;
  tfp->add_option("--config", tfp_config, "config file")->required();
  tfp->add_option("--data", tfp_data, "corpus directory")->required();
  tfp->add_option("--out", tfp_out, "run directory")->required();
  tfp->add_option("--resume", tfp_resume, "resume from a training checkpoint");

  // train-delib
  auto* tdl = app.add_subcommand("train-delib", "train the deliberation rescorer");
  std::string tdl_config, tdl_fp, tdl_vocab, tdl_data, tdl_out, tdl_resume;
  tdl->add_option("--config", tdl_config, "config file")->required();
  tdl->add_option("--first-pass-ckpt", tdl_fp, "frozen first-pass checkpoint")->required();
  tdl->add_option("--vocab", tdl_vocab, "vocab file (default: next to the checkpoint)");
  tdl->add_option("--data", tdl_data, "corpus directory")->required();
  tdl->add_option("--out", tdl_out, "run directory")->required();
  tdl->add_option("--resume", tdl_resume, "resume from a training checkpoint");

  // decode
  auto* dec = app.add_subcommand("decode", "first-pass beam search to an n-best file");
  std::string dec_config, dec_ckpt, dec_vocab, dec_data, dec_split = "test";
  std::string dec_source = "noncausal", dec_out;
  int dec_beam = 8, dec_workers = 1;
  dec->add_option("--config", dec_config, "config file (default: config.txt next to ckpt)");
  dec->add_option("--ckpt", dec_ckpt, "checkpoint with evaluation weights")->required();
  dec->add_option("--vocab", dec_vocab, "vocab file (default: next to the checkpoint)");
  dec->add_option("--data", dec_data, "corpus directory")->required();
  dec->add_option("--split", dec_split, "corpus split (train/dev/test)");
  dec->add_option("--beam", dec_beam, "beam size");
  dec->add_option("--source", dec_source, "encoder source: causal or noncausal");
  dec->add_option("--out", dec_out, "output directory")->required();
  dec->add_option("--workers", dec_workers, "parallel utterance workers");

  // rescore
  auto* res = app.add_subcommand("rescore", "rescore an n-best file with deliberation");
  std::string res_config, res_ckpt, res_vocab, res_nbest, res_data, res_split = "test";
  std::string res_out;
  double res_lambda = 0.0;
  int res_workers = 1;
  res->add_option("--config", res_config, "config file (default: config.txt next to ckpt)");
  res->add_option("--delib-ckpt", res_ckpt, "deliberation checkpoint")->required();
  res->add_option("--vocab", res_vocab, "vocab file (default: next to the checkpoint)");
  res->add_option("--nbest", res_nbest, "first-pass n-best file")->required();
  res->add_option("--data", res_data, "corpus directory")->required();
  res->add_option("--split", res_split, "corpus split the n-best came from");
  res->add_option("--lambda", res_lambda, "first-pass score interpolation in [0,1]");
  res->add_option("--out", res_out, "output directory")->required();
  res->add_option("--workers", res_workers, "parallel utterance workers");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "word error rate report");
  std::string ev_hyp, ev_ref, ev_langs, ev_out;
  ev->add_option("--hyp", ev_hyp, "hypotheses: id\\ttext")->required();
  ev->add_option("--ref", ev_ref, "references: id\\tlanguage\\ttext")->required();
  ev->add_option("--languages", ev_langs, "languages.tsv for logographic flags");
  ev->add_option("--out", ev_out, "write the machine-readable report here");

  // params
  auto* par = app.add_subcommand("params", "parameter count for a configuration");
  std::string par_config;
  par->add_option("--config", par_config, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      dasr::RunGenData(gen_spec, gen_out, gen_seed);
      std::cout << "corpus written to " << gen_out << "\n";
    } else if (*tfp) {
      auto cfg = LoadConfig(tfp_config, overrides);
      auto result = dasr::RunTrainFirstPass(cfg, tfp_data, tfp_out, tfp_resume);
      std::cout << "final loss " << result.final_loss << " after " << result.steps
                << " steps\ncheckpoint " << result.ckpt_eval << "\n";
    } else if (*tdl) {
      auto cfg = LoadConfig(tdl_config, overrides);
      auto result =
          dasr::RunTrainDelib(cfg, tdl_fp, tdl_vocab, tdl_data, tdl_out, tdl_resume);
      std::cout << "final loss " << result.final_loss << " after " << result.steps
                << " steps\ncheckpoint " << result.ckpt_eval << "\n";
    } else if (*dec) {
      if (dec_config.empty()) dec_config = SiblingConfig(dec_ckpt);
      auto cfg = LoadConfig(dec_config, overrides);
      auto result = dasr::RunDecode(cfg, dec_ckpt, dec_vocab, dec_data, dec_split,
                                    dec_beam, dec_source, dec_out, dec_workers);
      std::cout << "n-best " << result.nbest_path << "\ntop-1 " << result.top1_path
                << "\n";
    } else if (*res) {
      if (res_config.empty()) res_config = SiblingConfig(res_ckpt);
      auto cfg = LoadConfig(res_config, overrides);
      auto result = dasr::RunRescore(cfg, res_ckpt, res_vocab, res_nbest, res_data,
                                     res_split, res_lambda, res_out, res_workers);
      std::cout << "reranked " << result.nbest_path << "\nselection "
                << result.selection_path << "\n";
    } else if (*ev) {
      auto report = dasr::RunEvaluate(ev_hyp, ev_ref, ev_langs, ev_out);
      std::cout << dasr::RenderTable({report});
    } else if (*par) {
      auto cfg = LoadConfig(par_config, overrides);
      auto report = dasr::RunParams(cfg);
      std::cout << "total        " << dasr::FormatParamCount(report.total) << "\n"
                << "first_pass   " << dasr::FormatParamCount(report.first_pass) << "\n"
                << "  encoder    " << dasr::FormatParamCount(report.first_pass_encoder)
                << "\n"
                << "  noncausal  " << dasr::FormatParamCount(report.first_pass_noncausal)
                << "\n"
                << "delib        " << dasr::FormatParamCount(report.delib_total) << "\n"
                << "  text_enc   " << dasr::FormatParamCount(report.delib_text_encoder)
                << "\n"
                << "  decoder    " << dasr::FormatParamCount(report.delib_decoder)
                << "\n";
    }
  } catch (const dasr::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const dasr::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
