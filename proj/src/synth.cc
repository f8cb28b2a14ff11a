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

#include "dasr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "dasr/features_io.hpp"
#include "dasr/rng.hpp"

#include "json.hpp"

namespace dasr {

namespace {

using nlohmann::ordered_json;

struct BuiltLanguage {
  const LanguageSpec* spec;
  std::vector<std::string> lexicon;
  std::vector<std::vector<double>> bigram;  // [V+1][V], row V = start distribution
  std::vector<std::vector<float>> templates;
};

// Latin inventories draw words from per-language syllable alphabets;
// logographic inventories take codepoints from the CJK block. Alphabets are
// chosen per language index so default inventories never collide.
std::vector<std::string> BuildLexicon(const LanguageSpec& spec, size_t lang_index,
                                      SeededRng& rng) {
  static const char* kConsonants[] = {"bdfgk", "lmnpr", "stvzj", "chwqx"};
  static const char* kVowels[] = {"aei", "ou", "ay", "ie"};
  std::set<std::string> seen;
  std::vector<std::string> lexicon;
  if (spec.logographic) {
    // Contiguous CJK codepoints starting at a per-language offset.
    uint32_t base = 0x4e00 + static_cast<uint32_t>(lang_index) * 0x400;
    std::vector<std::string> chars;
    for (int i = 0; i < std::max(spec.lexicon_size / 2 + 2, 8); ++i) {
      uint32_t cp = base + static_cast<uint32_t>(i);
      std::string utf8;
      utf8.push_back(static_cast<char>(0xe0 | (cp >> 12)));
      utf8.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
      utf8.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
      chars.push_back(utf8);
    }
    while (static_cast<int>(lexicon.size()) < spec.lexicon_size) {
      int len = static_cast<int>(rng.UniformInt(1, 2));
      std::string word;
      for (int i = 0; i < len; ++i)
        word += chars[static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(chars.size()) - 1))];
      if (seen.insert(word).second) lexicon.push_back(word);
    }
    return lexicon;
  }
  const std::string consonants = kConsonants[lang_index % 4];
  const std::string vowels = kVowels[lang_index % 4];
  while (static_cast<int>(lexicon.size()) < spec.lexicon_size) {
    int syllables = static_cast<int>(rng.UniformInt(2, 3));
    std::string word;
    for (int s = 0; s < syllables; ++s) {
      word.push_back(consonants[static_cast<size_t>(
          rng.UniformInt(0, static_cast<int64_t>(consonants.size()) - 1))]);
      word.push_back(vowels[static_cast<size_t>(
          rng.UniformInt(0, static_cast<int64_t>(vowels.size()) - 1))]);
    }
    if (seen.insert(word).second) lexicon.push_back(word);
  }
  return lexicon;
}

// Sparse-ish bigram rows: a few preferred successors carry most of the mass,
// which gives a global-context rescorer something to exploit.
std::vector<std::vector<double>> BuildBigram(int vocab, SeededRng& rng) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(vocab) + 1);
  for (int r = 0; r <= vocab; ++r) {
    std::vector<double> row(static_cast<size_t>(vocab), 0.2 / vocab);
    int branch = 3;
    for (int b = 0; b < branch; ++b) {
      int succ = static_cast<int>(rng.UniformInt(0, vocab - 1));
      row[static_cast<size_t>(succ)] += 0.8 / branch;
    }
    double total = 0;
    for (double v : row) total += v;
    for (double& v : row) v /= total;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<float>> BuildTemplates(int vocab, int dim, double noise_sigma,
                                               SeededRng& rng) {
  std::vector<std::vector<float>> templates(static_cast<size_t>(vocab));
  for (auto& t : templates) {
    t.resize(static_cast<size_t>(dim));
    for (auto& v : t) v = static_cast<float>(rng.Uniform(-1.0, 1.0));
  }
  // Templates must stay separable under the configured noise.
  double min_dist = 1e300;
  for (size_t a = 0; a < templates.size(); ++a) {
    for (size_t b = a + 1; b < templates.size(); ++b) {
      double d2 = 0;
      for (int i = 0; i < dim; ++i) {
        double d = static_cast<double>(templates[a][static_cast<size_t>(i)]) -
                   static_cast<double>(templates[b][static_cast<size_t>(i)]);
        d2 += d * d;
      }
      min_dist = std::min(min_dist, std::sqrt(d2));
    }
  }
  if (min_dist <= 6.0 * noise_sigma)
    throw ValidationError("gen_corpus: templates closer than 6*noise_sigma; "
                          "lower noise_sigma or shrink the lexicon");
  return templates;
}

struct SplitPlan {
  const char* name;
  const char* id_tag;
  double noise_scale;
};

}  // namespace

CorpusSpec CorpusSpec::Default() {
  CorpusSpec spec;
  LanguageSpec alpha;
  alpha.name = "alpha";
  alpha.lexicon_size = 30;
  alpha.train_size = 800;
  alpha.dev_size = 100;
  alpha.test_size = 100;
  LanguageSpec beta;
  beta.name = "beta";
  beta.lexicon_size = 24;
  beta.train_size = 480;
  beta.dev_size = 60;
  beta.test_size = 60;
  LanguageSpec gamma;
  gamma.name = "gamma";
  gamma.logographic = true;
  gamma.lexicon_size = 20;
  gamma.train_size = 320;
  gamma.dev_size = 40;
  gamma.test_size = 40;
  spec.languages = {alpha, beta, gamma};
  return spec;
}

CorpusSpec CorpusSpec::FromJsonFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("gen_corpus: cannot open spec " + path);
  ordered_json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("gen_corpus: bad spec json: ") + e.what());
  }
  CorpusSpec spec;
  spec.feature_dim = j.value("feature_dim", 80);
  spec.train_noise_scale = j.value("train_noise_scale", 1.0);
  spec.dev_noise_scale = j.value("dev_noise_scale", 0.0);
  spec.test_noise_scale = j.value("test_noise_scale", 1.0);
  if (!j.contains("languages") || !j["languages"].is_array() || j["languages"].empty())
    throw ValidationError("gen_corpus: spec needs a non-empty languages array");
  for (const auto& lj : j["languages"]) {
    LanguageSpec lang;
    lang.name = lj.at("name").get<std::string>();
    lang.logographic = lj.value("logographic", false);
    lang.lexicon_size = lj.value("lexicon_size", 30);
    lang.min_tokens = lj.value("min_tokens", 3);
    lang.max_tokens = lj.value("max_tokens", 8);
    lang.min_frames = lj.value("min_frames", 3);
    lang.max_frames = lj.value("max_frames", 5);
    lang.noise_sigma = lj.value("noise_sigma", 0.35);
    lang.train_size = lj.value("train", 0);
    lang.dev_size = lj.value("dev", 0);
    lang.test_size = lj.value("test", 0);
    spec.languages.push_back(std::move(lang));
  }
  return spec;
}

std::string CorpusSpec::ToJson() const {
  ordered_json j;
  j["feature_dim"] = feature_dim;
  j["train_noise_scale"] = train_noise_scale;
  j["dev_noise_scale"] = dev_noise_scale;
  j["test_noise_scale"] = test_noise_scale;
  j["languages"] = ordered_json::array();
  for (const auto& lang : languages) {
    ordered_json lj;
    lj["name"] = lang.name;
    lj["logographic"] = lang.logographic;
    lj["lexicon_size"] = lang.lexicon_size;
    lj["min_tokens"] = lang.min_tokens;
    lj["max_tokens"] = lang.max_tokens;
    lj["min_frames"] = lang.min_frames;
    lj["max_frames"] = lang.max_frames;
    lj["noise_sigma"] = lang.noise_sigma;
    lj["train"] = lang.train_size;
    lj["dev"] = lang.dev_size;
    lj["test"] = lang.test_size;
    j["languages"].push_back(lj);
  }
  return j.dump(2);
}

void GenerateCorpus(const CorpusSpec& spec, const std::string& out_dir, uint64_t seed) {
  if (spec.languages.empty()) throw ValidationError("gen_corpus: no languages");
  for (const auto& lang : spec.languages) {
    if (lang.train_size < 1 || lang.dev_size < 1 || lang.test_size < 1)
      throw ValidationError("gen_corpus: every language needs train/dev/test sizes >= 1");
    if (lang.min_tokens < 1 || lang.max_tokens < lang.min_tokens)
      throw ValidationError("gen_corpus: bad token length range for " + lang.name);
    if (lang.min_frames < 1 || lang.max_frames < lang.min_frames)
      throw ValidationError("gen_corpus: bad frame range for " + lang.name);
  }
  std::filesystem::create_directories(out_dir);

  std::vector<BuiltLanguage> built;
  std::set<std::string> all_words;
  for (size_t li = 0; li < spec.languages.size(); ++li) {
    const LanguageSpec& lang = spec.languages[li];
    BuiltLanguage b;
    b.spec = &lang;
    SeededRng lex_rng = DeriveRng(seed, "lexicon/" + lang.name, li);
    b.lexicon = BuildLexicon(lang, li, lex_rng);
    for (const auto& word : b.lexicon) {
      if (!all_words.insert(word).second)
        throw ValidationError("gen_corpus: overlapping inventories at word '" + word + "'");
    }
    SeededRng gram_rng = DeriveRng(seed, "bigram/" + lang.name, li);
    b.bigram = BuildBigram(lang.lexicon_size, gram_rng);
    SeededRng tmpl_rng = DeriveRng(seed, "templates/" + lang.name, li);
    b.templates = BuildTemplates(lang.lexicon_size, spec.feature_dim, lang.noise_sigma,
                                 tmpl_rng);
    built.push_back(std::move(b));
  }

  const SplitPlan splits[] = {{"train", "trn", spec.train_noise_scale},
                              {"dev", "dev", spec.dev_noise_scale},
                              {"test", "tst", spec.test_noise_scale}};
  for (const auto& split : splits) {
    FeatureWriter writer(out_dir + "/" + split.name);
    std::vector<Transcript> transcripts;
    for (size_t li = 0; li < built.size(); ++li) {
      const BuiltLanguage& b = built[li];
      const LanguageSpec& lang = *b.spec;
      int size = std::string(split.name) == "train"
                     ? lang.train_size
                     : (std::string(split.name) == "dev" ? lang.dev_size : lang.test_size);
      for (int u = 0; u < size; ++u) {
        SeededRng rng = DeriveRng(seed, std::string("utt/") + split.name + "/" + lang.name,
                                  static_cast<uint64_t>(u));
        int len = static_cast<int>(rng.UniformInt(lang.min_tokens, lang.max_tokens));
        std::vector<int> tokens;
        int prev = lang.lexicon_size;  // start row
        for (int k = 0; k < len; ++k) {
          int tok = rng.Categorical(b.bigram[static_cast<size_t>(prev)]);
          tokens.push_back(tok);
          prev = tok;
        }
        // Features: per-token template rows plus split-scaled noise.
        std::vector<float> rows;
        int64_t t_total = 0;
        double sigma = lang.noise_sigma * split.noise_scale;
        for (int tok : tokens) {
          int frames = static_cast<int>(rng.UniformInt(lang.min_frames, lang.max_frames));
          for (int f = 0; f < frames; ++f, ++t_total) {
            for (int dpos = 0; dpos < spec.feature_dim; ++dpos) {
              double v = b.templates[static_cast<size_t>(tok)][static_cast<size_t>(dpos)];
              if (sigma > 0) v += rng.Normal(0.0, sigma);
              rows.push_back(static_cast<float>(v));
            }
          }
        }
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%s-%04d", lang.name.c_str(), split.id_tag, u);
        FeatureMatrix feats;
        feats.utterance_id = id;
        feats.language_id = lang.name;
        feats.frame_rate_ms = 10;
        feats.frames = Tensor32({t_total, spec.feature_dim}, std::move(rows));
        writer.Append(feats);

        std::string text;
        for (size_t k = 0; k < tokens.size(); ++k) {
          if (k > 0 && !lang.logographic) text += ' ';
          text += b.lexicon[static_cast<size_t>(tokens[static_cast<size_t>(k)])];
        }
        transcripts.push_back({id, lang.name, text});
      }
    }
    writer.Close();
    WriteTranscripts(out_dir + "/" + std::string(split.name) + ".text", transcripts);
  }

  std::ofstream langs(out_dir + "/languages.tsv", std::ios::trunc);
  for (const auto& lang : spec.languages)
    langs << lang.name << '\t' << (lang.logographic ? 1 : 0) << '\n';
  std::ofstream specf(out_dir + "/spec.json", std::ios::trunc);
  specf << spec.ToJson() << '\n';
}

std::vector<std::string> ReadLogographicLanguages(const std::string& languages_tsv) {
  std::ifstream is(languages_tsv);
  if (!is) throw ValidationError("gen_corpus: cannot open " + languages_tsv);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) continue;
    if (line.substr(tab + 1) == "1") out.push_back(line.substr(0, tab));
  }
  return out;
}

}  // namespace dasr
