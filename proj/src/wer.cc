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

#include "dasr/wer.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dasr/tokenizer.hpp"

namespace dasr {

EditCounts WordErrors(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp) {
  if (ref.empty()) throw ValidationError("wer: empty reference");
  size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: edits aligning ref[0..i) with hyp[0..j).
  std::vector<std::vector<int32_t>> cost(n + 1, std::vector<int32_t>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int32_t>(i);
  for (size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int32_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      int32_t diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int32_t del = cost[i - 1][j] + 1;
      int32_t ins = cost[i][j - 1] + 1;
      cost[i][j] = std::min(diag, std::min(del, ins));
    }
  }
  // Backtrace, preferring substitution/match over deletion over insertion.
  EditCounts counts;
  counts.ref_words = static_cast<int64_t>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++counts.sub;
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++counts.del;
      --i;
    } else {
      ++counts.ins;
      --j;
    }
  }
  return counts;
}

std::vector<std::string> ScoringUnits(const std::string& text, bool logographic) {
  std::string norm = NormalizeText(text);
  std::vector<std::string> units;
  if (logographic) {
    for (const auto& cp : SplitUtf8(norm))
      if (cp != " ") units.push_back(cp);
    return units;
  }
  std::istringstream ss(norm);
  std::string word;
  while (ss >> word) units.push_back(word);
  return units;
}

double AggregateWer(const std::map<std::string, double>& per_language) {
  if (per_language.empty()) throw ValidationError("aggregate: no languages");
  double acc = 0;
  for (const auto& [lang, wer] : per_language) acc += wer;
  return acc / static_cast<double>(per_language.size());
}

double RelativeImprovement(double baseline_wer, double new_wer) {
  if (baseline_wer <= 0) throw ValidationError("relative_improvement: baseline must be > 0");
  return 100.0 * (baseline_wer - new_wer) / baseline_wer;
}

double WerReport::AvgWerPercent() const {
  std::map<std::string, double> wers;
  for (const auto& [lang, stats] : per_language) wers[lang] = stats.wer_percent;
  return AggregateWer(wers);
}

WerReport ScoreCorpus(const std::vector<Transcript>& refs,
                      const std::map<std::string, std::string>& hyp_by_id,
                      const std::set<std::string>& logographic_languages,
                      const std::string& model_id) {
  if (refs.empty()) throw ValidationError("score: no references");
  WerReport report;
  report.model_id = model_id;
  for (const auto& ref : refs) {
    auto it = hyp_by_id.find(ref.utterance_id);
    if (it == hyp_by_id.end())
      throw ValidationError("score: missing hypothesis for " + ref.utterance_id);
    bool logo = logographic_languages.count(ref.language_id) > 0;
    auto ref_units = ScoringUnits(ref.text, logo);
    auto hyp_units = ScoringUnits(it->second, logo);
    EditCounts counts = WordErrors(ref_units, hyp_units);
    auto& stats = report.per_language[ref.language_id];
    stats.counts.sub += counts.sub;
    stats.counts.ins += counts.ins;
    stats.counts.del += counts.del;
    stats.counts.ref_words += counts.ref_words;
  }
  for (auto& [lang, stats] : report.per_language)
    stats.wer_percent = 100.0 * stats.counts.Rate();
  return report;
}

namespace {

std::string FormatSize(int64_t params) {
  char buf[32];
  if (params >= 1000000) {
    std::snprintf(buf, sizeof(buf), "%lldM", static_cast<long long>((params + 500000) / 1000000));
  } else {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(params));
  }
  return buf;
}

}  // namespace

std::string RenderTable(const std::vector<WerReport>& reports) {
  if (reports.empty()) throw ValidationError("render_table: no reports");
  std::vector<std::string> languages;
  for (const auto& [lang, stats] : reports[0].per_language) languages.push_back(lang);
  for (const auto& r : reports) {
    if (r.per_language.size() != languages.size())
      throw ValidationError("render_table: reports disagree on the language set");
    for (const auto& lang : languages)
      if (!r.per_language.count(lang))
        throw ValidationError("render_table: missing language " + lang);
  }

  std::ostringstream os;
  char buf[64];
  os << "Language";
  for (const auto& r : reports)
    os << '\t' << (r.model_id.empty() ? std::string("model") : r.model_id);
  os << '\n';
  for (const auto& lang : languages) {
    os << lang;
    for (const auto& r : reports) {
      std::snprintf(buf, sizeof(buf), "%.2f", r.per_language.at(lang).wer_percent);
      os << '\t' << buf;
    }
    os << '\n';
  }
  os << "Avg. WER";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%.2f", r.AvgWerPercent());
    os << '\t' << buf;
  }
  os << '\n';
  os << "Size";
  for (const auto& r : reports)
    os << '\t' << (r.param_count > 0 ? FormatSize(r.param_count) : std::string("-"));
  os << '\n';
  return os.str();
}

std::string RenderTsv(const WerReport& report) {
  std::ostringstream os;
  char buf[64];
  os << "language\tS\tI\tD\tref_words\twer\n";
  for (const auto& [lang, stats] : report.per_language) {
    std::snprintf(buf, sizeof(buf), "%.4f", stats.counts.Rate());
    os << lang << '\t' << stats.counts.sub << '\t' << stats.counts.ins << '\t'
       << stats.counts.del << '\t' << stats.counts.ref_words << '\t' << buf << '\n';
  }
  return os.str();
}

}  // namespace dasr
