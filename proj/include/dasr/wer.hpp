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

#ifndef DASR_WER_HPP_
#define DASR_WER_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dasr/features_io.hpp"

namespace dasr {

struct EditCounts {
  int64_t sub = 0;
  int64_t ins = 0;
  int64_t del = 0;
  int64_t ref_words = 0;

  double Rate() const {
    return static_cast<double>(sub + ins + del) / static_cast<double>(ref_words);
  }
};

// Levenshtein alignment minimizing S+I+D. Tie-break prefers substitution
// over an insertion+deletion pair, then deletion over insertion.
EditCounts WordErrors(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp);

// Scoring units: whitespace words, or single characters for logographic
// languages (spaces dropped).
std::vector<std::string> ScoringUnits(const std::string& text, bool logographic);

// Unweighted arithmetic mean of per-language WERs (percent in, percent out).
double AggregateWer(const std::map<std::string, double>& per_language);

// 100 * (baseline - improved) / baseline.
double RelativeImprovement(double baseline_wer, double new_wer);

struct WerReport {
  struct LangStats {
    EditCounts counts;
    double wer_percent = 0;  // 100 * counts.Rate()
  };
  std::string model_id;
  int64_t param_count = 0;
  std::map<std::string, LangStats> per_language;

  double AvgWerPercent() const;
};

// Scores hypotheses against references joined on utterance id. Missing
// hypotheses are errors; language and logographic treatment come from the
// reference side.
WerReport ScoreCorpus(const std::vector<Transcript>& refs,
                      const std::map<std::string, std::string>& hyp_by_id,
                      const std::set<std::string>& logographic_languages,
                      const std::string& model_id = "");

// Human-readable comparison table (per-language rows, Avg. WER and Size
// footers) plus a tab-separated machine companion.
std::string RenderTable(const std::vector<WerReport>& reports);
std::string RenderTsv(const WerReport& report);

}  // namespace dasr

#endif  // DASR_WER_HPP_
