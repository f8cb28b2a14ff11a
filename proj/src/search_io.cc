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

#include "dasr/search.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dasr {

void WriteNBest(const std::string& path,
                const std::vector<std::pair<std::string, NBestList>>& items) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("nbest: cannot open " + path);
  char buf[64];
  for (const auto& [utt, nbest] : items) {
    int rank = 1;
    for (const auto& hyp : nbest.hyps) {
      // %.17g keeps the score bit-reproducible across write/read.
      std::snprintf(buf, sizeof(buf), "%.17g", hyp.first_pass_logp);
      os << utt << '\t' << rank << '\t' << buf << '\t';
      for (size_t i = 0; i < hyp.tokens.size(); ++i)
        os << (i ? " " : "") << hyp.tokens[i];
      os << '\n';
      ++rank;
    }
  }
}

std::vector<std::pair<std::string, NBestList>> ReadNBest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("nbest: cannot open " + path);
  std::vector<std::pair<std::string, NBestList>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string utt, rank_s, logp_s;
    if (!std::getline(ss, utt, '\t') || !std::getline(ss, rank_s, '\t') ||
        !std::getline(ss, logp_s, '\t'))
      throw ValidationError("nbest: malformed line: " + line);
    Hypothesis hyp;
    hyp.first_pass_logp = std::stod(logp_s);
    std::string ids;
    std::getline(ss, ids, '\t');
    std::istringstream idstream(ids);
    int id;
    while (idstream >> id) hyp.tokens.push_back(id);
    if (out.empty() || out.back().first != utt) out.emplace_back(utt, NBestList{});
    out.back().second.hyps.push_back(std::move(hyp));
  }
  return out;
}

}  // namespace dasr
