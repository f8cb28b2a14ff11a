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

#ifndef DASR_FEATURES_IO_HPP_
#define DASR_FEATURES_IO_HPP_

#include <string>
#include <vector>

#include "dasr/frontend.hpp"

namespace dasr {

// Feature storage for one split:
//   <name>.manifest  one utterance per line: id\tlanguage\tT\tD\tbyte_offset
//   <name>.bin       adjacent blob of T*D little-endian 32-bit floats per
//                    utterance, row major, located by the manifest offset.
// Transcripts live next to them as <name>.text with lines id\tlanguage\ttext.

struct ManifestEntry {
  std::string utterance_id;
  std::string language_id;
  int64_t num_frames = 0;
  int64_t dim = 0;
  int64_t byte_offset = 0;
};

class FeatureWriter {
 public:
  // `base` is the path prefix, e.g. "corpus/train".
  explicit FeatureWriter(const std::string& base);
  ~FeatureWriter();
  void Append(const FeatureMatrix& feats);
  void Close();

 private:
  struct Impl;
  Impl* impl_;
};

class FeatureReader {
 public:
  explicit FeatureReader(const std::string& base);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  // Loads by manifest index. frame_rate_ms is always 10 at rest.
  FeatureMatrix Load(size_t index) const;
  int64_t IndexOf(const std::string& utterance_id) const;  // -1 when absent

 private:
  std::string blob_path_;
  std::vector<ManifestEntry> entries_;
};

struct Transcript {
  std::string utterance_id;
  std::string language_id;
  std::string text;
};

void WriteTranscripts(const std::string& path, const std::vector<Transcript>& items);
std::vector<Transcript> ReadTranscripts(const std::string& path);

}  // namespace dasr

#endif  // DASR_FEATURES_IO_HPP_
