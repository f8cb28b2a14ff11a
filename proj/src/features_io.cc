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

#include "dasr/features_io.hpp"

#include <fstream>
#include <sstream>

namespace dasr {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

struct FeatureWriter::Impl {
  std::ofstream manifest;
  std::ofstream blob;
  int64_t offset = 0;
  bool open = false;
};

FeatureWriter::FeatureWriter(const std::string& base) : impl_(new Impl) {
  impl_->manifest.open(base + ".manifest", std::ios::trunc);
  impl_->blob.open(base + ".bin", std::ios::binary | std::ios::trunc);
  if (!impl_->manifest || !impl_->blob)
    throw ValidationError("features: cannot open " + base + " for write");
  impl_->open = true;
}

FeatureWriter::~FeatureWriter() {
  Close();
  delete impl_;
}

void FeatureWriter::Append(const FeatureMatrix& feats) {
  if (!impl_->open) throw ValidationError("features: writer already closed");
  const auto& f = feats.frames;
  impl_->manifest << feats.utterance_id << '\t' << feats.language_id << '\t'
                  << f.shape[0] << '\t' << f.shape[1] << '\t' << impl_->offset << '\n';
  impl_->blob.write(reinterpret_cast<const char*>(f.data.data()),
                    static_cast<std::streamsize>(f.data.size() * 4));
  impl_->offset += static_cast<int64_t>(f.data.size() * 4);
}

void FeatureWriter::Close() {
  if (impl_->open) {
    impl_->manifest.close();
    impl_->blob.close();
    impl_->open = false;
  }
}

FeatureReader::FeatureReader(const std::string& base) : blob_path_(base + ".bin") {
  std::ifstream manifest(base + ".manifest");
  if (!manifest) throw ValidationError("features: cannot open " + base + ".manifest");
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    auto fields = SplitTabs(line);
    if (fields.size() != 5)
      throw ValidationError("features: malformed manifest line: " + line);
    ManifestEntry e;
    e.utterance_id = fields[0];
    e.language_id = fields[1];
    e.num_frames = std::stoll(fields[2]);
    e.dim = std::stoll(fields[3]);
    e.byte_offset = std::stoll(fields[4]);
    entries_.push_back(std::move(e));
  }
}

FeatureMatrix FeatureReader::Load(size_t index) const {
  if (index >= entries_.size()) throw ValidationError("features: index out of range");
  const ManifestEntry& e = entries_[index];
  std::ifstream blob(blob_path_, std::ios::binary);
  if (!blob) throw ValidationError("features: cannot open " + blob_path_);
  blob.seekg(e.byte_offset);
  FeatureMatrix out;
  out.utterance_id = e.utterance_id;
  out.language_id = e.language_id;
  out.frame_rate_ms = 10;
  out.frames = Tensor32({e.num_frames, e.dim});
  blob.read(reinterpret_cast<char*>(out.frames.data.data()),
            static_cast<std::streamsize>(out.frames.data.size() * 4));
  if (!blob) throw ValidationError("features: truncated blob for " + e.utterance_id);
  return out;
}

int64_t FeatureReader::IndexOf(const std::string& utterance_id) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].utterance_id == utterance_id) return static_cast<int64_t>(i);
  return -1;
}

void WriteTranscripts(const std::string& path, const std::vector<Transcript>& items) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("transcripts: cannot open " + path);
  for (const auto& t : items)
    os << t.utterance_id << '\t' << t.language_id << '\t' << t.text << '\n';
}

std::vector<Transcript> ReadTranscripts(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("transcripts: cannot open " + path);
  std::vector<Transcript> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = SplitTabs(line);
    if (fields.size() != 3)
      throw ValidationError("transcripts: malformed line: " + line);
    out.push_back({fields[0], fields[1], fields[2]});
  }
  return out;
}

}  // namespace dasr
