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

#include "dasr/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "dasr/common.hpp"

namespace dasr {

namespace {

constexpr char kMagic[8] = {'D', 'A', 'S', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void WriteU32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t ReadU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ValidationError("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void SaveCheckpoint(const std::string& path, const NamedTensorList& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("checkpoint: cannot open for write: " + path);
  os.write(kMagic, sizeof(kMagic));
  WriteU32(os, kVersion);
  WriteU32(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    WriteU32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteU32(os, static_cast<uint32_t>(tensor.shape.size()));
    for (int64_t d : tensor.shape) WriteU32(os, static_cast<uint32_t>(d));
    static_assert(sizeof(float) == 4, "float must be 32-bit");
    os.write(reinterpret_cast<const char*>(tensor.data.data()),
             static_cast<std::streamsize>(tensor.data.size() * 4));
  }
  if (!os) throw ValidationError("checkpoint: write failed: " + path);
}

NamedTensorList LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw ValidationError("checkpoint: bad magic in " + path);
  uint32_t version = ReadU32(is);
  if (version != kVersion)
    throw ValidationError("checkpoint: unsupported version " + std::to_string(version));
  uint32_t count = ReadU32(is);
  NamedTensorList out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = ReadU32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t rank = ReadU32(is);
    if (rank == 0 || rank > 8) throw ValidationError("checkpoint: bad rank");
    Shape shape(rank);
    for (uint32_t r = 0; r < rank; ++r) shape[r] = static_cast<int64_t>(ReadU32(is));
    Tensor32 t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * 4));
    if (!is) throw ValidationError("checkpoint: truncated tensor payload for " + name);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

const Tensor32& FindTensor(const NamedTensorList& tensors, const std::string& name) {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ValidationError("checkpoint: tensor not found: " + name);
}

}  // namespace dasr
