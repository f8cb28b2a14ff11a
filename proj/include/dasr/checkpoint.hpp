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

#ifndef DASR_CHECKPOINT_HPP_
#define DASR_CHECKPOINT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "dasr/tensor.hpp"

namespace dasr {

// Versioned container of named tensors:
//   magic "DASRCKPT", u32 version, u32 tensor count, then per tensor
//   u32 name length, name bytes, u32 rank, u32 extents[rank], and the
//   row-major payload as little-endian 32-bit floats.
using NamedTensorList = std::vector<std::pair<std::string, Tensor32>>;

void SaveCheckpoint(const std::string& path, const NamedTensorList& tensors);
NamedTensorList LoadCheckpoint(const std::string& path);

// Convenience lookup; throws ValidationError when absent.
const Tensor32& FindTensor(const NamedTensorList& tensors, const std::string& name);

}  // namespace dasr

#endif  // DASR_CHECKPOINT_HPP_
