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

#include "dasr/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace dasr {

namespace {

enum class KeyType { kInt, kFloat, kStr, kBool };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* default_value;
};

// Single source of truth for the configuration surface.
const std::vector<KeySpec>& Schema() {
  static const std::vector<KeySpec> schema = {
      {"vocab.size", KeyType::kInt, "16384"},
      {"vocab.count_threshold", KeyType::kInt, "20"},
      {"frontend.specaug", KeyType::kBool, "true"},
      {"frontend.freq_masks", KeyType::kInt, "2"},
      {"frontend.max_freq", KeyType::kInt, "27"},
      {"frontend.time_masks", KeyType::kInt, "2"},
      {"frontend.max_time", KeyType::kInt, "50"},
      {"encoder.causal_layers", KeyType::kInt, "12"},
      {"encoder.pre_stack_layers", KeyType::kInt, "3"},
      {"encoder.wide_layers", KeyType::kInt, "1"},
      {"encoder.dim", KeyType::kInt, "512"},
      {"encoder.wide_layer_dim", KeyType::kInt, "1024"},
      {"encoder.noncausal_layers", KeyType::kInt, "5"},
      {"encoder.noncausal_dim", KeyType::kInt, "0"},  // 0 = encoder.dim
      {"encoder.right_context_frames", KeyType::kInt, "15"},
      {"encoder.heads", KeyType::kInt, "8"},
      {"encoder.conv_kernel", KeyType::kInt, "15"},
      {"encoder.noncausal_conv_kernel", KeyType::kInt, "7"},
      {"encoder.ffn_multiplier", KeyType::kInt, "4"},
      {"transducer.pred_layers", KeyType::kInt, "2"},
      {"transducer.pred_dim", KeyType::kInt, "2048"},
      {"transducer.pred_proj", KeyType::kInt, "640"},
      {"transducer.joint_dim", KeyType::kInt, "640"},
      {"delib.text_encoder.kind", KeyType::kStr, "bilstm"},
      {"delib.text_encoder.layers", KeyType::kInt, "2"},
      {"delib.text_encoder.dim", KeyType::kInt, "2048"},
      {"delib.text_encoder.proj", KeyType::kInt, "1024"},
      {"delib.text_encoder.embed_dim", KeyType::kInt, "512"},
      {"delib.text_encoder.lookahead", KeyType::kInt, "4"},
      {"delib.text_encoder.heads", KeyType::kInt, "8"},
      {"delib.text_encoder.conv_kernel", KeyType::kInt, "7"},
      {"delib.decoder.layers", KeyType::kInt, "4"},
      {"delib.decoder.hidden", KeyType::kInt, "2048"},
      {"delib.decoder.proj", KeyType::kInt, "512"},
      {"delib.decoder.heads", KeyType::kInt, "8"},
      {"delib.decoder.max_positions", KeyType::kInt, "256"},
      {"delib.lambda", KeyType::kFloat, "0.0"},
      {"delib.label_smoothing", KeyType::kFloat, "0.1"},
      {"train.optimizer", KeyType::kStr, "adam"},
      {"train.lr_schedule", KeyType::kStr, "linear_warmup_constant"},
      {"train.warmup_steps", KeyType::kInt, "32000"},
      {"train.base_lr", KeyType::kFloat, "1e-3"},
      {"train.peak_lr", KeyType::kFloat, "1.8e-3"},
      {"train.grad_cap", KeyType::kFloat, "5.0"},
      {"train.ema_decay", KeyType::kFloat, "0.9999"},
      {"train.batch_size", KeyType::kInt, "4096"},
      {"train.steps", KeyType::kInt, "100000"},
      {"train.seed", KeyType::kInt, "1"},
      {"train.log_every", KeyType::kInt, "10"},
      {"train.checkpoint_every", KeyType::kInt, "0"},
      {"train.causal_prob", KeyType::kFloat, "0.4"},
      {"train.noncausal_prob", KeyType::kFloat, "0.6"},
      {"decode.beam", KeyType::kInt, "8"},
      {"decode.source", KeyType::kStr, "noncausal"},
      {"decode.max_symbols_per_frame", KeyType::kInt, "5"},
      {"decode.temperature", KeyType::kFloat, "1.0"},
  };
  return schema;
}

const KeySpec* FindKey(const std::string& name) {
  for (const auto& k : Schema())
    if (name == k.name) return &k;
  return nullptr;
}

std::string Trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void CheckValue(const KeySpec& spec, const std::string& value) {
  try {
    switch (spec.type) {
      case KeyType::kInt: {
        size_t used = 0;
        (void)std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        break;
      }
      case KeyType::kFloat: {
        size_t used = 0;
        (void)std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        break;
      }
      case KeyType::kBool:
        if (value != "true" && value != "false")
          throw std::invalid_argument(value);
        break;
      case KeyType::kStr:
        break;
    }
  } catch (const std::exception&) {
    throw ValidationError("config: bad value for " + std::string(spec.name) + ": '" +
                          value + "'");
  }
}

}  // namespace

RunConfig RunConfig::Defaults() {
  RunConfig cfg;
  for (const auto& k : Schema()) cfg.values_[k.name] = k.default_value;
  return cfg;
}

RunConfig RunConfig::FromFile(const std::string& path) {
  RunConfig cfg = Defaults();
  cfg.ApplyFile(path);
  return cfg;
}

void RunConfig::ApplyFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: missing '=' at " + path + ":" +
                            std::to_string(lineno));
    Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

void RunConfig::ApplyOverride(const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError("config: override must be key=value: " + assignment);
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  const KeySpec* spec = FindKey(key);
  if (spec == nullptr) throw ValidationError("config: unknown key '" + key + "'");
  CheckValue(*spec, value);
  values_[key] = value;
}

int64_t RunConfig::GetInt(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  return std::stoll(it->second);
}

double RunConfig::GetFloat(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  return std::stod(it->second);
}

std::string RunConfig::GetStr(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  return it->second;
}

bool RunConfig::GetBool(const std::string& key) const {
  return GetStr(key) == "true";
}

std::string RunConfig::EchoString() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << " = " << value << '\n';
  return os.str();
}

void RunConfig::SaveEcho(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("config: cannot write " + path);
  os << EchoString();
}

}  // namespace dasr
