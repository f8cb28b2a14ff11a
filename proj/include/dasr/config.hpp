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

#ifndef DASR_CONFIG_HPP_
#define DASR_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "dasr/common.hpp"

namespace dasr {

// Run configuration: `section.key = value` lines merged over builtin
// defaults, then command-line overrides. Every key is validated against the
// schema; unknown keys are errors. The effective config is echoed into each
// run directory so runs stay self-describing.
class RunConfig {
 public:
  static RunConfig Defaults();
  static RunConfig FromFile(const std::string& path);

  void ApplyFile(const std::string& path);
  // Accepts "section.key=value".
  void ApplyOverride(const std::string& assignment);

  int64_t GetInt(const std::string& key) const;
  double GetFloat(const std::string& key) const;
  std::string GetStr(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  void Set(const std::string& key, const std::string& value);

  std::string EchoString() const;
  void SaveEcho(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dasr

#endif  // DASR_CONFIG_HPP_
