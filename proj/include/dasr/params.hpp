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

#ifndef DASR_PARAMS_HPP_
#define DASR_PARAMS_HPP_

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dasr/autodiff.hpp"
#include "dasr/rng.hpp"
#include "dasr/tensor.hpp"

namespace dasr {

enum class Init {
  kZeros,
  kOnes,
  kXavier,       // uniform(-s, s), s = sqrt(6 / (fan_in + fan_out))
  kEmbedNormal,  // N(0, 1/sqrt(cols))
};

// Interface through which model constructors request parameters. Two
// implementations: ParamStore allocates and initializes real tensors, while
// ParamCounter only records shapes. Models built through the same
// constructor therefore count exactly what they would allocate, which keeps
// analytic parameter counts honest for 1B-scale presets that never fit in
// memory here.
template <typename Real>
class ParamHost {
 public:
  virtual ~ParamHost() = default;
  virtual Var<Real> Create(const std::string& name, const Shape& shape, Init init) = 0;
};

template <typename Real>
class ParamStore : public ParamHost<Real> {
 public:
  explicit ParamStore(uint64_t init_seed = 1, bool trainable = true)
      : init_seed_(init_seed), trainable_(trainable) {}

  Var<Real> Create(const std::string& name, const Shape& shape, Init init) override {
    if (index_.count(name)) throw ValidationError("duplicate parameter: " + name);
    TensorT<Real> t(shape);
    // Each parameter gets a stream derived from its name, so initialization
    // does not depend on creation order.
    SeededRng rng = DeriveRng(init_seed_, "init/" + name);
    switch (init) {
      case Init::kZeros:
        break;
      case Init::kOnes:
        for (Real& v : t.data) v = Real(1);
        break;
      case Init::kXavier: {
        int64_t fan_in = shape.size() >= 2 ? shape[0] : t.numel();
        int64_t fan_out = shape.size() >= 2 ? shape[1] : t.numel();
        double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (Real& v : t.data) v = static_cast<Real>(rng.Uniform(-s, s));
        break;
      }
      case Init::kEmbedNormal: {
        double s = 1.0 / std::sqrt(static_cast<double>(shape.back()));
        for (Real& v : t.data) v = static_cast<Real>(rng.Normal(0.0, s));
        break;
      }
    }
    Var<Real> var = Var<Real>::Leaf(std::move(t), trainable_);
    index_[name] = vars_.size();
    names_.push_back(name);
    vars_.push_back(var);
    return var;
  }

  size_t size() const { return vars_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Var<Real>& at(size_t i) { return vars_[i]; }
  const Var<Real>& at(size_t i) const { return vars_[i]; }

  bool Has(const std::string& name) const { return index_.count(name) > 0; }

  Var<Real>& Get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter: " + name);
    return vars_[it->second];
  }

  int64_t TotalParams() const {
    int64_t n = 0;
    for (const auto& v : vars_) n += v.value().numel();
    return n;
  }

  void ZeroGrads() {
    for (auto& v : vars_) {
      if (!v.node()->grad.data.empty()) {
        std::fill(v.node()->grad.data.begin(), v.node()->grad.data.end(), Real(0));
      }
    }
  }

  // Gradient of a parameter; zeros when the parameter was unreachable from
  // the loss.
  TensorT<Real> GradOf(const std::string& name) {
    Var<Real>& v = Get(name);
    if (v.node()->grad.data.empty()) return TensorT<Real>::Zeros(v.shape());
    return v.node()->grad;
  }

  // Freezing flips requires_grad on every leaf; graphs built afterwards
  // will not record backward closures into these parameters.
  void SetTrainable(bool trainable) {
    trainable_ = trainable;
    for (auto& v : vars_) v.node()->requires_grad = trainable;
  }
  bool trainable() const { return trainable_; }

  std::vector<std::pair<std::string, TensorT<float>>> ExportFloat32() const {
    std::vector<std::pair<std::string, TensorT<float>>> out;
    out.reserve(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i)
      out.emplace_back(names_[i], vars_[i].value().template Cast<float>());
    return out;
  }

  void ImportFloat32(const std::vector<std::pair<std::string, TensorT<float>>>& items,
                     const std::string& prefix = "") {
    size_t used = 0;
    for (const auto& [name, tensor] : items) {
      if (name.rfind(prefix, 0) != 0) continue;
      auto it = index_.find(name);
      if (it == index_.end())
        throw ValidationError("checkpoint tensor has no matching parameter: " + name);
      Var<Real>& v = vars_[it->second];
      if (v.shape() != tensor.shape)
        throw ValidationError("checkpoint shape mismatch for " + name + ": " +
                              ShapeStr(tensor.shape) + " vs " + ShapeStr(v.shape()));
      v.mutable_value() = tensor.template Cast<Real>();
      ++used;
    }
    size_t expected = 0;
    for (const auto& n : names_)
      if (n.rfind(prefix, 0) == 0) ++expected;
    if (used != expected)
      throw ValidationError("checkpoint is missing parameters under '" + prefix + "'");
  }

 private:
  uint64_t init_seed_;
  bool trainable_;
  std::vector<std::string> names_;
  std::vector<Var<Real>> vars_;
  std::map<std::string, size_t> index_;
};

// Shape-only host used for analytic parameter counting. Returned Vars carry
// the shape but no storage and must never be forwarded.
template <typename Real>
class ParamCounter : public ParamHost<Real> {
 public:
  Var<Real> Create(const std::string& name, const Shape& shape, Init) override {
    TensorT<Real>::CheckShape(shape);
    entries_.emplace_back(name, NumelOf(shape));
    total_ += NumelOf(shape);
    auto n = std::make_shared<Node<Real>>();
    n->value.shape = shape;  // no data on purpose
    n->op = "counted";
    return Var<Real>(std::move(n));
  }

  int64_t total() const { return total_; }
  const std::vector<std::pair<std::string, int64_t>>& entries() const { return entries_; }

  // Sum of parameter sizes under a name prefix.
  int64_t TotalUnder(const std::string& prefix) const {
    int64_t n = 0;
    for (const auto& [name, count] : entries_)
      if (name.rfind(prefix, 0) == 0) n += count;
    return n;
  }

 private:
  int64_t total_ = 0;
  std::vector<std::pair<std::string, int64_t>> entries_;
};

}  // namespace dasr

#endif  // DASR_PARAMS_HPP_
