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

#ifndef DASR_OPTIM_HPP_
#define DASR_OPTIM_HPP_

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dasr/checkpoint.hpp"
#include "dasr/params.hpp"

namespace dasr {

// Caps the L2 norm of one parameter's gradient at `cap`, preserving
// direction. Applied independently per parameter tensor.
template <typename Real>
void ClipPerParam(TensorT<Real>& grad, double cap) {
  if (!AllFinite(grad)) throw NumericError("clip_per_param: non-finite gradient");
  if (cap <= 0) throw ValidationError("clip_per_param: cap must be positive");
  double norm = L2Norm(grad);
  if (norm <= cap) return;
  Real scale = static_cast<Real>(cap / norm);
  for (Real& g : grad.data) g *= scale;
}

enum class ScheduleKind { kLinearWarmupConstant, kTransformer };

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::kLinearWarmupConstant;
  int64_t warmup_steps = 32000;
  double base_lr = 1e-3;    // linear kind: constant level after warmup
  double peak_lr = 1.8e-3;  // transformer kind: value reached at warmup

  static ScheduleConfig FromConfig(const RunConfig& cfg) {
    ScheduleConfig s;
    std::string kind = cfg.GetStr("train.lr_schedule");
    if (kind == "linear_warmup_constant")
      s.kind = ScheduleKind::kLinearWarmupConstant;
    else if (kind == "transformer")
      s.kind = ScheduleKind::kTransformer;
    else
      throw ValidationError("train: unknown lr schedule '" + kind + "'");
    s.warmup_steps = cfg.GetInt("train.warmup_steps");
    if (s.warmup_steps <= 0) throw ValidationError("train: warmup_steps must be > 0");
    s.base_lr = cfg.GetFloat("train.base_lr");
    s.peak_lr = cfg.GetFloat("train.peak_lr");
    return s;
  }
};

// Learning rate at a (0-based allowed) step. Linear: warm up to base_lr over
// warmup_steps, then stay constant. Transformer: peak_lr * min(step/warmup,
// sqrt(warmup/step)), the inverse-sqrt schedule pinned at the stated peak.
inline double LrAt(int64_t step, const ScheduleConfig& s) {
  if (step < 0) throw ValidationError("lr_at: negative step");
  double w = static_cast<double>(s.warmup_steps);
  switch (s.kind) {
    case ScheduleKind::kLinearWarmupConstant:
      return s.base_lr * std::min(1.0, static_cast<double>(step) / w);
    case ScheduleKind::kTransformer: {
      if (step == 0) return 0.0;
      double d = static_cast<double>(step);
      return s.peak_lr * std::min(d / w, std::sqrt(w / d));
    }
  }
  return 0.0;
}

template <typename Real>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // One update over every parameter that received a gradient this step.
  // Gradients are clipped per parameter to grad_cap first.
  virtual void Step(ParamStore<Real>& params, double lr, double grad_cap) = 0;
  virtual NamedTensorList ExportState() const = 0;
  virtual void ImportState(const NamedTensorList& items) = 0;
  virtual int64_t step_count() const = 0;
};

// Bias-corrected Adam with the stated betas.
template <typename Real>
class AdamOptimizer : public Optimizer<Real> {
 public:
  AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(ParamStore<Real>& params, double lr, double grad_cap) override {
    if (lr < 0) throw ValidationError("adam: negative learning rate");
    ++step_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (size_t i = 0; i < params.size(); ++i) {
      Var<Real>& p = params.at(i);
      auto& grad = p.node()->grad;
      if (grad.data.empty()) continue;
      ClipPerParam(grad, grad_cap);
      const std::string& name = params.names()[i];
      auto& m = StateFor(m_, name, p.shape());
      auto& v = StateFor(v_, name, p.shape());
      auto& value = p.mutable_value();
      for (int64_t j = 0; j < value.numel(); ++j) {
        double g = static_cast<double>(grad.data[j]);
        double mj = beta1_ * static_cast<double>(m.data[j]) + (1.0 - beta1_) * g;
        double vj = beta2_ * static_cast<double>(v.data[j]) + (1.0 - beta2_) * g * g;
        m.data[j] = static_cast<Real>(mj);
        v.data[j] = static_cast<Real>(vj);
        double update = (mj / bc1) / (std::sqrt(vj / bc2) + eps_);
        value.data[j] -= static_cast<Real>(lr * update);
      }
      if (!AllFinite(value)) throw NumericError("adam: non-finite parameter " + name);
    }
  }

  NamedTensorList ExportState() const override {
    NamedTensorList out;
    out.emplace_back("opt/step", Tensor32::Scalar(static_cast<float>(step_)));
    for (const auto& [name, t] : m_) out.emplace_back("opt/adam/m/" + name, t.template Cast<float>());
    for (const auto& [name, t] : v_) out.emplace_back("opt/adam/v/" + name, t.template Cast<float>());
    return out;
  }

  void ImportState(const NamedTensorList& items) override {
    for (const auto& [name, t] : items) {
      if (name == "opt/step") {
        step_ = static_cast<int64_t>(t.data[0]);
      } else if (name.rfind("opt/adam/m/", 0) == 0) {
        m_[name.substr(11)] = t.template Cast<Real>();
      } else if (name.rfind("opt/adam/v/", 0) == 0) {
        v_[name.substr(11)] = t.template Cast<Real>();
      }
    }
  }

  int64_t step_count() const override { return step_; }

 private:
  static TensorT<Real>& StateFor(std::map<std::string, TensorT<Real>>& store,
                                 const std::string& name, const Shape& shape) {
    auto it = store.find(name);
    if (it == store.end()) it = store.emplace(name, TensorT<Real>::Zeros(shape)).first;
    return it->second;
  }

  double beta1_, beta2_, eps_;
  int64_t step_ = 0;
  std::map<std::string, TensorT<Real>> m_, v_;
};

// Adafactor-style update: factored second moments for matrices (row and
// column mean accumulators, n+m numbers for an n x m parameter), an
// unfactored RMS accumulator for vectors and scalars, no first moment.
// The decay rate follows the step-dependent schedule t^-0.8 clamped to at
// least 1e-3.
template <typename Real>
class AdafactorOptimizer : public Optimizer<Real> {
 public:
  explicit AdafactorOptimizer(double eps1 = 1e-30) : eps1_(eps1) {}

  void Step(ParamStore<Real>& params, double lr, double grad_cap) override {
    if (lr < 0) throw ValidationError("adafactor: negative learning rate");
    ++step_;
    double rate = std::max(std::pow(static_cast<double>(step_), -0.8), 1e-3);
    for (size_t i = 0; i < params.size(); ++i) {
      Var<Real>& p = params.at(i);
      auto& grad = p.node()->grad;
      if (grad.data.empty()) continue;
      ClipPerParam(grad, grad_cap);
      const std::string& name = params.names()[i];
      auto& value = p.mutable_value();
      if (p.shape().size() >= 2 && p.shape()[0] > 1 && p.shape()[1] > 1) {
        int64_t n = p.shape()[0], m = p.shape()[1];
        auto& row = StateFor(row_, name, {n});
        auto& col = StateFor(col_, name, {m});
        // Running row/column means of grad^2.
        for (int64_t r = 0; r < n; ++r) {
          double acc = 0;
          for (int64_t c = 0; c < m; ++c) {
            double g = static_cast<double>(grad.at(r, c));
            acc += g * g + eps1_;
          }
          row.data[r] = static_cast<Real>((1.0 - rate) * static_cast<double>(row.data[r]) +
                                          rate * acc / static_cast<double>(m));
        }
        for (int64_t c = 0; c < m; ++c) {
          double acc = 0;
          for (int64_t r = 0; r < n; ++r) {
            double g = static_cast<double>(grad.at(r, c));
            acc += g * g + eps1_;
          }
          col.data[c] = static_cast<Real>((1.0 - rate) * static_cast<double>(col.data[c]) +
                                          rate * acc / static_cast<double>(n));
        }
        double row_mean = 0;
        for (int64_t r = 0; r < n; ++r) row_mean += static_cast<double>(row.data[r]);
        row_mean /= static_cast<double>(n);
        if (row_mean <= 0) continue;
        for (int64_t r = 0; r < n; ++r) {
          for (int64_t c = 0; c < m; ++c) {
            double vhat = static_cast<double>(row.data[r]) * static_cast<double>(col.data[c]) /
                          row_mean;
            double u = static_cast<double>(grad.at(r, c)) / std::sqrt(vhat + 1e-30);
            value.at(r, c) -= static_cast<Real>(lr * u);
          }
        }
      } else {
        auto& acc = StateFor(vec_, name, p.shape());
        for (int64_t j = 0; j < value.numel(); ++j) {
          double g = static_cast<double>(grad.data[j]);
          double vj = (1.0 - rate) * static_cast<double>(acc.data[j]) + rate * (g * g + eps1_);
          acc.data[j] = static_cast<Real>(vj);
          value.data[j] -= static_cast<Real>(lr * g / std::sqrt(vj + 1e-30));
        }
      }
      if (!AllFinite(value)) throw NumericError("adafactor: non-finite parameter " + name);
    }
  }

  // Number of second-moment accumulators held for a parameter.
  int64_t StateSizeOf(const std::string& name) const {
    int64_t n = 0;
    auto r = row_.find(name);
    if (r != row_.end()) n += r->second.numel();
    auto c = col_.find(name);
    if (c != col_.end()) n += c->second.numel();
    auto v = vec_.find(name);
    if (v != vec_.end()) n += v->second.numel();
    return n;
  }

  NamedTensorList ExportState() const override {
    NamedTensorList out;
    out.emplace_back("opt/step", Tensor32::Scalar(static_cast<float>(step_)));
    for (const auto& [name, t] : row_) out.emplace_back("opt/adafactor/r/" + name, t.template Cast<float>());
    for (const auto& [name, t] : col_) out.emplace_back("opt/adafactor/c/" + name, t.template Cast<float>());
    for (const auto& [name, t] : vec_) out.emplace_back("opt/adafactor/v/" + name, t.template Cast<float>());
    return out;
  }

  void ImportState(const NamedTensorList& items) override {
    for (const auto& [name, t] : items) {
      if (name == "opt/step")
        step_ = static_cast<int64_t>(t.data[0]);
      else if (name.rfind("opt/adafactor/r/", 0) == 0)
        row_[name.substr(16)] = t.template Cast<Real>();
      else if (name.rfind("opt/adafactor/c/", 0) == 0)
        col_[name.substr(16)] = t.template Cast<Real>();
      else if (name.rfind("opt/adafactor/v/", 0) == 0)
        vec_[name.substr(16)] = t.template Cast<Real>();
    }
  }

  int64_t step_count() const override { return step_; }

 private:
  static TensorT<Real>& StateFor(std::map<std::string, TensorT<Real>>& store,
                                 const std::string& name, const Shape& shape) {
    auto it = store.find(name);
    if (it == store.end()) it = store.emplace(name, TensorT<Real>::Zeros(shape)).first;
    return it->second;
  }

  double eps1_;
  int64_t step_ = 0;
  std::map<std::string, TensorT<Real>> row_, col_, vec_;
};

template <typename Real>
std::unique_ptr<Optimizer<Real>> MakeOptimizer(const std::string& kind) {
  if (kind == "adam") return std::make_unique<AdamOptimizer<Real>>();
  if (kind == "adafactor") return std::make_unique<AdafactorOptimizer<Real>>();
  throw ValidationError("train: unknown optimizer '" + kind + "'");
}

// Exponential moving average of parameters; evaluation uses these weights.
template <typename Real>
class EmaTracker {
 public:
  EmaTracker(const ParamStore<Real>& params, double decay) : decay_(decay) {
    if (decay < 0.0 || decay > 1.0)
      throw ValidationError("ema: decay must lie in [0,1]");
    for (size_t i = 0; i < params.size(); ++i)
      shadow_.emplace_back(params.names()[i], params.at(i).value());
  }

  void Update(const ParamStore<Real>& params) {
    for (size_t i = 0; i < shadow_.size(); ++i) {
      const auto& value = params.at(i).value();
      auto& ema = shadow_[i].second;
      for (int64_t j = 0; j < ema.numel(); ++j) {
        ema.data[j] = static_cast<Real>(decay_ * static_cast<double>(ema.data[j]) +
                                        (1.0 - decay_) * static_cast<double>(value.data[j]));
      }
    }
  }

  const std::vector<std::pair<std::string, TensorT<Real>>>& shadow() const {
    return shadow_;
  }

  NamedTensorList ExportState(const std::string& prefix = "ema/") const {
    NamedTensorList out;
    for (const auto& [name, t] : shadow_)
      out.emplace_back(prefix + name, t.template Cast<float>());
    return out;
  }

  void ImportState(const NamedTensorList& items, const std::string& prefix = "ema/") {
    std::map<std::string, const Tensor32*> by_name;
    for (const auto& [name, t] : items)
      if (name.rfind(prefix, 0) == 0) by_name[name.substr(prefix.size())] = &t;
    for (auto& [name, t] : shadow_) {
      auto it = by_name.find(name);
      if (it == by_name.end())
        throw ValidationError("ema: checkpoint missing state for " + name);
      t = it->second->template Cast<Real>();
    }
  }

 private:
  double decay_;
  std::vector<std::pair<std::string, TensorT<Real>>> shadow_;
};

}  // namespace dasr

#endif  // DASR_OPTIM_HPP_
