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

#ifndef DASR_TESTS_TEST_UTIL_HPP_
#define DASR_TESTS_TEST_UTIL_HPP_

#include <functional>
#include <vector>

#include "dasr/autodiff.hpp"
#include "dasr/params.hpp"
#include "dasr/rng.hpp"

namespace dasr::testing {

// Central finite-difference gradient oracle, 64-bit. `build` must
// reconstruct the scalar loss from the current values of `leaves`. Probes
// `npoints` random (leaf, element) coordinates with step h and returns the
// worst relative error against the analytic gradient from Backward.
inline double GradCheckMaxRelErr(std::vector<Var<double>> leaves,
                                 const std::function<Var<double>()>& build,
                                 int npoints, SeededRng& rng, double h = 1e-5) {
  for (auto& leaf : leaves) {
    auto& g = leaf.node()->grad;
    if (!g.data.empty()) std::fill(g.data.begin(), g.data.end(), 0.0);
  }
  Var<double> loss = build();
  Backward(loss);
  std::vector<TensorT<double>> analytic;
  analytic.reserve(leaves.size());
  for (auto& leaf : leaves) {
    analytic.push_back(leaf.node()->grad.data.empty()
                           ? TensorT<double>::Zeros(leaf.shape())
                           : leaf.node()->grad);
  }

  double worst = 0.0;
  for (int k = 0; k < npoints; ++k) {
    size_t li = static_cast<size_t>(rng.UniformInt(0, static_cast<int64_t>(leaves.size()) - 1));
    auto& value = leaves[li].mutable_value();
    int64_t e = rng.UniformInt(0, value.numel() - 1);
    double keep = value.data[static_cast<size_t>(e)];
    value.data[static_cast<size_t>(e)] = keep + h;
    double fplus = build().value().data[0];
    value.data[static_cast<size_t>(e)] = keep - h;
    double fminus = build().value().data[0];
    value.data[static_cast<size_t>(e)] = keep;
    double numeric = (fplus - fminus) / (2.0 * h);
    double a = analytic[li].data[static_cast<size_t>(e)];
    double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

// Scalar loss with fixed random weights: sum(out * W). Better conditioned
// than a plain sum because it breaks symmetric cancellations. The weights
// are a pure function of the seed, so rebuilding the loss for a
// finite-difference probe sees the identical objective.
inline Var<double> WeightedSum(const Var<double>& out, uint64_t seed) {
  SeededRng rng(seed);
  TensorT<double> w(out.shape());
  for (auto& v : w.data) v = rng.Uniform(-1.0, 1.0);
  return ReduceSum(Mul(out, Var<double>::Constant(std::move(w))));
}

inline TensorT<double> RandomTensor(const Shape& shape, SeededRng& rng, double scale = 1.0) {
  TensorT<double> t(shape);
  for (auto& v : t.data) v = rng.Uniform(-scale, scale);
  return t;
}

inline TensorT<float> RandomTensor32(const Shape& shape, SeededRng& rng, float scale = 1.0f) {
  TensorT<float> t(shape);
  for (auto& v : t.data) v = static_cast<float>(rng.Uniform(-scale, scale));
  return t;
}

// All parameters of a store, as probe leaves.
inline std::vector<Var<double>> AllParams(ParamStore<double>& store) {
  std::vector<Var<double>> leaves;
  for (size_t i = 0; i < store.size(); ++i) leaves.push_back(store.at(i));
  return leaves;
}

}  // namespace dasr::testing

#endif  // DASR_TESTS_TEST_UTIL_HPP_
