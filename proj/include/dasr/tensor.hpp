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

#ifndef DASR_TENSOR_HPP_
#define DASR_TENSOR_HPP_

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dasr/common.hpp"

namespace dasr {

using Shape = std::vector<int64_t>;

inline int64_t NumelOf(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

inline std::string ShapeStr(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

// Dense row-major tensor. Real is float for training, double for
// verification paths such as finite-difference gradient checks.
template <typename Real>
struct TensorT {
  Shape shape;
  std::vector<Real> data;

  TensorT() = default;

  explicit TensorT(Shape s) : shape(std::move(s)) {
    CheckShape(shape);
    data.assign(static_cast<size_t>(NumelOf(shape)), Real(0));
  }

  TensorT(Shape s, std::vector<Real> d) : shape(std::move(s)), data(std::move(d)) {
    CheckShape(shape);
    if (static_cast<int64_t>(data.size()) != NumelOf(shape)) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + ShapeStr(shape));
    }
  }

  static void CheckShape(const Shape& s) {
    if (s.empty()) throw ShapeError("tensor rank must be >= 1");
    for (int64_t d : s) {
      if (d <= 0) throw ShapeError("tensor extents must be positive: " + ShapeStr(s));
    }
  }

  static TensorT Zeros(Shape s) { return TensorT(std::move(s)); }

  static TensorT Full(Shape s, Real v) {
    TensorT t(std::move(s));
    for (Real& x : t.data) x = v;
    return t;
  }

  static TensorT Scalar(Real v) { return TensorT({1}, {v}); }

  static TensorT FromVector(std::vector<Real> d) {
    Shape s{static_cast<int64_t>(d.size())};
    return TensorT(std::move(s), std::move(d));
  }

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  bool is_scalar() const { return numel() == 1; }

  int64_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  int64_t cols() const { return shape.back(); }

  Real& at(int64_t i, int64_t j) { return data[static_cast<size_t>(i * shape[1] + j)]; }
  Real at(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * shape[1] + j)]; }

  Real scalar() const {
    if (!is_scalar()) throw ShapeError("scalar() on tensor of shape " + ShapeStr(shape));
    return data[0];
  }

  template <typename Other>
  TensorT<Other> Cast() const {
    TensorT<Other> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<Other>(data[i]);
    return out;
  }
};

template <typename Real>
bool AllFinite(const TensorT<Real>& t) {
  for (Real v : t.data) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

template <typename Real>
double L2Norm(const TensorT<Real>& t) {
  double acc = 0.0;
  for (Real v : t.data) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

using Tensor32 = TensorT<float>;
using Tensor64 = TensorT<double>;

}  // namespace dasr

#endif  // DASR_TENSOR_HPP_
