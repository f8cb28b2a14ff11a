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

#ifndef DASR_LSTM_HPP_
#define DASR_LSTM_HPP_

#include <string>
#include <utility>
#include <vector>

#include "dasr/layers.hpp"

namespace dasr {

// Unidirectional LSTM with an output projection (the recurrent input is the
// projected state). Gate order i, f, g, o; forget bias starts at 1.
template <typename Real>
class LstmLayer {
 public:
  struct State {
    Var<Real> h;  // [1, proj]
    Var<Real> c;  // [1, cell]
  };

  LstmLayer() = default;
  LstmLayer(ParamHost<Real>& host, const std::string& prefix, int64_t in,
            int64_t cell, int64_t proj)
      : in_(in), cell_(cell), proj_(proj) {
    wx_ = host.Create(prefix + "/wx", {in, 4 * cell}, Init::kXavier);
    wh_ = host.Create(prefix + "/wh", {proj, 4 * cell}, Init::kXavier);
    b_ = host.Create(prefix + "/b", {1, 4 * cell}, Init::kZeros);
    wp_ = host.Create(prefix + "/wp", {cell, proj}, Init::kXavier);
    if (!b_.node()->value.data.empty()) {
      for (int64_t i = cell; i < 2 * cell; ++i)
        b_.node()->value.data[static_cast<size_t>(i)] = Real(1);
    }
  }

  State InitialState() const {
    return {Var<Real>::Constant(TensorT<Real>::Zeros({1, proj_})),
            Var<Real>::Constant(TensorT<Real>::Zeros({1, cell_}))};
  }

  std::pair<Var<Real>, State> Step(const Var<Real>& x_row, const State& state) const {
    Var<Real> z = Add(Add(MatMul(x_row, wx_), MatMul(state.h, wh_)), b_);
    Var<Real> i = Sigmoid(SliceOp(z, 1, 0, cell_));
    Var<Real> f = Sigmoid(SliceOp(z, 1, cell_, cell_));
    Var<Real> g = Tanh(SliceOp(z, 1, 2 * cell_, cell_));
    Var<Real> o = Sigmoid(SliceOp(z, 1, 3 * cell_, cell_));
    Var<Real> c = Add(Mul(f, state.c), Mul(i, g));
    Var<Real> h = MatMul(Mul(o, Tanh(c)), wp_);
    return {h, State{h, c}};
  }

  // Full sequence [T,in] -> [T,proj].
  Var<Real> Forward(const Var<Real>& x) const {
    int64_t t_len = x.rows();
    State state = InitialState();
    std::vector<Var<Real>> outs;
    outs.reserve(static_cast<size_t>(t_len));
    for (int64_t t = 0; t < t_len; ++t) {
      auto [h, next] = Step(SliceOp(x, 0, t, 1), state);
      outs.push_back(h);
      state = next;
    }
    return t_len == 1 ? outs[0] : Concat(outs, 0);
  }

  int64_t proj() const { return proj_; }

 private:
  int64_t in_ = 0, cell_ = 0, proj_ = 0;
  Var<Real> wx_, wh_, b_, wp_;
};

}  // namespace dasr

#endif  // DASR_LSTM_HPP_
