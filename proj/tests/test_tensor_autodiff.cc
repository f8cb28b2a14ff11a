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

#include <cstdio>
#include <filesystem>

#include "doctest.h"

#include "dasr/autodiff.hpp"
#include "dasr/checkpoint.hpp"
#include "dasr/rng.hpp"
#include "test_util.hpp"

using namespace dasr;
using dasr::testing::GradCheckMaxRelErr;
using dasr::testing::RandomTensor;
using dasr::testing::WeightedSum;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("matmul identity") {
  SeededRng rng(1);
  TensorT<double> eye({2, 2}, {1, 0, 0, 1});
  TensorT<double> a = RandomTensor({2, 2}, rng);
  auto out = MatMul(Var<double>::Constant(eye), Var<double>::Constant(a));
  for (int64_t i = 0; i < 4; ++i) CHECK(out.value().data[i] == doctest::Approx(a.data[i]));
}

TEST_CASE("softmax symmetry") {
  auto out = Softmax(Var<double>::Constant(TensorT<double>({1, 4}, {0, 0, 0, 0})));
  for (int64_t i = 0; i < 4; ++i) CHECK(out.value().data[i] == doctest::Approx(0.25));
}

TEST_CASE("layer_norm normalizes to zero mean unit variance") {
  auto x = Var<double>::Constant(TensorT<double>({1, 3}, {1, 2, 3}));
  auto gain = Var<double>::Constant(TensorT<double>::Full({1, 3}, 1.0));
  auto bias = Var<double>::Constant(TensorT<double>::Zeros({1, 3}));
  auto out = LayerNorm(x, gain, bias, 1e-12);
  double mean = 0, var = 0;
  for (double v : out.value().data) mean += v;
  mean /= 3;
  for (double v : out.value().data) var += (v - mean) * (v - mean);
  var /= 3;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("backward of sum of squares") {
  auto x = Var<double>::Leaf(TensorT<double>({2}, {1, 2}), true);
  Backward(ReduceSum(Mul(x, x)));
  CHECK(x.grad().data[0] == doctest::Approx(2.0));
  CHECK(x.grad().data[1] == doctest::Approx(4.0));
}

TEST_CASE("unreachable parameter keeps zero gradient") {
  ParamStore<double> store(3);
  auto used = store.Create("used", {2, 2}, Init::kXavier);
  auto unused = store.Create("unused", {2, 2}, Init::kXavier);
  Backward(ReduceSum(used));
  auto g = store.GradOf("unused");
  for (double v : g.data) CHECK(v == 0.0);
  CHECK(store.GradOf("used").data[0] == doctest::Approx(1.0));
  (void)unused;
}

TEST_CASE("backward rejects non-scalar loss") {
  auto x = Var<double>::Leaf(TensorT<double>({2}, {1, 2}), true);
  CHECK_THROWS_AS(Backward(Mul(x, x)), ShapeError);
}

TEST_CASE("finite checks flag non-finite forward values") {
  SetFiniteChecks(true);
  auto x = Var<double>::Leaf(TensorT<double>({1, 2}, {710.0, 1.0}), true);
  // exp overflows to inf inside swish's sigmoid denominator path? Use scale.
  CHECK_THROWS_AS(Mul(Scale(x, 1e308), Scale(x, 1e308)), NumericError);
  SetFiniteChecks(false);
  CHECK_NOTHROW(Mul(Scale(x, 1e308), Scale(x, 1e308)));
}

TEST_CASE("shape mismatch raises") {
  auto a = Var<double>::Constant(TensorT<double>::Zeros({2, 3}));
  auto b = Var<double>::Constant(TensorT<double>::Zeros({2, 2}));
  CHECK_THROWS_AS(MatMul(a, b), ShapeError);
  CHECK_THROWS_AS(Add(a, b), ShapeError);
  CHECK_THROWS_AS(Concat<double>({a, b}, 0), ShapeError);
}

// Every differentiable primitive against the central finite-difference
// oracle (h=1e-5, 64-bit) at 10 random points.
TEST_CASE("primitive gradients match finite differences") {
  SeededRng rng(2024);
  auto check = [&](const char* name, std::vector<Var<double>> leaves,
                   std::function<Var<double>()> build) {
    double err = GradCheckMaxRelErr(leaves, build, 10, rng);
    INFO(name);
    CHECK(err < 1e-4);
  };

  {
    auto a = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({4, 5}, rng), true);
    check("matmul", {a, b}, [&]() { return WeightedSum(MatMul(a, b), 101u); });
  }
  {
    auto a = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    check("add", {a, b}, [&]() { return WeightedSum(Add(a, b), 102u); });
  }
  {
    auto a = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    auto row = Var<double>::Leaf(RandomTensor({1, 4}, rng), true);
    check("add row broadcast", {a, row}, [&]() { return WeightedSum(Add(a, row), 103u); });
  }
  {
    auto a = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    auto s = Var<double>::Leaf(RandomTensor({1}, rng), true);
    check("add scalar / mul scalar", {a, s}, [&]() {
      return WeightedSum(Mul(Add(a, s), s), 104u);
    });
  }
  {
    auto a = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    check("mul", {a, b}, [&]() { return WeightedSum(Mul(a, b), 105u); });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({7, 3}, rng), true);
    auto w = Var<double>::Leaf(RandomTensor({5, 3}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({1, 3}, rng), true);
    check("conv1d causal", {x, w, b}, [&]() {
      return WeightedSum(Conv1dDepthwise(x, w, b, 4, 0), 106u);
    });
    check("conv1d symmetric", {x, w, b}, [&]() {
      return WeightedSum(Conv1dDepthwise(x, w, b, 2, 2), 107u);
    });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({3, 6}, rng), true);
    check("softmax", {x}, [&]() { return WeightedSum(Softmax(x), 108u); });
    check("log_softmax", {x}, [&]() { return WeightedSum(LogSoftmax(x), 109u); });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({4, 5}, rng), true);
    auto g = Var<double>::Leaf(RandomTensor({1, 5}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({1, 5}, rng), true);
    check("layer_norm", {x, g, b}, [&]() { return WeightedSum(LayerNorm(x, g, b), 110u); });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    check("sigmoid", {x}, [&]() { return WeightedSum(Sigmoid(x), 111u); });
    check("tanh", {x}, [&]() { return WeightedSum(Tanh(x), 112u); });
    check("swish", {x}, [&]() { return WeightedSum(Swish(x), 113u); });
  }
  {
    auto a = Var<double>::Leaf(RandomTensor({2, 3}, rng), true);
    auto b = Var<double>::Leaf(RandomTensor({4, 3}, rng), true);
    check("concat axis0", {a, b}, [&]() {
      return WeightedSum(Concat<double>({a, b}, 0), 114u);
    });
    auto c = Var<double>::Leaf(RandomTensor({2, 5}, rng), true);
    check("concat axis1", {a, c}, [&]() {
      return WeightedSum(Concat<double>({a, c}, 1), 115u);
    });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({5, 6}, rng), true);
    check("slice rows", {x}, [&]() { return WeightedSum(SliceOp(x, 0, 1, 3), 116u); });
    check("slice cols", {x}, [&]() { return WeightedSum(SliceOp(x, 1, 2, 3), 117u); });
    check("transpose", {x}, [&]() { return WeightedSum(Transpose(x), 118u); });
  }
  {
    auto table = Var<double>::Leaf(RandomTensor({6, 4}, rng), true);
    std::vector<int64_t> ids{3, 1, 3, 5};
    check("embed", {table}, [&]() { return WeightedSum(GatherRows(table, ids), 119u); });
    std::vector<int64_t> flat{0, 5, 2, 2, 7, 11};
    check("gather flat", {table}, [&]() {
      return WeightedSum(GatherFlat(table, flat, {2, 3}), 120u);
    });
  }
  {
    auto x = Var<double>::Leaf(RandomTensor({3, 4}, rng), true);
    check("reduce_sum", {x}, [&]() { return ReduceSum(Mul(x, x)); });
    check("reduce_mean", {x}, [&]() { return ReduceMean(Mul(x, x)); });
  }
}

TEST_CASE("forward is deterministic and backward repeats bit-identically") {
  SeededRng rng(7);
  ParamStore<double> store(99);
  auto w = store.Create("w", {4, 4}, Init::kXavier);
  auto x = Var<double>::Constant(RandomTensor({3, 4}, rng));

  auto run = [&]() {
    store.ZeroGrads();
    auto loss = ReduceSum(Tanh(MatMul(x, w)));
    Backward(loss);
    return std::make_pair(loss.value().data[0], store.GradOf("w"));
  };
  auto [l1, g1] = run();
  auto [l2, g2] = run();
  CHECK(l1 == l2);
  for (int64_t i = 0; i < g1.numel(); ++i) CHECK(g1.data[i] == g2.data[i]);
}

TEST_CASE("seeded rng determinism") {
  SeededRng a(7), b(7);
  for (int i = 0; i < 1000; ++i) CHECK(a.NextU64() == b.NextU64());

  SeededRng c(7), d(7);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.Uniform() == d.Uniform());
    CHECK(c.Normal() == d.Normal());
  }
}

TEST_CASE("categorical over one-hot weights") {
  SeededRng rng(11);
  std::vector<double> weights(8, 0.0);
  weights[5] = 1.0;
  for (int i = 0; i < 50; ++i) CHECK(rng.Categorical(weights) == 5);
}

TEST_CASE("uniform stream empirical mean") {
  SeededRng rng(123);
  double acc = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += rng.Uniform();
  double mean = acc / n;
  CHECK(mean > 0.49);
  CHECK(mean < 0.51);
}

TEST_CASE("checkpoint roundtrip") {
  NamedTensorList items;
  SeededRng rng(5);
  items.emplace_back("a/w", dasr::testing::RandomTensor32({3, 4}, rng));
  items.emplace_back("b/bias", dasr::testing::RandomTensor32({1, 7}, rng));
  auto path = std::filesystem::temp_directory_path() / "dasr_ckpt_test.bin";
  SaveCheckpoint(path.string(), items);
  auto loaded = LoadCheckpoint(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].first == "a/w");
  CHECK(loaded[1].first == "b/bias");
  for (size_t i = 0; i < 2; ++i) {
    CHECK(loaded[i].second.shape == items[i].second.shape);
    for (int64_t j = 0; j < items[i].second.numel(); ++j)
      CHECK(loaded[i].second.data[j] == items[i].second.data[j]);
  }
  std::filesystem::remove(path);
}

TEST_SUITE_END();
