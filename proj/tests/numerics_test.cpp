// Copyright 2026 The Foresight Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "foresight/numerics/autodiff.hpp"
#include "foresight/numerics/params.hpp"
#include "test_util.hpp"

namespace foresight {
namespace {

using ad::Var;
using testing::check_gradients;
using testing::random_tensor;
using V = Var<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Weighted sum so that every output element carries a distinct, generic
// upstream gradient.
V weighted(const V& y, std::mt19937_64& rng) {
  return ad::sum(ad::mul(y, V::constant(random_tensor(y.shape(), rng))));
}

TEST(Autodiff, SumOfSquaresGradient) {
  auto x = V::parameter(Tensor<double>({3}, {1.0, 2.0, 3.0}));
  ad::sum(ad::mul(x, x)).backward();
  EXPECT_EQ(x.grad_tensor(), Tensor<double>({3}, {2.0, 4.0, 6.0}));
}

TEST(Autodiff, MatmulChainMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    auto a = V::parameter(random_tensor({4, 4}, rng));
    auto b = V::parameter(random_tensor({4, 4}, rng));
    auto c = V::parameter(random_tensor({4, 4}, rng));
    auto w = V::constant(random_tensor({4, 4}, rng));
    auto report = check_gradients({a, b, c}, [&] {
      return ad::sum(ad::mul(ad::matmul(ad::matmul(a, b), c), w));
    });
    EXPECT_LT(report.max_relative, 1e-6) << "seed " << seed;
    EXPECT_EQ(report.checked, 48u);
  }
}

TEST(Autodiff, MaskedSoftmaxZeroesMaskedPosition) {
  auto x = V::constant(Tensor<double>({1, 4}, {0.3, -1.2, 2.0, 0.5}));
  Tensor<double> mask({1, 4}, {0.0, -kInf, 0.0, 0.0});
  auto y = ad::masked_softmax(x, mask).value();
  EXPECT_EQ(y[1], 0.0);
  EXPECT_NEAR(y[0] + y[2] + y[3], 1.0, 1e-12);
}

TEST(Autodiff, MaskedSoftmaxRowsSumToOne) {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution drop(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = V::constant(random_tensor({3, 5, 7}, rng, -5.0, 5.0));
    Tensor<double> mask({5, 7});
    for (std::size_t r = 0; r < 5; ++r) {
      for (std::size_t c = 1; c < 7; ++c) mask.at(r, c) = drop(rng) ? -kInf : 0.0;
    }
    auto y = ad::masked_softmax(x, mask).value();
    for (std::size_t row = 0; row < 15; ++row) {
      double total = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        if (mask[(row % 5) * 7 + c] == -kInf) {
          EXPECT_EQ(y[row * 7 + c], 0.0);
        }
        total += y[row * 7 + c];
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

// Every differentiable op against central differences, five seeds each.
class OpGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(OpGradient, EveryOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(GetParam());
  auto check = [&](const char* name, std::vector<V> leaves, std::function<V()> f) {
    auto report = check_gradients(leaves, f);
    EXPECT_LT(report.max_relative, 1e-6) << name << " seed " << GetParam();
  };
  auto p = [&](Shape s, double lo = -1.0, double hi = 1.0) { return V::parameter(random_tensor(std::move(s), rng, lo, hi)); };

  {
    auto a = p({2, 3, 4}), b = p({3, 4}), c = p({1});
    auto w = V::constant(random_tensor({2, 3, 4}, rng));
    check("add", {a, b, c}, [=] { return ad::sum(ad::mul(ad::add(ad::add(a, b), c), w)); });
    check("add-reversed", {a, b}, [=] { return ad::sum(ad::mul(ad::add(b, a), w)); });
    check("sub", {a, b}, [=] { return ad::sum(ad::mul(ad::sub(a, b), w)); });
    check("sub-reversed", {a, b}, [=] { return ad::sum(ad::mul(ad::sub(b, a), w)); });
    check("mul", {a, b, c}, [=] { return ad::sum(ad::mul(ad::mul(ad::mul(a, b), c), w)); });
  }
  {
    auto a = p({2, 3, 4}), b = p({4, 5}), c = p({2, 5, 3});
    std::mt19937_64 wr(GetParam() + 100);
    check("matmul-folded", {a, b}, [=, &wr] {
      std::mt19937_64 r = wr;
      return weighted(ad::matmul(a, b), r);
    });
    check("matmul-batched", {a, c}, [=, &wr] {
      std::mt19937_64 r = wr;
      return weighted(ad::matmul(c, a), r);
    });
  }
  {
    auto a = p({2, 3, 4});
    auto w1 = V::constant(random_tensor({4, 3, 2}, rng));
    auto w2 = V::constant(random_tensor({6, 4}, rng));
    check("transpose", {a}, [=] { return ad::sum(ad::mul(ad::transpose(a, 0, 2), w1)); });
    check("reshape", {a}, [=] { return ad::sum(ad::mul(ad::reshape(a, {6, 4}), w2)); });
  }
  {
    auto a = p({2, 3}), b = p({2, 2});
    auto w = V::constant(random_tensor({2, 5}, rng));
    auto ws = V::constant(random_tensor({2, 1}, rng));
    check("concat", {a, b}, [=] { return ad::sum(ad::mul(ad::concat<double>({a, b}, 1), w)); });
    check("slice", {a}, [=] { return ad::sum(ad::mul(ad::slice(a, 1, 1, 2), ws)); });
    check("mean", {a}, [=] { return ad::mean(ad::mul(a, a)); });
  }
  {
    auto a = p({3, 4});
    auto w = V::constant(random_tensor({3, 4}, rng));
    check("exp", {a}, [=] { return ad::sum(ad::mul(ad::exp(a), w)); });
    check("tanh", {a}, [=] { return ad::sum(ad::mul(ad::tanh(a), w)); });
    check("sigmoid", {a}, [=] { return ad::sum(ad::mul(ad::sigmoid(a), w)); });
    Tensor<double> mask({3, 4});
    mask.at(0, 2) = -kInf;
    mask.at(2, 0) = -kInf;
    check("masked_softmax", {a}, [=] { return ad::sum(ad::mul(ad::masked_softmax(a, mask), w)); });
  }
  {
    auto x = p({3, 6}), g = p({6}), b = p({6});
    auto w = V::constant(random_tensor({3, 6}, rng));
    check("layer_norm", {x, g, b}, [=] { return ad::sum(ad::mul(ad::layer_norm(x, g, b), w)); });
  }
  {
    auto a = p({2, 5}), b = p({2, 5}, 2.0, 3.0);
    auto w = V::constant(random_tensor({2, 5}, rng));
    check("squared_error", {a, b}, [=] { return ad::sum(ad::mul(ad::squared_error(a, b), w)); });
    check("absolute_error", {a, b}, [=] { return ad::sum(ad::mul(ad::absolute_error(a, b), w)); });
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradient, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Autodiff, GradientAccumulationIsAdditive) {
  std::mt19937_64 rng(3);
  auto a = V::parameter(random_tensor({3, 3}, rng));
  auto b = V::parameter(random_tensor({3, 2}, rng));
  auto loss = ad::sum(ad::tanh(ad::matmul(a, b)));
  loss.backward();
  auto once = a.grad_tensor();
  auto once_b = b.grad_tensor();
  loss.backward();
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(a.grad()[i], 2.0 * once[i]);
  for (std::size_t i = 0; i < once_b.size(); ++i) EXPECT_EQ(b.grad()[i], 2.0 * once_b[i]);
}

TEST(Autodiff, BackwardOnNonScalarIsRejected) {
  auto x = V::parameter(Tensor<double>({2}, {1.0, 2.0}));
  EXPECT_THROW(ad::tanh(x).backward(), ShapeError);
}

TEST(Autodiff, ShapeMismatchNamesOpAndShapes) {
  auto a = V::constant(Tensor<double>({2, 3}));
  auto b = V::constant(Tensor<double>({4}));
  try {
    ad::add(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos);
    EXPECT_NE(msg.find("[2,3]"), std::string::npos);
    EXPECT_NE(msg.find("[4]"), std::string::npos);
  }
  auto m = V::constant(Tensor<double>({4, 5}));
  EXPECT_THROW(ad::matmul(a, m).value(), ShapeError);
  EXPECT_THROW(ad::slice(a, 1, 2, 5), ShapeError);
}

TEST(Autodiff, ExpInputIsClamped) {
  auto x = V::parameter(Tensor<double>({2}, {100.0, 1.0}));
  auto y = ad::exp(x);
  EXPECT_EQ(y.value()[0], std::exp(30.0));
  EXPECT_TRUE(y.value().all_finite());
  ad::sum(y).backward();
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], std::exp(1.0));
}

TEST(Autodiff, NoGradGuardSkipsRecording) {
  auto x = V::parameter(Tensor<double>({2}, {1.0, 2.0}));
  {
    ad::NoGradGuard guard;
    auto y = ad::sum(ad::mul(x, x));
    EXPECT_FALSE(y.requires_grad());
    EXPECT_DOUBLE_EQ(y.item(), 5.0);
  }
  EXPECT_TRUE(ad::sum(x).requires_grad());
}

TEST(TensorSerialization, HeaderLayout) {
  Tensor<double> t({2, 3}, {1, 2, 3, 4, 5, 6});
  std::ostringstream os;
  write_tensor(os, t);
  const std::string bytes = os.str();
  ASSERT_EQ(bytes.size(), 4u + 8u + 16u + 8u + 48u);
  EXPECT_EQ(bytes.substr(0, 4), "GPT0");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2u);  // rank, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[20]), 3u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28]), 8u);  // element width
}

TEST(TensorSerialization, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> extent(1, 5), rank(1, 4);
  for (int trial = 0; trial < 25; ++trial) {
    Shape s(rank(rng));
    for (auto& e : s) e = extent(rng);
    auto t = random_tensor(s, rng, -1e6, 1e6);
    std::stringstream ss;
    write_tensor(ss, t);
    EXPECT_EQ(read_tensor<double>(ss), t);

    auto f = t.cast<float>();
    std::stringstream sf;
    write_tensor(sf, f);
    EXPECT_EQ(read_tensor<float>(sf), f);
  }
}

TEST(TensorSerialization, RejectsBadMagic) {
  std::istringstream in("XXXX0000000000000000");
  EXPECT_THROW(read_tensor<double>(in), std::runtime_error);
}

TEST(ParameterStore, InitDependsOnNameNotOrder) {
  ParameterStore<double> s1(42), s2(42);
  s1.create("a", {3, 2});
  auto b1 = s1.create("b", {4});
  auto b2 = s2.create("b", {4});
  EXPECT_EQ(b1.value(), b2.value());
  EXPECT_THROW(s1.create("a", {1}), std::invalid_argument);
  EXPECT_THROW(s1.get("missing"), std::out_of_range);
}

}  // namespace
}  // namespace foresight
