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
#include <filesystem>
#include <random>

#include "foresight/numerics/checkpoint.hpp"
#include "foresight/policy/policy.hpp"
#include "test_util.hpp"

namespace foresight {
namespace {

using testing::random_tensor;
using V = ad::Var<double>;

PolicyConfig tiny_config() {
  PolicyConfig cfg;
  cfg.trunk = {16, 2, 2, 2};
  cfg.horizon = 3;
  cfg.state_dim = 4;
  cfg.tasks = 3;
  cfg.cameras = 2;
  cfg.image_height = 16;
  cfg.image_width = 8;
  cfg.patch = 4;
  return cfg;
}

PolicyInputs<double> random_inputs(const PolicyConfig& cfg, std::mt19937_64& rng, std::size_t hist = 2,
                                   std::size_t queries = 3) {
  PolicyInputs<double> in;
  in.task = 1;
  in.images = random_tensor({cfg.cameras, cfg.image_height, cfg.image_width}, rng, 0.0, 2.0);
  if (hist) in.history = V::constant(random_tensor({hist, cfg.trunk.channels}, rng));
  if (queries) in.queries = V::constant(random_tensor({queries, cfg.trunk.channels}, rng));
  in.state = random_tensor({cfg.state_dim}, rng);
  return in;
}

TEST(BlockMask, ExampleAndIntraBlock) {
  const auto m = build_block_mask({{2, 1, 2, 1, 2}});
  EXPECT_FALSE(m.at(0, 3));
  EXPECT_TRUE(m.at(3, 0));
  EXPECT_TRUE(m.at(3, 4) && m.at(4, 3));
  EXPECT_TRUE(m.at(6, 7) && m.at(7, 6));
  const auto add = m.additive<double>();
  EXPECT_EQ(add.at(0, 3), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(add.at(3, 0), 0.0);
  EXPECT_THROW(build_block_mask({{0, 0, 0, 0, 0}}), std::invalid_argument);
}

TEST(BlockMask, MatchesLoopOracleForSmallTuples) {
  std::size_t tuples = 0;
  std::array<std::size_t, 5> s{};
  for (s[0] = 0; s[0] <= 3; ++s[0])
    for (s[1] = 0; s[1] <= 3; ++s[1])
      for (s[2] = 0; s[2] <= 3; ++s[2])
        for (s[3] = 0; s[3] <= 3; ++s[3])
          for (s[4] = 0; s[4] <= 3; ++s[4]) {
            const std::size_t n = s[0] + s[1] + s[2] + s[3] + s[4];
            if (n == 0) continue;
            const auto m = build_block_mask({s});
            std::vector<std::size_t> id;
            for (std::size_t b = 0; b < 5; ++b)
              for (std::size_t i = 0; i < s[b]; ++i) id.push_back(b);
            for (std::size_t q = 0; q < n; ++q)
              for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(m.at(q, k), id[k] <= id[q]);
            ++tuples;
          }
  EXPECT_EQ(tuples, 1023u);
}

TEST(EmbedContext, LayoutAndPurity) {
  PolicyConfig cfg = tiny_config();
  cfg.image_height = cfg.image_width = 32;
  cfg.patch = 8;
  cfg.cameras = 3;
  ParameterStore<double> store(1);
  auto pol = Policy<double>::create(store, "policy", cfg);
  EXPECT_EQ(cfg.patches_per_view(), 16u);
  std::mt19937_64 rng(1);
  const auto in = random_inputs(cfg, rng, 8, 8 + 4);
  const auto a = pol.embed_context(in);
  EXPECT_EQ(a.layout.sizes, (std::array<std::size_t, 5>{1 + 48, 8, 12, 1, 3}));
  EXPECT_EQ(a.tokens.shape(), (Shape{a.layout.context(), 16}));
  EXPECT_EQ(a.layout.total(), 49u + 8 + 12 + 1 + 3);
  EXPECT_EQ(a.tokens.value(), pol.embed_context(in).tokens.value());
  auto bad = in;
  bad.task = 3;
  EXPECT_THROW(pol.embed_context(bad), std::invalid_argument);
  EXPECT_THROW(Policy<double>::create(store, "other", [] {
                 auto c = tiny_config();
                 c.patch = 5;
                 return c;
               }()),
               std::invalid_argument);
}

TEST(Trunk, SingleTokenIsResidualStack) {
  ParameterStore<double> store(2);
  const TrunkConfig cfg{8, 2, 2, 2};
  auto trunk = Trunk<double>::create(store, "t", cfg);
  std::mt19937_64 rng(2);
  const auto x = V::constant(random_tensor({1, 8}, rng));
  const auto out = trunk.forward(x, Tensor<double>({1, 1}), 1).value();

  auto ln = [&](const V& v, const std::string& n) {
    return ad::layer_norm(v, store.get(n + ".gain"), store.get(n + ".bias"));
  };
  auto lin = [&](const V& v, const std::string& n, bool bias) {
    auto y = ad::matmul(v, store.get(n + ".weight"));
    return bias ? ad::add(y, store.get(n + ".bias")) : y;
  };
  V h = x;
  for (int l = 0; l < 2; ++l) {
    const std::string p = "t.layer" + std::to_string(l);
    h = ad::add(h, lin(lin(ln(h, p + ".ln1"), p + ".attn.v", false), p + ".attn.out", true));
    h = ad::add(h, lin(ad::tanh(lin(ln(h, p + ".ln2"), p + ".mlp.fc1", true)), p + ".mlp.fc2", true));
  }
  const auto expect = ln(h, "t.final").value();
  for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(out[c], expect[c], 1e-13);
}

TEST(Trunk, EarlierBlocksIgnoreLaterTokens) {
  ParameterStore<double> store(3);
  auto trunk = Trunk<double>::create(store, "t", {8, 2, 2, 2});
  std::mt19937_64 rng(3);
  const BlockLayout layout{{2, 2, 1, 1, 2}};
  const auto mask = build_block_mask(layout).additive<double>();
  auto x = random_tensor({8, 8}, rng);
  const auto a = trunk.forward(V::constant(x), mask, 6).value();
  for (std::size_t c = 0; c < 8; ++c) x.at(4, c) += 1.0;  // block 2 token
  const auto b = trunk.forward(V::constant(x), mask, 6).value();
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(a.at(r, c), b.at(r, c));
  bool later_changed = false;
  for (std::size_t r = 5; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) later_changed |= a.at(r, c) != b.at(r, c);
  EXPECT_TRUE(later_changed);
}

TEST(Trunk, SwappingSameBlockTokensPermutesOutputs) {
  ParameterStore<double> store(4);
  auto trunk = Trunk<double>::create(store, "t", {8, 2, 2, 2});
  std::mt19937_64 rng(4);
  const BlockLayout layout{{3, 3, 0, 1, 2}};
  const auto mask = build_block_mask(layout).additive<double>();
  auto x = random_tensor({9, 8}, rng);
  const auto a = trunk.forward(V::constant(x), mask, 7).value();
  for (std::size_t c = 0; c < 8; ++c) std::swap(x.at(3, c), x.at(5, c));
  const auto b = trunk.forward(V::constant(x), mask, 7).value();
  for (std::size_t r = 0; r < 9; ++r) {
    const std::size_t src = r == 3 ? 5 : (r == 5 ? 3 : r);
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(b.at(r, c), a.at(src, c), 1e-13);
  }
}

TEST(Trunk, DeterministicAtDoublePrecision) {
  ParameterStore<double> store(5);
  auto trunk = Trunk<double>::create(store, "t", {8, 2, 2, 2});
  std::mt19937_64 rng(5);
  const auto x = V::constant(random_tensor({6, 8}, rng));
  const auto mask = build_block_mask({{2, 1, 1, 1, 1}}).additive<double>();
  EXPECT_EQ(trunk.forward(x, mask, 5).value(), trunk.forward(x, mask, 5).value());
}

TEST(FlowMatching, InterpolantAndLoss) {
  std::mt19937_64 rng(6);
  const auto action = random_tensor({3, 7}, rng);
  const auto noise = random_tensor({3, 7}, rng);
  const auto end = make_flow_sample(action, noise, 1.0);
  EXPECT_EQ(end.noisy, action);
  const auto start = make_flow_sample(action, noise, 0.0);
  EXPECT_EQ(start.noisy, noise);
  const auto mid = make_flow_sample(action, noise, 0.3);
  EXPECT_EQ(cfm_loss(V::constant(mid.target), mid.target).item(), 0.0);
  const auto vhat = random_tensor({3, 7}, rng);
  double oracle = 0.0;
  for (std::size_t i = 0; i < 21; ++i) oracle += std::pow(vhat[i] - (action[i] - noise[i]), 2);
  EXPECT_NEAR(cfm_loss(V::constant(vhat), mid.target).item(), oracle / 21.0, 1e-15);
  EXPECT_GE(cfm_loss(V::constant(vhat), mid.target).item(), 0.0);
  EXPECT_THROW(make_flow_sample(action, noise, 1.5), std::invalid_argument);
}

TEST(TotalLoss, WeightedSum) {
  auto s = [](double v) { return V::constant(Tensor<double>::scalar(v)); };
  EXPECT_EQ(total_loss(s(2), s(3), s(4), {}).item(), 9.0);
  EXPECT_EQ(total_loss(s(0), s(0), s(0), {}).item(), 0.0);
  EXPECT_EQ(total_loss(s(2), s(3), s(4), {0.5, 2.0, 0.0}).item(), 7.0);
  EXPECT_THROW(total_loss(s(1), s(1), s(1), {-1.0, 1.0, 1.0}), std::invalid_argument);
}

class PolicyFixture : public ::testing::Test {
 protected:
  PolicyConfig cfg = tiny_config();
  ParameterStore<double> store{7};
  Policy<double> pol = Policy<double>::create(store, "policy", cfg);
  std::mt19937_64 rng{7};
};

TEST_F(PolicyFixture, SamplerHonorsVelocityOverride) {
  const auto ctx = pol.embed_context(random_inputs(cfg, rng));
  const auto cache = pol.build_kv_cache(ctx);
  const auto noise = random_tensor({3, 7}, rng);
  const auto zero = pol.sample_actions(cache, 10, noise, [](const Tensor<double>& x, double) {
    return Tensor<double>(x.shape());
  });
  EXPECT_EQ(zero, noise);
  const auto c = random_tensor({3, 7}, rng);
  const auto shifted = pol.sample_actions(cache, 10, noise, [&](const Tensor<double>&, double) { return c; });
  for (std::size_t i = 0; i < 21; ++i) EXPECT_NEAR(shifted[i], noise[i] + c[i], 1e-14);
  EXPECT_THROW(pol.sample_actions(cache, 0, noise), std::invalid_argument);
}

TEST_F(PolicyFixture, CachedActionPassIsBitIdentical) {
  const auto ctx = pol.embed_context(random_inputs(cfg, rng));
  const auto cache = pol.build_kv_cache(ctx);
  EXPECT_EQ(cache.length, ctx.layout.context());
  EXPECT_EQ(cache.keys.size(), 2u);
  const auto x = random_tensor({3, 7}, rng);
  for (double s : {0.0, 0.37, 0.9}) {
    const auto full = pol.velocity(pol.forward(ctx, pol.embed_actions(x, s)).actions).value();
    EXPECT_EQ(pol.cached_velocity(cache, x, s), full);
  }
  const auto keys_before = cache.keys[1];
  pol.sample_actions(cache, 4, std::uint64_t{3});
  EXPECT_EQ(cache.keys[1], keys_before);
  EXPECT_EQ(pol.sample_actions(cache, 4, std::uint64_t{3}), pol.sample_actions(cache, 4, std::uint64_t{3}));
}

TEST_F(PolicyFixture, QueryTokensInfluenceActions) {
  auto in = random_inputs(cfg, rng);
  const auto noise = random_tensor({3, 7}, rng);
  const auto a = pol.sample_actions(pol.build_kv_cache(pol.embed_context(in)), 3, noise);
  in.queries = V::constant(Tensor<double>({3, 16}));
  const auto b = pol.sample_actions(pol.build_kv_cache(pol.embed_context(in)), 3, noise);
  EXPECT_NE(a, b);
}

TEST_F(PolicyFixture, EmptyBlocksAreAllowed) {
  const auto ctx = pol.embed_context(random_inputs(cfg, rng, 0, 0));
  EXPECT_EQ(ctx.layout.sizes[1], 0u);
  EXPECT_EQ(ctx.layout.sizes[2], 0u);
  const auto x = random_tensor({3, 7}, rng);
  EXPECT_EQ(pol.cached_velocity(pol.build_kv_cache(ctx), x, 0.5),
            pol.velocity(pol.forward(ctx, pol.embed_actions(x, 0.5)).actions).value());
}

TEST_F(PolicyFixture, GradientsMatchFiniteDifferences) {
  const auto in = random_inputs(cfg, rng);
  const auto action = random_tensor({3, 7}, rng);
  const auto noise = random_tensor({3, 7}, rng);
  const auto flow = make_flow_sample(action, noise, 0.4);
  std::vector<V> leaves;
  for (const auto& [n, v] : store.entries()) leaves.push_back(v);
  const auto report = testing::check_gradients(leaves, [&] {
    const auto ctx = pol.embed_context(in);
    const auto out = pol.forward(ctx, pol.embed_actions(flow.noisy, flow.s));
    return ad::add(cfm_loss(pol.velocity(out.actions), flow.target), ad::mean(ad::mul(out.context, out.context)));
  });
  EXPECT_LT(report.max_absolute, 1e-7);
  EXPECT_GT(report.checked, 500u);
}

TEST(PolicyFloat, CachedPassWithinTolerance) {
  const auto cfg = tiny_config();
  ParameterStore<float> store(8);
  auto pol = Policy<float>::create(store, "policy", cfg);
  std::mt19937_64 rng(8);
  PolicyInputs<float> in;
  in.task = 0;
  in.images = random_tensor({2, 16, 8}, rng).cast<float>();
  in.history = ad::Var<float>::constant(random_tensor({2, 16}, rng).cast<float>());
  in.queries = ad::Var<float>::constant(random_tensor({3, 16}, rng).cast<float>());
  in.state = random_tensor({4}, rng).cast<float>();
  const auto ctx = pol.embed_context(in);
  const auto x = random_tensor({3, 7}, rng).cast<float>();
  const auto full = pol.velocity(pol.forward(ctx, pol.embed_actions(x, 0.25f)).actions).value();
  const auto cached = pol.cached_velocity(pol.build_kv_cache(ctx), x, 0.25f);
  for (std::size_t i = 0; i < full.size(); ++i) {
    EXPECT_LE(std::abs(full[i] - cached[i]), 1e-5f * std::max(1.0f, std::abs(full[i])));
  }
}

TEST(Checkpoint, BitExactRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "foresight_ckpt_test";
  std::filesystem::remove_all(dir);
  const auto cfg = tiny_config();
  ParameterStore<double> a(9), b(10);
  Policy<double>::create(a, "policy", cfg);
  Policy<double>::create(b, "policy", cfg);
  save_checkpoint(dir, a);
  load_checkpoint(dir, b);
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    EXPECT_EQ(a.entries()[i].second.value(), b.entries()[i].second.value());
  }
  ParameterStore<double> other(1);
  other.create("x", {2});
  EXPECT_THROW(load_checkpoint(dir, other), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace foresight
