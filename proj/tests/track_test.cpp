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
#include <numeric>
#include <random>

#include "foresight/track/track_predictor.hpp"
#include "test_util.hpp"

namespace foresight {
namespace {

using testing::random_tensor;
using V = ad::Var<double>;

TrackConfig small_config(std::size_t k = 3, std::size_t c = 8, std::size_t l = 5, std::size_t h = 4) {
  return {k, c, l, h};
}

KeypointHistory<double> full_history(std::size_t k, std::size_t l, std::mt19937_64& rng) {
  KeypointHistory<double> h{random_tensor({k, l, 3}, rng), Tensor<double>({k, l})};
  for (auto& v : h.valid.data()) v = 1.0;
  return h;
}

// y = x W + b applied to a row vector.
std::vector<double> affine(const std::vector<double>& x, const Tensor<double>& w, const Tensor<double>* b) {
  std::vector<double> y(w.dim(1), 0.0);
  for (std::size_t o = 0; o < w.dim(1); ++o) {
    for (std::size_t i = 0; i < x.size(); ++i) y[o] += x[i] * w.at(i, o);
    if (b != nullptr) y[o] += (*b)[o];
  }
  return y;
}

std::vector<double> mlp(const ParameterStore<double>& store, const std::string& name, std::vector<double> x);

// Embedded history step: MLP(p) + sin/cos of the step age at 1 / 10000^(2i/C).
std::vector<double> embed_step(const ParameterStore<double>& store, const KeypointHistory<double>& h, std::size_t k,
                               std::size_t l) {
  auto e = mlp(store, "track.embed", {h.positions.at(k, l, 0), h.positions.at(k, l, 1), h.positions.at(k, l, 2)});
  const double age = double(h.length() - 1 - l);
  for (std::size_t i = 0; 2 * i < e.size(); ++i) {
    const double freq = std::pow(10000.0, -2.0 * double(i) / double(e.size()));
    e[2 * i] += std::sin(age * freq);
    if (2 * i + 1 < e.size()) e[2 * i + 1] += std::cos(age * freq);
  }
  return e;
}

std::vector<double> mlp(const ParameterStore<double>& store, const std::string& name, std::vector<double> x) {
  auto h = affine(x, store.get(name + ".fc1.weight").value(), &store.get(name + ".fc1.bias").value());
  for (auto& v : h) v = std::tanh(v);
  return affine(h, store.get(name + ".fc2.weight").value(), &store.get(name + ".fc2.bias").value());
}

TEST(HistoryEncoder, OneTokenPerKeypoint) {
  ParameterStore<double> store(1);
  auto tp = TrackPredictor<double>::create(store, "track", small_config(8, 16, 6));
  std::mt19937_64 rng(1);
  EXPECT_EQ(tp.encode_history(full_history(8, 6, rng)).shape(), (Shape{8, 16}));
}

TEST(HistoryEncoder, SingleStepTokenIsItsValueProjection) {
  ParameterStore<double> store(2);
  auto tp = TrackPredictor<double>::create(store, "track", small_config(2, 8, 1));
  std::mt19937_64 rng(2);
  const auto h = full_history(2, 1, rng);
  const auto token = tp.encode_history(h).value();
  for (std::size_t k = 0; k < 2; ++k) {
    const auto e = embed_step(store, h, k, 0);
    const auto v = affine(e, store.get("track.attn.v.weight").value(), nullptr);
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(token.at(k, c), v[c], 1e-14);
  }
}

TEST(HistoryEncoder, MatchesHandRolledAttention) {
  ParameterStore<double> store(3);
  const auto cfg = small_config(3, 8, 5);
  auto tp = TrackPredictor<double>::create(store, "track", cfg);
  std::mt19937_64 rng(3);
  auto h = full_history(3, 5, rng);
  // Keypoint 1 has only its last three steps.
  h.valid.at(1, 0) = h.valid.at(1, 1) = 0.0;
  const auto token = tp.encode_history(h).value();

  const auto& query = store.get("track.history_query").value();
  const auto q = affine(std::vector<double>(query.data().begin(), query.data().end()),
                        store.get("track.attn.q.weight").value(), nullptr);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> scores, weights;
    std::vector<std::vector<double>> values;
    for (std::size_t l = 0; l < 5; ++l) {
      if (h.valid.at(k, l) == 0.0) continue;
      const auto e = embed_step(store, h, k, l);
      const auto key = affine(e, store.get("track.attn.k.weight").value(), nullptr);
      values.push_back(affine(e, store.get("track.attn.v.weight").value(), nullptr));
      scores.push_back(std::inner_product(key.begin(), key.end(), q.begin(), 0.0) / std::sqrt(8.0));
    }
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - mx);
    for (std::size_t c = 0; c < 8; ++c) {
      double expect = 0.0;
      for (std::size_t i = 0; i < scores.size(); ++i) expect += std::exp(scores[i] - mx) / z * values[i][c];
      EXPECT_NEAR(token.at(k, c), expect, 1e-13);
    }
  }
}

TEST(HistoryEncoder, PaddedStepsDoNotMatter) {
  ParameterStore<double> store(4);
  auto tp = TrackPredictor<double>::create(store, "track", small_config());
  std::mt19937_64 rng(4);
  auto h = full_history(3, 5, rng);
  h.valid.at(0, 0) = 0.0;
  const auto a = tp.encode_history(h).value();
  h.positions.at(0, 0, 1) += 10.0;
  EXPECT_EQ(a, tp.encode_history(h).value());
}

TEST(HistoryEncoder, RejectsEmptyOrGappedValidity) {
  ParameterStore<double> store(5);
  auto tp = TrackPredictor<double>::create(store, "track", small_config());
  std::mt19937_64 rng(5);
  auto h = full_history(3, 5, rng);
  for (std::size_t l = 0; l < 5; ++l) h.valid.at(2, l) = 0.0;
  EXPECT_THROW(tp.encode_history(h), std::invalid_argument);
  h = full_history(3, 5, rng);
  h.valid.at(1, 3) = 0.0;
  EXPECT_THROW(tp.encode_history(h), std::invalid_argument);
}

TEST(HistoryEncoder, PermutationEquivariant) {
  ParameterStore<double> store(6);
  auto tp = TrackPredictor<double>::create(store, "track", small_config(4, 8, 5));
  std::mt19937_64 rng(6);
  auto h = full_history(4, 5, rng);
  h.valid.at(2, 0) = 0.0;
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  KeypointHistory<double> p{Tensor<double>({4, 5, 3}), Tensor<double>({4, 5})};
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 5; ++l) {
      p.valid.at(k, l) = h.valid.at(perm[k], l);
      for (std::size_t a = 0; a < 3; ++a) p.positions.at(k, l, a) = h.positions.at(perm[k], l, a);
    }
  const auto a = tp.encode_history(h).value();
  const auto b = tp.encode_history(p).value();
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(b.at(k, c), a.at(perm[k], c));
}

TEST(HistoryWindow, LeftPadsEarlySteps) {
  Tensor<double> traj({4, 2, 3});
  for (std::size_t i = 0; i < traj.size(); ++i) traj[i] = static_cast<double>(i);
  const auto h = history_window(traj, 2, 3);
  EXPECT_EQ(h.valid.at(0, 0), 0.0);
  EXPECT_EQ(h.valid.at(0, 1), 1.0);
  EXPECT_EQ(h.valid.at(1, 2), 1.0);
  EXPECT_EQ(h.positions.at(1, 1, 2), traj.at(0, 1, 2));
  EXPECT_EQ(h.positions.at(1, 2, 0), traj.at(1, 1, 0));
  EXPECT_THROW(history_window(traj, 0, 3), std::invalid_argument);
  h.validate();
}

TEST(FutureDecoder, HorizonFiftyGivesFiftyOneSteps) {
  ParameterStore<double> store(7);
  auto tp = TrackPredictor<double>::create(store, "track", small_config(8, 16, 4, 50));
  const auto pe = build_temporal_encoding<double>(50, 16);
  EXPECT_EQ(tp.decode(tp.future_queries(), pe).shape(), (Shape{51, 8, 3}));
}

TEST(FutureDecoder, ZeroWeightsGiveZeroTracks) {
  ParameterStore<double> store(8);
  auto tp = TrackPredictor<double>::create(store, "track", small_config());
  for (const std::string& n : {"track.decoder.fc1.weight", "track.decoder.fc2.weight"}) {
    for (auto& v : store.get(n).mutable_value()) v = 0.0;
  }
  const auto out = tp.decode(tp.future_queries(), build_temporal_encoding<double>(4, 8)).value();
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(FutureDecoder, MatchesOracleAndSharesAcrossKeypoints) {
  ParameterStore<double> store(9);
  auto tp = TrackPredictor<double>::create(store, "track", small_config());
  std::mt19937_64 rng(9);
  auto e = random_tensor({3, 8}, rng);
  for (std::size_t c = 0; c < 8; ++c) e.at(2, c) = e.at(0, c);
  const auto pe = build_temporal_encoding<double>(4, 8);
  const auto out = tp.decode(V::constant(e), pe).value();
  for (std::size_t tau = 0; tau < 5; ++tau) {
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<double> x(8);
      for (std::size_t c = 0; c < 8; ++c) x[c] = e.at(k, c) + pe.at(tau, c);
      const auto p = mlp(store, "track.decoder", x);
      for (std::size_t a = 0; a < 3; ++a) EXPECT_NEAR(out.at(tau, k, a), p[a], 1e-14);
      for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(out.at(tau, 2, a), out.at(tau, 0, a));
    }
  }
  EXPECT_THROW(tp.decode(V::constant(Tensor<double>({3, 6})), pe), ShapeError);
}

TEST(TrackLoss, KnownValuesAndGradient) {
  Tensor<double> gt({1, 1, 3});
  auto pred = V::parameter(Tensor<double>({1, 1, 3}, {1.0, 0.0, 0.0}));
  EXPECT_EQ(track_loss(pred, gt).item(), 1.0);
  EXPECT_EQ(track_loss(V::constant(gt), gt).item(), 0.0);

  std::mt19937_64 rng(10);
  const auto p = random_tensor({5, 4, 3}, rng);
  const auto g = random_tensor({5, 4, 3}, rng);
  double oracle = 0.0;
  for (std::size_t tau = 0; tau < 5; ++tau)
    for (std::size_t k = 0; k < 4; ++k) {
      double sq = 0.0;
      for (std::size_t a = 0; a < 3; ++a) sq += std::pow(p.at(tau, k, a) - g.at(tau, k, a), 2);
      oracle += sq;
    }
  oracle /= 20.0;
  auto pv = V::parameter(p);
  auto loss = track_loss(pv, g);
  EXPECT_NEAR(loss.item(), oracle, 1e-14);
  EXPECT_GE(loss.item(), 0.0);
  loss.backward();
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(pv.grad()[i], 2.0 * (p[i] - g[i]) / 20.0, 1e-16);
  EXPECT_THROW(track_loss(pv, Tensor<double>({5, 3, 3})), ShapeError);
}

TEST(TrackPredictor, EndToEndGradients) {
  ParameterStore<double> store(11);
  auto tp = TrackPredictor<double>::create(store, "track", small_config(2, 6, 3, 2));
  std::mt19937_64 rng(11);
  auto h = full_history(2, 3, rng);
  h.valid.at(0, 0) = 0.0;
  const auto gt = random_tensor({3, 2, 3}, rng);
  const auto pe = build_temporal_encoding<double>(2, 6);
  std::vector<V> leaves;
  for (const auto& [n, v] : store.entries()) leaves.push_back(v);
  auto report = testing::check_gradients(leaves, [&] {
    auto tokens = tp.tag_tokens(tp.encode_history(h));
    auto e = ad::add(tp.future_queries(), tokens);
    return track_loss(tp.decode(e, pe), gt);
  });
  EXPECT_LT(report.max_absolute, 1e-8);
  EXPECT_GT(report.checked, 100u);
}

}  // namespace
}  // namespace foresight
