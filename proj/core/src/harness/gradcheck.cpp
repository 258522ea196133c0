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

#include "foresight/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "foresight/harness/model.hpp"
#include "foresight/renderer/depth_maps.hpp"

namespace foresight {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

struct Probe {
  double value = 0.0;
  std::uint64_t structure = 0;
};

// Digest of the residual signs on masked pixels: the L1 branch taken.
std::uint64_t residual_signs(const Tensor<double>& pred, const Tensor<double>& gt, const Tensor<double>& mask) {
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] != 0.0) h = mix(h, pred[i] > gt[i] ? 1 : (pred[i] < gt[i] ? 2 : 3));
  }
  return h;
}

enum class Floor { kRenderer, kResolution };

void record(GradcheckResult& r, double analytic, double numeric, double tolerance, Floor floor) {
  const double abs_err = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double rel = scale > 0.0 ? abs_err / scale : 0.0;
  const bool tiny = floor == Floor::kRenderer ? std::abs(analytic) < 1e-6 && abs_err < 1e-8
                                              : scale < 1e-6 && abs_err < 1e-10;
  ++r.checked;
  r.max_absolute = std::max(r.max_absolute, abs_err);
  if (rel < tolerance) {
    r.max_relative = std::max(r.max_relative, rel);
  } else if (tiny) {
    ++r.floored;
  } else {
    ++r.failures;
  }
}

// Central difference of one coordinate, second order or (with `five_point`)
// fourth order. Empty when a probe leaves the smooth branch of `base`.
std::optional<double> central(double& x, double h, std::uint64_t base, const std::function<Probe()>& f,
                              bool five_point = false) {
  const double saved = x;
  auto at = [&](double offset) -> std::optional<double> {
    x = saved + offset;
    const Probe p = f();
    x = saved;
    if (p.structure != base) return std::nullopt;
    return p.value;
  };
  const auto up = at(h), down = at(-h);
  if (!up || !down) return std::nullopt;
  if (!five_point) return (*up - *down) / (2.0 * h);
  const auto up2 = at(2.0 * h), down2 = at(-2.0 * h);
  if (!up2 || !down2) return std::nullopt;
  return (8.0 * (*up - *down) - (*up2 - *down2)) / (12.0 * h);
}

}  // namespace

GradcheckResult gradcheck_renderer(std::uint64_t seed, std::size_t scenes) {
  GradcheckResult r;
  r.scope = "renderer";
  std::mt19937_64 rng(seed);
  const auto cam = CameraModel::look_at({0.0, -1.2, 0.4}, {0.0, 0.0, 0.0}, 50.0, 16, 16);
  const RenderOptions opt;
  std::uniform_real_distribution<double> pos(-0.15, 0.15), logit(-1.5, 2.5), ls(std::log(0.04), std::log(0.12));
  std::uniform_real_distribution<double> depth(1.0, 1.6), coin(0.0, 1.0);
  std::normal_distribution<double> quat(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(2, 8);
  for (std::size_t scene = 0; scene < scenes; ++scene) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const std::size_t n = count(rng);
      Tensor<double> params({n, kGaussianParams});
      for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < 3; ++a) params.at(i, a) = pos(rng);
        params.at(i, 3) = logit(rng);
        for (int a = 0; a < 3; ++a) params.at(i, 4 + a) = ls(rng);
        for (int a = 0; a < 4; ++a) params.at(i, 7 + a) = quat(rng);
      }
      Tensor<double> gt({16, 16}), mask({16, 16});
      for (std::size_t i = 0; i < gt.size(); ++i) {
        gt[i] = depth(rng);
        mask[i] = coin(rng) < 0.8 ? 1.0 : 0.0;
      }
      auto leaf = ad::Var<double>::parameter(params);
      auto f = [&]() {
        ad::NoGradGuard guard;
        RenderStats stats;
        const auto d = render_depth(leaf, {}, cam, opt, &stats);
        const auto loss = masked_depth_loss(d, gt, mask);
        return Probe{loss.loss.item(), mix(stats.structure_hash, residual_signs(d.value(), gt, mask))};
      };
      RenderStats stats;
      const auto d = render_depth(leaf, {}, cam, opt, &stats);
      masked_depth_loss(d, gt, mask).loss.backward();
      const std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());
      const std::uint64_t base = f().structure;
      auto values = leaf.mutable_value();
      std::vector<double> numeric;
      bool kinked = false;
      for (std::size_t i = 0; i < values.size() && !kinked; ++i) {
        const auto g = central(values[i], 1e-5, base, f);
        if (!g) kinked = true;
        else numeric.push_back(*g);
      }
      if (kinked || stats.contributions == 0) {
        ++r.redraws;
        continue;
      }
      for (std::size_t i = 0; i < numeric.size(); ++i) record(r, analytic[i], numeric[i], 1e-3, Floor::kRenderer);
      break;
    }
  }
  r.passed = r.checked > 0 && r.failures == 0;
  return r;
}

GradcheckResult gradcheck_trunk(std::uint64_t seed) {
  GradcheckResult r;
  r.scope = "trunk";
  ParameterStore<double> store(seed);
  const auto trunk = Trunk<double>::create(store, "trunk", {16, 2, 2, 2});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const BlockLayout layout{{2, 2, 2, 1, 3}};
  const auto mask = build_block_mask(layout).additive<double>();
  Tensor<double> x({layout.total(), 16}), w({layout.total(), 16});
  for (auto& v : x.data()) v = normal(rng);
  for (auto& v : w.data()) v = normal(rng);
  const auto xv = ad::Var<double>::constant(x), wv = ad::Var<double>::constant(w);
  auto loss = [&]() { return ad::sum(ad::mul(trunk.forward(xv, mask, layout.context()), wv)); };
  store.zero_grad();
  loss().backward();
  auto f = [&]() {
    ad::NoGradGuard guard;
    return Probe{loss().item(), 0};
  };
  for (const auto& [name, p] : store.entries()) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    auto values = p.mutable_value();
    for (std::size_t i = 0; i < values.size(); ++i) {
      record(r, analytic.empty() ? 0.0 : analytic[i], *central(values[i], 1e-5, 0, f), 1e-4, Floor::kResolution);
    }
  }
  r.passed = r.checked > 0 && r.failures == 0;
  return r;
}

GradcheckResult gradcheck_full(std::uint64_t seed, std::size_t parameters) {
  GradcheckResult r;
  r.scope = "full";
  RunConfig cfg = RunConfig::tiny();
  cfg.seed = seed;
  const Model<double> model(cfg);
  const auto episode = generate_episode(0, derive_seed(seed, "gradcheck_episode"), episode_config(cfg));
  const auto sample = make_sample<double>(episode, 3, cfg);
  std::mt19937_64 rng(derive_seed(seed, "gradcheck"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<double> noise({cfg.horizon, kActionDim});
  for (auto& v : noise.data()) v = normal(rng);
  const double s = 0.37;

  auto& store = const_cast<ParameterStore<double>&>(model.store());
  store.zero_grad();
  model.forward(sample, noise, s).total.backward();
  auto f = [&]() {
    ad::NoGradGuard guard;
    const auto out = model.forward(sample, noise, s);
    std::uint64_t st = out.report.structure;
    if (out.rendered.defined()) st = mix(st, residual_signs(out.rendered.value(), sample.depths, sample.masks));
    return Probe{out.report.total, st};
  };
  const std::uint64_t base = f().structure;

  const auto& entries = store.entries();
  std::uniform_int_distribution<std::size_t> pick_tensor(0, entries.size() - 1);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (r.checked < parameters && r.redraws < 10 * parameters) {
    const std::size_t ti = pick_tensor(rng);
    const auto& p = entries[ti].second;
    const std::size_t ei = std::uniform_int_distribution<std::size_t>(0, p.size() - 1)(rng);
    if (!seen.insert({ti, ei}).second) continue;
    const double analytic = p.grad().empty() ? 0.0 : p.grad()[ei];
    const auto numeric = central(p.mutable_value()[ei], 1e-4, base, f, true);
    if (!numeric) {
      ++r.redraws;
      continue;
    }
    record(r, analytic, *numeric, 1e-4, Floor::kResolution);
  }
  r.passed = r.checked == parameters && r.failures == 0;
  return r;
}

std::string format_gradcheck(const GradcheckResult& r) {
  std::ostringstream os;
  os << "gradcheck scope=" << r.scope << " checked=" << r.checked << " failures=" << r.failures
     << " redraws=" << r.redraws << " floored=" << r.floored << " max_relative=" << r.max_relative << " max_absolute=" << r.max_absolute
     << " result=" << (r.passed ? "pass" : "fail");
  return os.str();
}

}  // namespace foresight
