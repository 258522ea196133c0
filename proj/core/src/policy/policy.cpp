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

#include "foresight/policy/policy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace foresight {

template <typename T>
FlowSample<T> make_flow_sample(const Tensor<T>& action, const Tensor<T>& noise, T s) {
  if (action.shape() != noise.shape()) {
    throw ShapeError("flow sample: action " + shape_to_string(action.shape()) + " and noise " +
                     shape_to_string(noise.shape()) + " differ");
  }
  if (!(s >= T(0) && s <= T(1))) throw std::invalid_argument("flow sample: time must lie in [0, 1]");
  FlowSample<T> f{s, Tensor<T>(action.shape()), Tensor<T>(action.shape())};
  for (std::size_t i = 0; i < action.size(); ++i) {
    f.noisy[i] = (T(1) - s) * noise[i] + s * action[i];
    f.target[i] = action[i] - noise[i];
  }
  return f;
}

template <typename T>
ad::Var<T> cfm_loss(const ad::Var<T>& velocity, const Tensor<T>& target) {
  if (velocity.shape() != target.shape()) {
    throw ShapeError("cfm_loss: velocity " + shape_to_string(velocity.shape()) + " and target " +
                     shape_to_string(target.shape()) + " differ");
  }
  return ad::mean(ad::squared_error(velocity, constant(target)));
}

template <typename T>
ad::Var<T> total_loss(const ad::Var<T>& action, const ad::Var<T>& track, const ad::Var<T>& depth,
                      const LossWeights& w) {
  if (w.action < 0.0 || w.track < 0.0 || w.depth < 0.0) throw std::invalid_argument("total_loss: negative weight");
  auto out = ad::scale(action, static_cast<T>(w.action));
  out = ad::add(out, ad::scale(track, static_cast<T>(w.track)));
  return ad::add(out, ad::scale(depth, static_cast<T>(w.depth)));
}

template <typename T>
Policy<T> Policy<T>::create(ParameterStore<T>& store, const std::string& name, const PolicyConfig& config) {
  if (config.patch == 0 || config.image_height % config.patch != 0 || config.image_width % config.patch != 0) {
    throw std::invalid_argument("policy: image extents must be divisible by the patch size");
  }
  if (config.tasks == 0 || config.horizon == 0) throw std::invalid_argument("policy: tasks and horizon must be positive");
  const std::size_t c = config.trunk.channels;
  Policy p;
  p.config_ = config;
  p.trunk_ = Trunk<T>::create(store, name + ".trunk", config.trunk);
  p.task_table_ = store.create(name + ".task_table", {config.tasks, c}, InitSpec::normal(1.0));
  p.patch_embed_ = Linear<T>::create(store, name + ".patch_embed", config.patch * config.patch, c);
  p.patch_pos_ = store.create(name + ".patch_pos", {config.cameras * config.patches_per_view(), c}, InitSpec::normal(0.1));
  p.state_embed_ = Linear<T>::create(store, name + ".state_embed", config.state_dim, c);
  p.block_types_ = store.create(name + ".block_types", {kBlockCount, c}, InitSpec::normal(0.1));
  p.action_in_ = Linear<T>::create(store, name + ".action_in", kActionDim, c);
  p.action_out_ = Linear<T>::create(store, name + ".action_out", c, kActionDim, true, InitSpec::fan_in(0.1));
  p.step_pe_ = build_temporal_encoding<T>(config.horizon, c);
  return p;
}

template <typename T>
ContextSequence<T> Policy<T>::embed_context(const PolicyInputs<T>& in) const {
  const auto& cfg = config_;
  const std::size_t c = cfg.trunk.channels;
  if (in.task >= cfg.tasks) {
    throw std::invalid_argument("embed_context: unknown task id " + std::to_string(in.task));
  }
  if (in.images.shape() != Shape{cfg.cameras, cfg.image_height, cfg.image_width}) {
    throw ShapeError("embed_context: images " + shape_to_string(in.images.shape()) + " do not match the camera setup");
  }
  if (in.state.shape() != Shape{cfg.state_dim}) {
    throw ShapeError("embed_context: state " + shape_to_string(in.state.shape()) + " has the wrong size");
  }
  auto check_tokens = [c](const ad::Var<T>& v, const char* what) {
    if (v.node() != nullptr && (v.shape().size() != 2 || v.shape()[1] != c)) {
      throw ShapeError(std::string("embed_context: ") + what + " tokens have shape " + shape_to_string(v.shape()));
    }
  };
  check_tokens(in.history, "history");
  check_tokens(in.queries, "query");

  const std::size_t p = cfg.patch, ph = cfg.image_height / p, pw = cfg.image_width / p;
  const std::size_t n_patch = cfg.cameras * ph * pw;
  Tensor<T> patches({n_patch, p * p});
  for (std::size_t cam = 0; cam < cfg.cameras; ++cam)
    for (std::size_t py = 0; py < ph; ++py)
      for (std::size_t px = 0; px < pw; ++px) {
        const std::size_t row = (cam * ph + py) * pw + px;
        for (std::size_t y = 0; y < p; ++y)
          for (std::size_t x = 0; x < p; ++x) {
            patches.at(row, y * p + x) = in.images.at(cam, py * p + y, px * p + x);
          }
      }

  std::vector<ad::Var<T>> parts;
  parts.push_back(ad::gather_rows(task_table_, {in.task}));
  parts.push_back(ad::add(patch_embed_(constant(std::move(patches))), patch_pos_));
  ContextSequence<T> seq;
  seq.layout.sizes[0] = 1 + n_patch;
  if (in.history.node() != nullptr) {
    parts.push_back(in.history);
    seq.layout.sizes[1] = in.history.shape()[0];
  }
  if (in.queries.node() != nullptr) {
    parts.push_back(in.queries);
    seq.layout.sizes[2] = in.queries.shape()[0];
  }
  parts.push_back(state_embed_(constant(in.state.reshaped({1, cfg.state_dim}))));
  seq.layout.sizes[3] = 1;
  seq.layout.sizes[4] = cfg.horizon;

  std::vector<std::size_t> type_rows;
  for (std::size_t i = 0; i < seq.layout.context(); ++i) type_rows.push_back(seq.layout.block_of(i));
  seq.tokens = ad::add(ad::concat(parts, 0), ad::gather_rows(block_types_, type_rows));
  return seq;
}

template <typename T>
ad::Var<T> Policy<T>::embed_actions(const Tensor<T>& noisy, T s) const {
  const std::size_t h = config_.horizon, c = config_.trunk.channels;
  if (noisy.shape() != Shape{h, kActionDim}) {
    throw ShapeError("embed_actions: expected (" + std::to_string(h) + ",7), got " + shape_to_string(noisy.shape()));
  }
  Tensor<T> extra({h, c});
  std::vector<T> time_row(c);
  sinusoid_row(kFlowTimeScale * static_cast<double>(s), c, time_row.data());
  for (std::size_t t = 0; t < h; ++t)
    for (std::size_t ch = 0; ch < c; ++ch) extra.at(t, ch) = time_row[ch] + step_pe_.at(t, ch);
  auto tokens = ad::add(action_in_(constant(noisy)), constant(std::move(extra)));
  return ad::add(tokens, ad::gather_rows(block_types_, std::vector<std::size_t>(h, static_cast<std::size_t>(Block::kAction))));
}

template <typename T>
typename Policy<T>::Output Policy<T>::forward(const ContextSequence<T>& context, const ad::Var<T>& action_tokens) const {
  const std::size_t n_ctx = context.layout.context();
  const auto mask = build_block_mask(context.layout).template additive<T>();
  auto all = trunk_.forward(ad::concat<T>({context.tokens, action_tokens}, 0), mask, n_ctx);
  return {ad::slice(all, 0, 0, n_ctx), ad::slice(all, 0, n_ctx, n_ctx + config_.horizon)};
}

template <typename T>
ad::Var<T> Policy<T>::velocity(const ad::Var<T>& action_features) const {
  return action_out_(action_features);
}

template <typename T>
KVCache<T> Policy<T>::build_kv_cache(const ContextSequence<T>& context, Tensor<T>* features) const {
  ad::NoGradGuard guard;
  BlockLayout ctx = context.layout;
  ctx.sizes[4] = 0;
  KVCache<T> cache;
  auto out = trunk_.forward_context(context.tokens, build_block_mask(ctx).template additive<T>(), &cache);
  if (features != nullptr) *features = out.value();
  return cache;
}

template <typename T>
Tensor<T> Policy<T>::cached_velocity(const KVCache<T>& cache, const Tensor<T>& x, T s) const {
  ad::NoGradGuard guard;
  return velocity(trunk_.forward_actions(cache, embed_actions(x, s))).value();
}

template <typename T>
Tensor<T> Policy<T>::sample_actions(const KVCache<T>& cache, std::size_t steps, const Tensor<T>& noise,
                                    const VelocityOverride& override_velocity) const {
  if (steps == 0) throw std::invalid_argument("sample_actions: need at least one step");
  Tensor<T> x = noise;
  const T dt = T(1) / static_cast<T>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const T s = static_cast<T>(i) * dt;
    const Tensor<T> v = override_velocity ? override_velocity(x, s) : cached_velocity(cache, x, s);
    if (v.shape() != x.shape()) throw ShapeError("sample_actions: velocity has the wrong shape");
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += dt * v[j];
  }
  return x;
}

template <typename T>
Tensor<T> Policy<T>::sample_actions(const KVCache<T>& cache, std::size_t steps, std::uint64_t seed,
                                    const VelocityOverride& override_velocity) const {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<T> noise({config_.horizon, kActionDim});
  for (auto& v : noise.data()) v = static_cast<T>(normal(rng));
  return sample_actions(cache, steps, noise, override_velocity);
}

#define FORESIGHT_INSTANTIATE_POLICY(T)                                                                  \
  template FlowSample<T> make_flow_sample<T>(const Tensor<T>&, const Tensor<T>&, T);                    \
  template ad::Var<T> cfm_loss<T>(const ad::Var<T>&, const Tensor<T>&);                                 \
  template ad::Var<T> total_loss<T>(const ad::Var<T>&, const ad::Var<T>&, const ad::Var<T>&,           \
                                    const LossWeights&);                                                \
  template class Policy<T>;

FORESIGHT_INSTANTIATE_POLICY(float)
FORESIGHT_INSTANTIATE_POLICY(double)

#undef FORESIGHT_INSTANTIATE_POLICY

}  // namespace foresight
