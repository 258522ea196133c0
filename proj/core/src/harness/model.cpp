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

#include "foresight/harness/model.hpp"

#include "foresight/renderer/depth_maps.hpp"

namespace foresight {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

template <typename T>
ad::Var<T> zero_loss() {
  return ad::Var<T>::constant(Tensor<T>::scalar(T(0)));
}

TrackConfig track_config(const RunConfig& c) { return {c.keypoints, c.channels, c.history, c.horizon}; }

GeometryConfig geometry_config(const RunConfig& c) {
  GeometryConfig g;
  g.workspace = c.workspace();
  g.channels = c.channels;
  g.feature_channels = c.feature_channels;
  g.gaussians_per_voxel = c.gaussians_per_voxel;
  g.refined_per_voxel = c.refined_per_voxel;
  return g;
}

const RunConfig& validated(const RunConfig& c) {
  c.validate();
  return c;
}

}  // namespace

template <typename T>
Model<T>::Model(const RunConfig& config)
    : config_(validated(config)),
      store_(derive_seed(config.seed, "params")),
      track_(TrackPredictor<T>::create(store_, "track", track_config(config))),
      geometry_(GeometryPredictor<T>::create(store_, "geo", geometry_config(config))),
      policy_(Policy<T>::create(store_, "policy", config.policy())),
      pe_(build_temporal_encoding<T>(config.horizon, config.channels)) {}

template <typename T>
std::size_t Model<T>::future_query_count() const {
  return config_.disable.future_track ? 0 : config_.keypoints;
}

template <typename T>
ContextSequence<T> Model<T>::context(const Sample<T>& sample) const {
  PolicyInputs<T> in;
  in.task = sample.task;
  in.images = sample.images;
  in.state = sample.state;
  if (!config_.disable.history_track) in.history = track_.tag_tokens(track_.encode_history(sample.history));
  std::vector<ad::Var<T>> queries;
  if (!config_.disable.future_track) queries.push_back(track_.future_queries());
  if (!config_.disable.depth) queries.push_back(geometry_.spatial_queries());
  if (!queries.empty()) in.queries = queries.size() == 1 ? queries[0] : ad::concat(queries, 0);
  return policy_.embed_context(in);
}

template <typename T>
typename Model<T>::Geometry Model<T>::predict_geometry(const ad::Var<T>& spatial, const Tensor<T>* tracks,
                                                       const std::vector<CameraModel>& cameras) const {
  const WorkspaceSpec& ws = geometry_.config().workspace;
  const std::size_t steps = config_.horizon + 1, nf = ws.fine_count(), cf = config_.feature_channels;
  const std::size_t k = config_.keypoints;
  const bool refine = tracks != nullptr && !config_.disable.refinement;

  Geometry g;
  const auto volume = geometry_.voxel_decode(GeometryPredictor<T>::shift_all(spatial, pe_));
  std::vector<ad::Var<T>> renders;
  for (std::size_t tau = 0; tau < steps; ++tau) {
    const auto vol = ad::reshape(ad::slice(volume, 0, tau, tau + 1), {nf, cf});
    GaussianSet<T> set = geometry_.gaussian_head(vol);
    g.initial += set.size();
    if (refine) {
      Tensor<T> kp({k, 3});
      for (std::size_t i = 0; i < k * 3; ++i) kp[i] = (*tracks)[tau * k * 3 + i];
      const auto marked = marked_voxels(refinement_mask(kp, ws));
      g.marked += marked.size();
      g.structure = mix(g.structure, marked.size());
      for (auto v : marked) g.structure = mix(g.structure, v);
      if (!marked.empty()) {
        auto extra = geometry_.refine(vol, marked);
        g.refined += extra.size();
        set = union_gaussians(set, extra);
      }
    }
    for (const auto& cam : cameras) {
      RenderStats stats;
      auto depth = render_depth(set.params, set.sort_keys(), cam, render_, &stats);
      g.structure = mix(g.structure, stats.structure_hash);
      renders.push_back(ad::reshape(depth, {1, cam.height, cam.width}));
    }
    g.sets.push_back(std::move(set));
  }
  const auto& cam = cameras.front();
  g.rendered = ad::reshape(ad::concat(renders, 0), {steps, cameras.size(), cam.height, cam.width});
  return g;
}

template <typename T>
typename Model<T>::Forward Model<T>::forward(const Sample<T>& sample, const Tensor<T>& noise, T s) const {
  Forward f;
  const auto ctx = context(sample);
  const auto flow = make_flow_sample(sample.actions, noise, s);
  const auto out = policy_.forward(ctx, policy_.embed_actions(flow.noisy, s));
  f.action = cfm_loss(policy_.velocity(out.actions), flow.target);

  const std::size_t qb = ctx.layout.begin(Block::kQueries), nq = future_query_count();
  if (nq > 0) {
    f.tracks = track_.decode(ad::slice(out.context, 0, qb, qb + nq), pe_);
    f.track = track_loss(f.tracks, sample.tracks);
  } else {
    f.track = zero_loss<T>();
  }
  if (!config_.disable.depth) {
    const std::size_t nc = geometry_.config().workspace.coarse_count();
    auto geo = predict_geometry(ad::slice(out.context, 0, qb + nq, qb + nq + nc), nq > 0 ? &f.tracks.value() : nullptr,
                                sample.cameras);
    auto l1 = masked_depth_loss(geo.rendered, sample.depths, sample.masks);
    f.depth = l1.loss;
    f.rendered = geo.rendered;
    f.gaussians = std::move(geo.sets);
    f.report.gaussians_initial = geo.initial;
    f.report.gaussians_refined = geo.refined;
    f.report.marked_voxels = geo.marked;
    f.report.depth_mask_empty = l1.empty_mask;
    f.report.structure = geo.structure;
  } else {
    f.depth = zero_loss<T>();
  }
  f.total = total_loss(f.action, f.track, f.depth, config_.lambda);
  f.report.action = static_cast<double>(f.action.item());
  f.report.track = static_cast<double>(f.track.item());
  f.report.depth = static_cast<double>(f.depth.item());
  f.report.total = static_cast<double>(f.total.item());
  return f;
}

template <typename T>
Tensor<T> Model<T>::act(const Sample<T>& sample, std::size_t steps, std::uint64_t seed, GeometryTrace* trace) const {
  ad::NoGradGuard guard;
  const auto ctx = context(sample);
  Tensor<T> features;
  const auto cache = policy_.build_kv_cache(ctx, trace != nullptr ? &features : nullptr);
  if (trace != nullptr) {
    const auto feats = ad::Var<T>::constant(features);
    const std::size_t qb = ctx.layout.begin(Block::kQueries), nq = future_query_count();
    Tensor<T> tracks;
    if (nq > 0) tracks = track_.decode(ad::slice(feats, 0, qb, qb + nq), pe_).value();
    trace->tracks = tracks;
    if (!config_.disable.depth) {
      const std::size_t nc = geometry_.config().workspace.coarse_count();
      auto geo = predict_geometry(ad::slice(feats, 0, qb + nq, qb + nq + nc), nq > 0 ? &tracks : nullptr,
                                  sample.cameras);
      trace->rendered = geo.rendered.value();
      trace->gaussians = geo.initial + geo.refined;
      trace->marked_voxels = geo.marked;
    }
  }
  return policy_.sample_actions(cache, steps, seed);
}

template class Model<float>;
template class Model<double>;

}  // namespace foresight
