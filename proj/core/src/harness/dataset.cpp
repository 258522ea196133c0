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

#include "foresight/harness/dataset.hpp"

#include <stdexcept>

#include "foresight/renderer/depth_maps.hpp"

namespace foresight {

EpisodeConfig episode_config(const RunConfig& config) {
  EpisodeConfig ec;
  ec.scene = SceneSpec::toy(config.image_size);
  ec.horizon = config.horizon;
  if (config.keypoints != ec.arm.keypoints()) {
    if (config.keypoints < 2) throw std::invalid_argument("episode_config: need at least two keypoints");
    const std::size_t links = config.keypoints - 1;
    ArmSpec arm;
    arm.base = ec.arm.base;
    arm.radius = ec.arm.radius;
    arm.links.assign(links, 0.8 / double(links));
    arm.limits.assign(links, {-0.6, 2.0});
    arm.limits[0] = {-1.4, 1.4};
    ec.arm = arm;
  }
  return ec;
}

std::vector<WindowRef> enumerate_windows(const std::vector<EpisodeRecord>& episodes, std::size_t horizon) {
  std::vector<WindowRef> out;
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const std::size_t n = episodes[e].steps();
    for (std::size_t t = 1; t + horizon + 1 <= n; ++t) out.push_back({e, t});
  }
  return out;
}

template <typename T>
Sample<T> make_sample(const EpisodeRecord& ep, std::size_t t, const RunConfig& cfg) {
  const std::size_t h = cfg.horizon, k = ep.keypoints.dim(1), n = ep.steps();
  const std::size_t cams = ep.scene.cameras.size();
  if (k != cfg.keypoints) throw std::invalid_argument("make_sample: episode has " + std::to_string(k) + " keypoints");
  if (cams != cfg.cameras) throw std::invalid_argument("make_sample: episode has " + std::to_string(cams) + " cameras");
  const std::size_t height = ep.depths.dim(2), width = ep.depths.dim(3);
  if (height != cfg.image_size || width != cfg.image_size) {
    throw std::invalid_argument("make_sample: episode images are " + std::to_string(height) + "x" +
                                std::to_string(width));
  }
  if (ep.proprio.dim(1) != cfg.state_dim) throw std::invalid_argument("make_sample: proprioception size mismatch");
  if (t < 1 || t + h + 1 > n) throw std::invalid_argument("make_sample: t=" + std::to_string(t) + " is not a window");

  const WorkspaceSpec ws = cfg.workspace();
  const std::size_t plane = height * width;
  Sample<T> s;
  s.task = ep.task;
  s.cameras = ep.scene.cameras;
  s.images = Tensor<T>({cams, height, width});
  for (std::size_t i = 0; i < cams * plane; ++i) s.images[i] = static_cast<T>(ep.depths[t * cams * plane + i]);
  s.history = history_window(ep.keypoints.cast<T>(), t, cfg.history);
  s.tracks = Tensor<T>({h + 1, k, 3});
  for (std::size_t i = 0; i < s.tracks.size(); ++i) s.tracks[i] = static_cast<T>(ep.keypoints[t * k * 3 + i]);
  s.depths = Tensor<T>({h + 1, cams, height, width});
  s.masks = Tensor<T>({h + 1, cams, height, width});
  for (std::size_t tau = 0; tau <= h; ++tau) {
    for (std::size_t c = 0; c < cams; ++c) {
      Tensor<double> gt({height, width});
      const std::size_t off = ((t + tau) * cams + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) gt[i] = ep.depths[off + i];
      const auto mask = workspace_mask(gt, ep.scene.cameras[c], ws);
      const std::size_t dst = (tau * cams + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        s.depths[dst + i] = static_cast<T>(gt[i]);
        s.masks[dst + i] = static_cast<T>(mask[i]);
      }
    }
  }
  s.state = Tensor<T>({cfg.state_dim});
  for (std::size_t i = 0; i < cfg.state_dim; ++i) s.state[i] = static_cast<T>(ep.proprio.at(t, i));
  s.actions = Tensor<T>({h, kActionColumns});
  for (std::size_t i = 0; i < s.actions.size(); ++i) s.actions[i] = static_cast<T>(ep.actions[t * kActionColumns + i]);
  return s;
}

std::vector<EpisodeRecord> load_dataset(const std::filesystem::path& dir, const RunConfig& config) {
  std::vector<EpisodeRecord> out;
  for (const auto& p : list_episodes(dir)) {
    out.push_back(load_episode(p));
    const auto& ep = out.back();
    if (ep.keypoints.dim(1) != config.keypoints || ep.scene.cameras.size() != config.cameras ||
        ep.depths.dim(2) != config.image_size || ep.proprio.dim(1) != config.state_dim) {
      throw std::invalid_argument("load_dataset: " + p.string() + " does not match the run config");
    }
  }
  if (out.empty()) throw std::invalid_argument("load_dataset: no episodes under " + dir.string());
  return out;
}

template Sample<float> make_sample<float>(const EpisodeRecord&, std::size_t, const RunConfig&);
template Sample<double> make_sample<double>(const EpisodeRecord&, std::size_t, const RunConfig&);

}  // namespace foresight
