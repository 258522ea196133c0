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

#pragma once

#include <filesystem>
#include <vector>

#include "foresight/harness/config.hpp"
#include "foresight/synth/episode.hpp"
#include "foresight/track/track_predictor.hpp"

namespace foresight {

/// Synthetic-data settings matching a run: the toy scene at the configured
/// image size and an arm with keypoints - 1 links.
EpisodeConfig episode_config(const RunConfig& config);

struct WindowRef {
  std::size_t episode = 0;
  std::size_t t = 0;
};

/// Every t with one step of history and a full (H+1)-step future:
/// 1 <= t <= T - 1 - H. Shorter episodes contribute nothing.
std::vector<WindowRef> enumerate_windows(const std::vector<EpisodeRecord>& episodes, std::size_t horizon);

/// One training window at time t.
template <typename T>
struct Sample {
  std::size_t task = 0;
  std::vector<CameraModel> cameras;
  Tensor<T> images;  // (cameras, h, w) ground-truth depth at t
  KeypointHistory<T> history;
  Tensor<T> tracks;   // (H+1, K, 3) keypoints at t..t+H
  Tensor<T> depths;   // (H+1, cameras, h, w)
  Tensor<T> masks;    // workspace masks of `depths`
  Tensor<T> state;    // proprioception at t
  Tensor<T> actions;  // (H, 7) executed at t..t+H-1
};

/// Throws std::invalid_argument when the episode disagrees with the config
/// (keypoints, cameras, image size, state size) or t is not a valid window.
template <typename T>
Sample<T> make_sample(const EpisodeRecord& episode, std::size_t t, const RunConfig& config);

/// Loads every episode under `dir` and checks it against the config.
std::vector<EpisodeRecord> load_dataset(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace foresight
