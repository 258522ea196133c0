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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foresight/synth/arm.hpp"
#include "foresight/synth/scene.hpp"

namespace foresight {

/// Scripted pick-and-place settings. Task 0 places the object on the table,
/// task 1 on the shelf block.
struct EpisodeConfig {
  ArmSpec arm = ArmSpec::toy({0.05, 0.0, 0.45});
  SceneSpec scene = SceneSpec::toy();
  std::size_t horizon = 4;  // chunk length the data is meant for, recorded only
  std::size_t approach_steps = 8, descend_steps = 4, grip_steps = 2, lift_steps = 4, transfer_steps = 8;
  double clearance = 0.12;  // height of the approach and lift waypoints above contact
  int max_attempts = 64;

  std::size_t step_count() const {
    return 1 + approach_steps + 2 * descend_steps + 2 * grip_steps + lift_steps + transfer_steps;
  }
};

inline constexpr std::size_t kEpisodeTasks = 2;
inline constexpr std::size_t kActionColumns = 7;

struct EpisodeRecord {
  std::size_t task = 0;
  std::size_t horizon = 0;
  ArmSpec arm;
  SceneSpec scene;
  Tensor<double> angles;     // (T, J)
  Tensor<double> keypoints;  // (T, K, 3)
  Tensor<double> depths;     // (T, cameras, height, width)
  Tensor<double> proprio;    // (T, J + 1): joint angles then gripper state
  Tensor<double> actions;    // (T, 7): dx, axis-angle dtheta, gripper command
  Tensor<double> object;     // (T, 3) object box center

  std::size_t steps() const { return angles.dim(0); }
  /// End-effector position at step t.
  Vec3d end_effector(std::size_t t) const;
  /// Geometry at step t (static boxes, object, link capsules).
  SceneState scene_state(std::size_t t) const;
  /// Keypoints must equal forward kinematics of the logged angles; shapes
  /// must agree. Throws std::runtime_error otherwise.
  void validate() const;
};

/// Fully determined by (task, seed). Throws std::runtime_error when no
/// reachable layout is found within the attempt budget.
EpisodeRecord generate_episode(std::size_t task, std::uint64_t seed, const EpisodeConfig& config = {});

void save_episode(const std::filesystem::path& dir, const EpisodeRecord& episode);
EpisodeRecord load_episode(const std::filesystem::path& dir);

/// Episode i uses task i % 2 and a seed mixed from (seed, i). Writes
/// dir/episode_NNNN and returns the episode directories.
std::vector<std::filesystem::path> generate_dataset(const std::filesystem::path& dir, std::size_t episodes,
                                                    std::uint64_t seed, const EpisodeConfig& config = {});
/// Sorted episode directories under `dir`.
std::vector<std::filesystem::path> list_episodes(const std::filesystem::path& dir);

}  // namespace foresight
