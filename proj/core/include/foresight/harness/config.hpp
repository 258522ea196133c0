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

#include "foresight/geometry/workspace.hpp"
#include "foresight/policy/policy.hpp"

namespace foresight {

/// Pathways that `ablate` can switch off.
struct Ablation {
  bool history_track = false;  // no history track tokens
  bool future_track = false;   // no future track queries, no track loss, no refinement
  bool depth = false;          // no spatial queries, voxel decoder or depth loss
  bool refinement = false;     // render G^init only
};

/// Every hyperparameter of a run. Text form is flat `key = value` lines;
/// `#` starts a comment, unknown keys are rejected and unset keys keep the
/// toy defaults.
///
/// Keys: workspace_min, workspace_max (three numbers each), voxel, horizon,
/// keypoints, history, channels, feature_channels, gaussians_per_voxel,
/// refined_per_voxel, layers, heads, mlp_ratio, lambda_action, lambda_track,
/// lambda_depth, lr, beta1, beta2, adam_eps, weight_decay, warmup,
/// cosine_decay, batch,
/// iterations, seed, denoise_steps, image_size, patch, cameras, tasks,
/// state_dim, precision (32 or 64), log_every, disable_history_track,
/// disable_future_track, disable_depth, disable_refinement.
struct RunConfig {
  Vec3d workspace_min{0.0, -0.4, 0.0};
  Vec3d workspace_max{0.8, 0.4, 0.8};
  double voxel = 0.1;
  std::size_t horizon = 4;
  std::size_t keypoints = 4;
  std::size_t history = 6;
  std::size_t channels = 128;
  std::size_t feature_channels = 16;
  std::size_t gaussians_per_voxel = 4;
  std::size_t refined_per_voxel = 64;
  std::size_t layers = 3;
  std::size_t heads = 4;
  std::size_t mlp_ratio = 4;
  LossWeights lambda{1.0, 10.0, 1.0};
  double lr = 3e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double weight_decay = 1e-4;
  std::size_t warmup = 100;  // linear ramp over the first steps
  bool cosine_decay = true;  // lr follows a half cosine to 0 over `iterations`
  std::size_t batch = 4;
  std::size_t iterations = 2000;
  std::uint64_t seed = 0;
  std::size_t denoise_steps = 10;
  std::size_t image_size = 32;
  std::size_t patch = 8;
  std::size_t cameras = 2;
  std::size_t tasks = 2;
  std::size_t state_dim = 4;
  int precision = 32;
  std::size_t log_every = 50;
  Ablation disable{};

  /// Desk-scale defaults: 0.8 m cube at 0.1 m voxels (coarse 2x2x2).
  static RunConfig toy();
  /// The smallest end-to-end model: C = 32, two layers, H = 4, K = 4.
  static RunConfig tiny();
  /// Full-size hyperparameters: 2048 channels, 18 layers, H = 50. Never trained here.
  static RunConfig full_scale();

  WorkspaceSpec workspace() const;
  PolicyConfig policy() const;
  /// Throws std::invalid_argument on inconsistent settings, including fine
  /// extents not divisible by 4 and C not divisible by the head count.
  void validate() const;

  std::string to_text() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  /// Learning-rate multiplier for 0-based step `i`.
  double lr_scale(std::size_t i) const;
  /// Applies one `key = value` assignment.
  void set(const std::string& key, const std::string& value);
};

}  // namespace foresight
