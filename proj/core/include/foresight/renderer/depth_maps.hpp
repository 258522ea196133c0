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
#include <iosfwd>

#include "foresight/geometry/workspace.hpp"
#include "foresight/numerics/autodiff.hpp"
#include "foresight/renderer/camera.hpp"

namespace foresight {

// Ground-truth depth value meaning "ray hit nothing".
inline constexpr double kBackgroundDepth = 0.0;

/// 1 where the ground-truth depth (H, W) back-projects into the workspace box.
template <typename T>
Tensor<T> workspace_mask(const Tensor<T>& gt_depth, const CameraModel& cam, const WorkspaceSpec& ws);

template <typename T>
struct MaskedL1 {
  ad::Var<T> loss;
  T mask_total{};
  bool empty_mask = false;  // loss is a constant 0
};

/// sum(mask * |pred - gt|) / sum(mask) over every element.
template <typename T>
MaskedL1<T> masked_depth_loss(const ad::Var<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask);

/// Binary 16-bit PGM of depth in millimeters, rounded and clamped to
/// [0, 65535].
template <typename T>
void write_depth_pgm(std::ostream& out, const Tensor<T>& depth);
template <typename T>
void save_depth_pgm(const std::filesystem::path& path, const Tensor<T>& depth);

}  // namespace foresight
