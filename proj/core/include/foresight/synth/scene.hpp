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

#include <optional>
#include <vector>

#include "foresight/geometry/workspace.hpp"
#include "foresight/numerics/tensor.hpp"
#include "foresight/renderer/camera.hpp"

namespace foresight {

struct Box {
  Vec3d min{}, max{};
  Vec3d center() const { return (min + max) * 0.5; }
  Box translated(const Vec3d& d) const { return {min + d, max + d}; }
};

/// Segment a-b swept by a sphere of `radius`. a == b gives a sphere.
struct Capsule {
  Vec3d a{}, b{};
  double radius = 0.0;
};

/// Ray parameter of the first hit with t > 0, ray o + t d.
std::optional<double> intersect_box(const Box& box, const Vec3d& o, const Vec3d& d);
std::optional<double> intersect_capsule(const Capsule& cap, const Vec3d& o, const Vec3d& d);

struct SceneSpec {
  WorkspaceSpec workspace;
  std::vector<Box> statics;
  Box object;  // movable box at its initial placement
  std::vector<CameraModel> cameras;

  /// Throws unless every camera is valid and sees the workspace center.
  void validate() const;
  /// Smallest camera-frame depth over the workspace inflated by `margin`.
  double min_depth(std::size_t camera, double margin) const;

  /// 0.8 m cube with 0.1 m voxels, a table slab, a low shelf block and two
  /// cameras facing the arm.
  static SceneSpec toy(std::size_t image_size = 32);
};

/// Geometry at one instant.
struct SceneState {
  std::vector<Box> boxes;
  std::vector<Capsule> capsules;
};

/// Camera-frame depth of the nearest surface along the ray through the
/// continuous pixel position (u, v), or 0 on a miss.
double raycast_pixel(const SceneState& scene, const CameraModel& cam, double u, double v);

/// Camera-frame depth of the nearest surface per pixel (0 where a ray hits
/// nothing), shape (height, width).
Tensor<double> raycast_depth(const SceneState& scene, const CameraModel& cam);

}  // namespace foresight
