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

#include <cstddef>
#include <string>

#include "foresight/numerics/small_linalg.hpp"

namespace foresight {

/// Pinhole camera. Extrinsics map world to camera coordinates
/// (x right, y down, z forward); pixel (u, v) has its center at (u, v).
struct CameraModel {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  std::size_t width = 1, height = 1;
  Mat3d rotation = Mat3d::identity();
  Vec3d translation{};

  /// Camera at `eye` looking at `target`, world up +z, vertical field of view
  /// in degrees, principal point at the image center.
  static CameraModel look_at(const Vec3d& eye, const Vec3d& target, double fov_y_deg, std::size_t width,
                             std::size_t height);

  Vec3d to_camera(const Vec3d& world) const { return rotation * world + translation; }
  Vec3d to_world(const Vec3d& cam) const { return rotation.transposed() * (cam - translation); }
  /// Camera-frame point at depth z along the ray through pixel (u, v).
  Vec3d backproject(double u, double v, double z) const { return {(u - cx) / fx * z, (v - cy) / fy * z, z}; }

  /// Throws when intrinsics are non-positive or rotation is not orthonormal
  /// within 1e-9.
  void validate() const;

  std::string to_text() const;
  static CameraModel from_text(const std::string& text);
};

}  // namespace foresight
