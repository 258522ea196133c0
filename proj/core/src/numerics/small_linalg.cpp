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

#include "foresight/numerics/small_linalg.hpp"

#include <algorithm>

namespace foresight {

Mat3d axis_angle_to_rotation(const Vec3d& rotvec) {
  const double theta = norm(rotvec);
  if (theta < 1e-12) {
    // First-order expansion near the identity.
    Mat3d r = Mat3d::identity();
    r(0, 1) = -rotvec.z;
    r(0, 2) = rotvec.y;
    r(1, 0) = rotvec.z;
    r(1, 2) = -rotvec.x;
    r(2, 0) = -rotvec.y;
    r(2, 1) = rotvec.x;
    return r;
  }
  const Vec3d k = rotvec * (1.0 / theta);
  const double c = std::cos(theta), s = std::sin(theta), v = 1.0 - c;
  Mat3d r;
  r(0, 0) = c + k.x * k.x * v;
  r(0, 1) = k.x * k.y * v - k.z * s;
  r(0, 2) = k.x * k.z * v + k.y * s;
  r(1, 0) = k.y * k.x * v + k.z * s;
  r(1, 1) = c + k.y * k.y * v;
  r(1, 2) = k.y * k.z * v - k.x * s;
  r(2, 0) = k.z * k.x * v - k.y * s;
  r(2, 1) = k.z * k.y * v + k.x * s;
  r(2, 2) = c + k.z * k.z * v;
  return r;
}

Vec3d rotation_to_axis_angle(const Mat3d& r) {
  const double cos_theta = std::clamp((r(0, 0) + r(1, 1) + r(2, 2) - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Vec3d axis_sin{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};  // 2 sin(theta) k
  if (theta < 1e-9) return axis_sin * 0.5;
  return axis_sin * (theta / (2.0 * std::sin(theta)));
}

Mat3d rotation_z(double angle) {
  Mat3d r = Mat3d::identity();
  const double c = std::cos(angle), s = std::sin(angle);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

Mat3d rotation_y(double angle) {
  Mat3d r = Mat3d::identity();
  const double c = std::cos(angle), s = std::sin(angle);
  r(0, 0) = c;
  r(0, 2) = s;
  r(2, 0) = -s;
  r(2, 2) = c;
  return r;
}

}  // namespace foresight
