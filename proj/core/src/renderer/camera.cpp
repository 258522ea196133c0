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

#include "foresight/renderer/camera.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace foresight {

CameraModel CameraModel::look_at(const Vec3d& eye, const Vec3d& target, double fov_y_deg, std::size_t width,
                                 std::size_t height) {
  const Vec3d forward = normalized(target - eye);
  const Vec3d up{0.0, 0.0, 1.0};
  const Vec3d right = normalized(cross(forward, up));
  const Vec3d down = cross(forward, right);
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * static_cast<double>(height) / std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
  cam.fx = cam.fy;
  cam.cx = 0.5 * static_cast<double>(width);
  cam.cy = 0.5 * static_cast<double>(height);
  cam.rotation = Mat3d::from_rows(right, down, forward);
  const Vec3d re = cam.rotation * eye;
  cam.translation = {-re.x, -re.y, -re.z};
  return cam;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be positive");
  if (width == 0 || height == 0) throw std::invalid_argument("camera: image extents must be positive");
  const Mat3d rrt = rotation * rotation.transposed();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double expect = r == c ? 1.0 : 0.0;
      if (std::abs(rrt(r, c) - expect) > 1e-9) throw std::invalid_argument("camera: rotation is not orthonormal");
    }
  }
}

std::string CameraModel::to_text() const {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << fx << ' ' << fy << ' ' << cx << ' ' << cy << ' ' << width << ' ' << height;
  for (double v : rotation.m) os << ' ' << v;
  os << ' ' << translation.x << ' ' << translation.y << ' ' << translation.z;
  return os.str();
}

CameraModel CameraModel::from_text(const std::string& text) {
  std::istringstream is(text);
  CameraModel cam;
  is >> cam.fx >> cam.fy >> cam.cx >> cam.cy >> cam.width >> cam.height;
  for (double& v : cam.rotation.m) is >> v;
  is >> cam.translation.x >> cam.translation.y >> cam.translation.z;
  if (!is) throw std::invalid_argument("camera: malformed text record");
  cam.validate();
  return cam;
}

}  // namespace foresight
