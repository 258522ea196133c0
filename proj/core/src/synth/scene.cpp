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

#include "foresight/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace foresight {

namespace {

// Smallest root > eps of a t^2 + 2 b t + c with a > 0.
std::optional<double> first_root(double a, double b, double c) {
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  constexpr double eps = 1e-12;
  const double t0 = (-b - s) / a;
  if (t0 > eps) return t0;
  const double t1 = (-b + s) / a;
  if (t1 > eps) return t1;
  return std::nullopt;
}

std::optional<double> intersect_sphere(const Vec3d& c, double r, const Vec3d& o, const Vec3d& d) {
  const Vec3d oc = o - c;
  return first_root(dot(d, d), dot(oc, d), dot(oc, oc) - r * r);
}

void keep_min(std::optional<double>& best, std::optional<double> t) {
  if (t && (!best || *t < *best)) best = t;
}

}  // namespace

std::optional<double> intersect_box(const Box& box, const Vec3d& o, const Vec3d& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[a] - o[a]) / d[a];
    double t1 = (box.max[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far <= 0.0) return std::nullopt;
  return t_near > 0.0 ? t_near : t_far;
}

std::optional<double> intersect_capsule(const Capsule& cap, const Vec3d& o, const Vec3d& d) {
  std::optional<double> best;
  keep_min(best, intersect_sphere(cap.a, cap.radius, o, d));
  keep_min(best, intersect_sphere(cap.b, cap.radius, o, d));
  const Vec3d axis = cap.b - cap.a;
  const double len2 = dot(axis, axis);
  if (len2 > 0.0) {
    // Infinite cylinder in the plane orthogonal to the axis.
    const Vec3d oa = o - cap.a;
    const Vec3d dp = d - axis * (dot(d, axis) / len2);
    const Vec3d op = oa - axis * (dot(oa, axis) / len2);
    const double a = dot(dp, dp);
    if (a > 0.0) {
      const double b = dot(op, dp), c = dot(op, op) - cap.radius * cap.radius;
      const double disc = b * b - a * c;
      if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        for (double t : {(-b - s) / a, (-b + s) / a}) {
          if (t <= 1e-12) continue;
          const double along = dot(oa + d * t, axis) / len2;
          if (along >= 0.0 && along <= 1.0) {
            keep_min(best, t);
            break;
          }
        }
      }
    }
  }
  return best;
}

void SceneSpec::validate() const {
  if (cameras.empty()) throw std::invalid_argument("scene: at least one camera required");
  const Vec3d center = (workspace.min + workspace.max) * 0.5;
  for (const auto& cam : cameras) {
    cam.validate();
    const Vec3d pc = cam.to_camera(center);
    if (pc.z <= 0.0) throw std::invalid_argument("scene: workspace center behind a camera");
    const double u = cam.fx * pc.x / pc.z + cam.cx, v = cam.fy * pc.y / pc.z + cam.cy;
    if (u < 0.0 || v < 0.0 || u > double(cam.width) - 1.0 || v > double(cam.height) - 1.0) {
      throw std::invalid_argument("scene: workspace center projects outside a camera image");
    }
  }
}

double SceneSpec::min_depth(std::size_t camera, double margin) const {
  const auto& cam = cameras.at(camera);
  double best = std::numeric_limits<double>::infinity();
  for (int corner = 0; corner < 8; ++corner) {
    const Vec3d p{(corner & 1) ? workspace.max.x + margin : workspace.min.x - margin,
                  (corner & 2) ? workspace.max.y + margin : workspace.min.y - margin,
                  (corner & 4) ? workspace.max.z + margin : workspace.min.z - margin};
    best = std::min(best, cam.to_camera(p).z);
  }
  return best;
}

SceneSpec SceneSpec::toy(std::size_t image_size) {
  SceneSpec s;
  s.workspace = WorkspaceSpec::create({0.0, -0.4, 0.0}, {0.8, 0.4, 0.8}, 0.1);
  s.statics.push_back({{0.0, -0.4, 0.0}, {0.8, 0.4, 0.03}});
  s.statics.push_back({{0.5, 0.2, 0.03}, {0.64, 0.34, 0.09}});
  s.object = {{0.45, -0.03, 0.03}, {0.51, 0.03, 0.09}};
  const Vec3d target{0.4, 0.0, 0.25};
  s.cameras.push_back(CameraModel::look_at({1.3, -0.75, 0.95}, target, 45.0, image_size, image_size));
  s.cameras.push_back(CameraModel::look_at({1.3, 0.75, 0.95}, target, 45.0, image_size, image_size));
  return s;
}

double raycast_pixel(const SceneState& scene, const CameraModel& cam, double u, double v) {
  const Vec3d origin = cam.to_world({0.0, 0.0, 0.0});
  // Unit camera-frame z, so the ray parameter is the depth.
  const Vec3d dir = cam.rotation.transposed() * cam.backproject(u, v, 1.0);
  std::optional<double> best;
  for (const auto& b : scene.boxes) keep_min(best, intersect_box(b, origin, dir));
  for (const auto& c : scene.capsules) keep_min(best, intersect_capsule(c, origin, dir));
  return best.value_or(0.0);
}

Tensor<double> raycast_depth(const SceneState& scene, const CameraModel& cam) {
  Tensor<double> depth({cam.height, cam.width});
  for (std::size_t v = 0; v < cam.height; ++v)
    for (std::size_t u = 0; u < cam.width; ++u) depth.at(v, u) = raycast_pixel(scene, cam, double(u), double(v));
  return depth;
}

}  // namespace foresight
