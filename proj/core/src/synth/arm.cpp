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

#include "foresight/synth/arm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace foresight {

namespace {

constexpr Vec3d kX{1.0, 0.0, 0.0};
constexpr Vec3d kY{0.0, 1.0, 0.0};
constexpr Vec3d kZ{0.0, 0.0, 1.0};

struct Chain {
  std::vector<Vec3d> points;
  std::vector<Vec3d> axes;  // world axis of each joint
  Mat3d tip = Mat3d::identity();
};

Chain build_chain(const ArmSpec& arm, std::span<const double> angles) {
  Chain c;
  Mat3d r = rotation_z(angles[0]);
  c.axes.push_back(kZ);
  Vec3d p = arm.base;
  c.points.push_back(p);
  for (std::size_t j = 0; j < arm.joints(); ++j) {
    if (j > 0) {
      r = r * rotation_y(angles[j]);
      c.axes.push_back(r * kY);
    }
    p += r * kX * arm.links[j];
    c.points.push_back(p);
  }
  c.tip = r;
  return c;
}

// Solves (A) x = b for a symmetric positive definite 3x3 A.
Vec3d solve3(const Mat3d& a, const Vec3d& b) {
  const Vec3d c0{a(0, 0), a(1, 0), a(2, 0)}, c1{a(0, 1), a(1, 1), a(2, 1)}, c2{a(0, 2), a(1, 2), a(2, 2)};
  const double det = dot(c0, cross(c1, c2));
  return {dot(b, cross(c1, c2)) / det, dot(c0, cross(b, c2)) / det, dot(c0, cross(c1, b)) / det};
}

}  // namespace

bool ArmSpec::within_limits(std::span<const double> angles) const {
  if (angles.size() != joints()) return false;
  for (std::size_t j = 0; j < joints(); ++j) {
    if (!(angles[j] >= limits[j].lo && angles[j] <= limits[j].hi)) return false;
  }
  return true;
}

void ArmSpec::validate() const {
  if (links.empty()) throw std::invalid_argument("arm: needs at least one link");
  if (limits.size() != links.size()) throw std::invalid_argument("arm: one joint limit per link required");
  for (std::size_t j = 0; j < links.size(); ++j) {
    if (!(links[j] > 0.0)) throw std::invalid_argument("arm: link " + std::to_string(j) + " has non-positive length");
    if (!(limits[j].lo < limits[j].hi)) throw std::invalid_argument("arm: degenerate limit on joint " + std::to_string(j));
  }
  if (!(radius > 0.0)) throw std::invalid_argument("arm: capsule radius must be positive");
}

ArmSpec ArmSpec::toy(const Vec3d& base) {
  ArmSpec arm;
  arm.links = {0.25, 0.3, 0.25};
  arm.base = base;
  arm.limits = {{-1.4, 1.4}, {-0.6, 1.9}, {-0.6, 2.4}};
  arm.radius = 0.02;
  return arm;
}

std::vector<Vec3d> forward_kinematics(const ArmSpec& arm, std::span<const double> angles) {
  if (!arm.within_limits(angles)) throw std::invalid_argument("forward_kinematics: joint angles outside limits");
  return build_chain(arm, angles).points;
}

Mat3d end_rotation(const ArmSpec& arm, std::span<const double> angles) {
  if (!arm.within_limits(angles)) throw std::invalid_argument("end_rotation: joint angles outside limits");
  return build_chain(arm, angles).tip;
}

std::optional<std::vector<double>> solve_position_ik(const ArmSpec& arm, const Vec3d& target,
                                                     std::span<const double> seed, double tolerance) {
  const std::size_t n = arm.joints();
  std::vector<double> q(seed.begin(), seed.end());
  if (q.size() != n) throw std::invalid_argument("solve_position_ik: seed has the wrong joint count");
  for (std::size_t j = 0; j < n; ++j) q[j] = std::clamp(q[j], arm.limits[j].lo, arm.limits[j].hi);
  constexpr double kDamping = 1e-2;
  constexpr double kMaxStep = 0.3;
  for (int iter = 0; iter < 2000; ++iter) {
    const Chain c = build_chain(arm, q);
    const Vec3d err = target - c.points.back();
    if (norm(err) < tolerance) return q;
    std::vector<Vec3d> jac(n);
    for (std::size_t j = 0; j < n; ++j) jac[j] = cross(c.axes[j], c.points.back() - c.points[j]);
    Mat3d jjt;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double s = a == b ? kDamping * kDamping : 0.0;
        for (std::size_t j = 0; j < n; ++j) s += jac[j][a] * jac[j][b];
        jjt(a, b) = s;
      }
    const Vec3d y = solve3(jjt, err);
    double largest = 0.0;
    std::vector<double> dq(n);
    for (std::size_t j = 0; j < n; ++j) {
      dq[j] = dot(jac[j], y);
      largest = std::max(largest, std::abs(dq[j]));
    }
    const double scale = largest > kMaxStep ? kMaxStep / largest : 1.0;
    for (std::size_t j = 0; j < n; ++j) q[j] = std::clamp(q[j] + scale * dq[j], arm.limits[j].lo, arm.limits[j].hi);
  }
  return std::nullopt;
}

}  // namespace foresight
