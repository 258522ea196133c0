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
#include <optional>
#include <span>
#include <vector>

#include "foresight/numerics/small_linalg.hpp"

namespace foresight {

struct JointLimit {
  double lo = 0.0, hi = 0.0;
};

/// Serial arm: joint 0 yaws about world +z at the base, every later joint
/// pitches about its local +y (positive pitch lowers the distal links). Each
/// link extends along its local +x, so the zero pose points along +x.
struct ArmSpec {
  std::vector<double> links;
  Vec3d base{};
  std::vector<JointLimit> limits;  // one per link
  double radius = 0.02;            // capsule radius of every link

  std::size_t joints() const { return links.size(); }
  std::size_t keypoints() const { return links.size() + 1; }
  bool within_limits(std::span<const double> angles) const;
  void validate() const;

  /// Three links of 0.25, 0.3 and 0.25 m.
  static ArmSpec toy(const Vec3d& base);
};

/// Base, every joint origin and the end effector. Throws on out-of-limit
/// angles.
std::vector<Vec3d> forward_kinematics(const ArmSpec& arm, std::span<const double> angles);
/// Orientation of the distal link frame.
Mat3d end_rotation(const ArmSpec& arm, std::span<const double> angles);

/// Damped least-squares position IK for the end effector, started from
/// `seed` and kept within limits. Empty when the residual stays above
/// `tolerance`.
std::optional<std::vector<double>> solve_position_ik(const ArmSpec& arm, const Vec3d& target,
                                                     std::span<const double> seed, double tolerance = 1e-9);

}  // namespace foresight
