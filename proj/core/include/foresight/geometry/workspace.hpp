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

#include "foresight/numerics/encoding.hpp"
#include "foresight/numerics/small_linalg.hpp"

namespace foresight {

/// Axis-aligned workspace box discretized into cubic voxels. Fine extents
/// must be integral and divisible by 4; the coarse query grid is fine / 4.
struct WorkspaceSpec {
  Vec3d min{};
  Vec3d max{};
  double voxel = 0.0;
  GridExtents fine{};
  GridExtents coarse{};

  static WorkspaceSpec create(const Vec3d& min, const Vec3d& max, double voxel);

  std::size_t fine_count() const { return fine[0] * fine[1] * fine[2]; }
  std::size_t coarse_count() const { return coarse[0] * coarse[1] * coarse[2]; }

  std::size_t fine_index(std::size_t i, std::size_t j, std::size_t k) const { return i + fine[0] * (j + fine[1] * k); }
  Vec3d voxel_center(std::size_t flat) const;

  /// Half-open containment [min, max).
  bool contains(const Vec3d& p) const;
  /// Fine voxel holding p under half-open voxel intervals.
  std::optional<std::size_t> voxel_of(const Vec3d& p) const;
};

}  // namespace foresight
