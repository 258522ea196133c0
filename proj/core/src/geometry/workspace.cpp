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

#include "foresight/geometry/workspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace foresight {

WorkspaceSpec WorkspaceSpec::create(const Vec3d& min, const Vec3d& max, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("workspace: voxel size must be positive");
  WorkspaceSpec ws;
  ws.min = min;
  ws.max = max;
  ws.voxel = voxel;
  for (int a = 0; a < 3; ++a) {
    const double cells = (max[a] - min[a]) / voxel;
    const double rounded = std::round(cells);
    if (rounded < 1.0 || std::abs(cells - rounded) > 1e-6) {
      throw std::invalid_argument("workspace: axis " + std::to_string(a) + " extent is not a whole number of voxels");
    }
    const auto n = static_cast<std::size_t>(rounded);
    if (n % 4 != 0) {
      throw std::invalid_argument("workspace: axis " + std::to_string(a) + " has " + std::to_string(n) +
                                  " voxels, not divisible by 4");
    }
    ws.fine[a] = n;
    ws.coarse[a] = n / 4;
  }
  return ws;
}

Vec3d WorkspaceSpec::voxel_center(std::size_t flat) const {
  const std::size_t i = flat % fine[0];
  const std::size_t j = (flat / fine[0]) % fine[1];
  const std::size_t k = flat / (fine[0] * fine[1]);
  return {min.x + (static_cast<double>(i) + 0.5) * voxel, min.y + (static_cast<double>(j) + 0.5) * voxel,
          min.z + (static_cast<double>(k) + 0.5) * voxel};
}

bool WorkspaceSpec::contains(const Vec3d& p) const {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] >= min[a] && p[a] < max[a])) return false;
  }
  return true;
}

std::optional<std::size_t> WorkspaceSpec::voxel_of(const Vec3d& p) const {
  if (!contains(p)) return std::nullopt;
  std::size_t idx[3];
  for (int a = 0; a < 3; ++a) {
    auto cell = static_cast<std::size_t>(std::floor((p[a] - min[a]) / voxel));
    idx[a] = std::min(cell, fine[a] - 1);
  }
  return fine_index(idx[0], idx[1], idx[2]);
}

}  // namespace foresight
