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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "foresight/numerics/autodiff.hpp"

namespace foresight {

enum class Provenance : std::uint8_t { kInitial = 0, kRefined = 1 };

struct GaussianTag {
  Provenance provenance = Provenance::kInitial;
  std::uint32_t voxel = 0;  // source fine voxel
  std::uint32_t slot = 0;   // index among that voxel's primitives

  /// Canonical ordering key: provenance, then voxel, then slot.
  std::uint64_t sort_key() const {
    return (static_cast<std::uint64_t>(provenance) << 56) | (static_cast<std::uint64_t>(voxel) << 16) | slot;
  }
  bool operator==(const GaussianTag&) const = default;
};

/// Rows in the renderer's (N, 11) layout plus one tag per row. An empty set
/// has no parameter node.
template <typename T>
struct GaussianSet {
  ad::Var<T> params;
  std::vector<GaussianTag> tags;

  std::size_t size() const { return tags.size(); }
  bool empty() const { return tags.empty(); }
  std::size_t count(Provenance p) const;
  std::vector<std::uint64_t> sort_keys() const;
};

/// Concatenation, initial rows first.
template <typename T>
GaussianSet<T> union_gaussians(const GaussianSet<T>& init, const GaussianSet<T>& refined);

/// Dump as a (count, 14) float64 tensor in the tensor serialization format:
/// mean (3), opacity, log-scales (3), unit quaternion (4), provenance, voxel,
/// slot. An empty set writes a (0, 14) header and no elements.
template <typename T>
void write_gaussian_dump(std::ostream& out, const GaussianSet<T>& set);
template <typename T>
void save_gaussian_dump(const std::filesystem::path& path, const GaussianSet<T>& set);

struct GaussianDumpRecord {
  double mean[3];
  double opacity;
  double log_scale[3];
  double quat[4];
  GaussianTag tag;
};
std::vector<GaussianDumpRecord> read_gaussian_dump(std::istream& in);

}  // namespace foresight
