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
#include <vector>

#include "foresight/geometry/gaussian_set.hpp"
#include "foresight/geometry/workspace.hpp"
#include "foresight/numerics/encoding.hpp"
#include "foresight/numerics/params.hpp"

namespace foresight {

struct GeometryConfig {
  WorkspaceSpec workspace;
  std::size_t channels = 64;           // C, backbone width
  std::size_t feature_channels = 32;   // C', voxel feature width
  std::size_t gaussians_per_voxel = 4;
  std::size_t refined_per_voxel = 64;
  double offset_range = 1.5;           // center offset bound in half-voxels
};

/// Fine voxels containing at least one keypoint of a (K, 3) tensor.
template <typename T>
std::vector<std::uint8_t> refinement_mask(const Tensor<T>& keypoints, const WorkspaceSpec& ws);
/// Ascending indices of marked voxels.
std::vector<std::size_t> marked_voxels(const std::vector<std::uint8_t>& mask);

/// Maps raw head outputs (M, 11) to renderer rows: centers become
/// center + tanh(offset) * radius, log-scales get `base_log_scale` added and
/// the quaternion gets the identity (1, 0, 0, 0) added. The logit is passed
/// through.
template <typename T>
ad::Var<T> activate_gaussians(const ad::Var<T>& raw, const std::vector<Vec3d>& centers, double radius,
                              double base_log_scale);

template <typename T>
class GeometryPredictor {
 public:
  static GeometryPredictor create(ParameterStore<T>& store, const std::string& name, const GeometryConfig& config);

  const GeometryConfig& config() const { return config_; }
  const SpatialEncoding<T>& spatial_encoding() const { return encoding_; }
  const ad::Var<T>& initial_queries() const { return queries_; }

  /// Q_init + spatial encoding, (N_coarse, C) in raster order.
  ad::Var<T> spatial_queries() const;

  /// (N, C) embeddings plus row tau of the encoding.
  static ad::Var<T> shift_temporal(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe, std::size_t tau);
  /// Every shift at once, (H+1, N, C).
  static ad::Var<T> shift_all(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe);

  /// (T, N_coarse, C) -> (T, N_fine, C') through two x2 upsampling stages.
  ad::Var<T> voxel_decode(const ad::Var<T>& shifted) const;

  /// (N_fine, C') -> N_fine * N_G initial Gaussians.
  GaussianSet<T> gaussian_head(const ad::Var<T>& volume) const;
  /// N_G' refined Gaussians for each marked voxel of a (N_fine, C') volume.
  GaussianSet<T> refine(const ad::Var<T>& volume, const std::vector<std::size_t>& marked) const;

  /// Test hook: replaces both pointwise MLPs with the identity.
  void set_identity_pointwise(bool on) { identity_pointwise_ = on; }

 private:
  struct Stage {
    Linear<T> expand;  // in -> 8 C', no bias
    TanhMlp<T> pointwise;
  };
  ad::Var<T> upsample(const Stage& stage, const ad::Var<T>& x, const GridExtents& grid) const;

  GeometryConfig config_;
  SpatialEncoding<T> encoding_;
  ad::Var<T> queries_;
  Stage stages_[2];
  Linear<T> head_;
  TanhMlp<T> refine_;
  bool identity_pointwise_ = false;
};

}  // namespace foresight
