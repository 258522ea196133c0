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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foresight/numerics/autodiff.hpp"
#include "foresight/renderer/camera.hpp"

namespace foresight {

// Row layout of a Gaussian parameter tensor: center (3), opacity logit (1),
// log-scales (3), unnormalized quaternion w,x,y,z (4).
inline constexpr std::size_t kGaussianParams = 11;
inline constexpr std::size_t kMeanOffset = 0;
inline constexpr std::size_t kLogitOffset = 3;
inline constexpr std::size_t kLogScaleOffset = 4;
inline constexpr std::size_t kQuatOffset = 7;

struct RenderOptions {
  double near_plane = 0.01;
  double cov_regularizer = 0.3;  // px^2 added to the 2D covariance diagonal
  double opacity_clamp = 0.99;
  double termination = 1e-4;     // stop compositing once transmittance drops below
  double box_sigmas = 3.0;
  bool falloff = true;           // false: splats composite with their raw opacity
  std::size_t tile = 4;
};

/// Screen-space footprint of one Gaussian.
template <typename T>
struct SplatRecord {
  T mean_x{}, mean_y{};
  T cov_xx{}, cov_xy{}, cov_yy{};     // regularized 2D covariance
  T conic_a{}, conic_b{}, conic_c{};  // its inverse
  T depth{};
  T opacity{};
  T radius_x{}, radius_y{};           // box half-extents in pixels
  bool culled = true;

  /// Pixel-center coverage test shared by every rendering path.
  bool covers(T u, T v) const {
    return !culled && std::abs(u - mean_x) <= radius_x && std::abs(v - mean_y) <= radius_y;
  }
};

/// Projects one parameter row. Culled when the camera-frame depth is at or
/// behind the near plane.
template <typename T>
SplatRecord<T> project_gaussian(std::span<const T> row, const CameraModel& cam, const RenderOptions& opt);

/// Forward state retained for the backward pass.
template <typename T>
struct RenderRecord {
  std::size_t width = 0, height = 0;
  std::size_t count = 0;
  std::vector<SplatRecord<T>> splats;
  // Per-pixel compositing lists in front-to-back order (CSR layout).
  std::vector<std::size_t> pixel_begin;
  std::vector<std::uint32_t> contrib_splat;
  std::vector<T> contrib_alpha;          // clamped per-pixel opacity
  std::vector<T> contrib_falloff;        // Gaussian falloff G at the pixel
  std::vector<T> contrib_transmittance;  // T_i before this splat
  std::vector<std::uint8_t> contrib_clamped;
  Tensor<T> depth;  // (height, width)

  std::size_t contributions() const { return contrib_splat.size(); }
  /// Digest of which splats reach which pixels, in which order, and which
  /// were clamped. Equal digests mean the same smooth branch of the render.
  std::uint64_t structure_hash() const;
};

template <typename T>
class DepthRenderer {
 public:
  explicit DepthRenderer(RenderOptions options = {}) : options_(options) {}

  const RenderOptions& options() const { return options_; }

  /// `params` holds count * 11 values. `sort_keys` (empty, or one per row)
  /// breaks depth ties; missing keys fall back to the row index.
  RenderRecord<T> forward(std::span<const T> params, std::span<const std::uint64_t> sort_keys,
                          const CameraModel& cam) const;

  /// Gradient of sum(upstream * depth) with respect to every parameter row,
  /// shape (count, 11).
  std::vector<T> backward(const RenderRecord<T>& record, std::span<const T> params, const CameraModel& cam,
                          std::span<const T> upstream) const;

 private:
  RenderOptions options_;
};

struct RenderStats {
  std::size_t visible = 0;
  std::size_t contributions = 0;
  std::uint64_t structure_hash = 0;
};

/// Differentiable depth render of an (N, 11) Gaussian tensor.
template <typename T>
ad::Var<T> render_depth(const ad::Var<T>& gaussians, std::vector<std::uint64_t> sort_keys, const CameraModel& cam,
                        const RenderOptions& options, RenderStats* stats = nullptr);

}  // namespace foresight
