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

#include <array>
#include <cstddef>

#include "foresight/numerics/tensor.hpp"

namespace foresight {

/// Sinusoidal encoding of the integer positions 0..horizon. Row tau holds
/// sin(tau / 10000^(2i/dim)) at channel 2i and the matching cos at 2i+1.
template <typename T>
struct TemporalEncoding {
  Tensor<T> table;  // (horizon + 1, dim)

  std::size_t rows() const { return table.dim(0); }
  std::size_t dim() const { return table.dim(1); }
  std::size_t horizon() const { return rows() - 1; }
  T at(std::size_t tau, std::size_t c) const { return table.at(tau, c); }
};

template <typename T>
TemporalEncoding<T> build_temporal_encoding(std::size_t horizon, std::size_t dim);

/// One row of the 1D encoding at a real-valued position.
template <typename T>
void sinusoid_row(double position, std::size_t dim, T* out);

using GridExtents = std::array<std::size_t, 3>;
using ChannelSplit = std::array<std::size_t, 3>;

/// Equal thirds when dim is divisible by 6; otherwise the nearest split into
/// three even parts, largest first.
ChannelSplit default_channel_split(std::size_t dim);

/// Concatenated x/y/z sinusoidal encodings over a voxel grid. Tokens are
/// stored in raster order (x fastest, then y, then z).
template <typename T>
struct SpatialEncoding {
  GridExtents grid{};
  ChannelSplit split{};
  Tensor<T> table;  // (Nx*Ny*Nz, dim)

  std::size_t dim() const { return table.dim(1); }
  std::size_t tokens() const { return table.dim(0); }
  static std::size_t flat_index(const GridExtents& g, std::size_t i, std::size_t j, std::size_t k) {
    return i + g[0] * (j + g[1] * k);
  }
  T at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) const {
    return table.at(flat_index(grid, i, j, k), c);
  }
};

template <typename T>
SpatialEncoding<T> build_spatial_encoding(const GridExtents& grid, std::size_t dim, const ChannelSplit& split);

template <typename T>
SpatialEncoding<T> build_spatial_encoding(const GridExtents& grid, std::size_t dim) {
  return build_spatial_encoding<T>(grid, dim, default_channel_split(dim));
}

}  // namespace foresight
