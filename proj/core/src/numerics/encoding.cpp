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

#include "foresight/numerics/encoding.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace foresight {

template <typename T>
void sinusoid_row(double position, std::size_t dim, T* out) {
  for (std::size_t i = 0; 2 * i < dim; ++i) {
    const double freq = std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(dim));
    out[2 * i] = static_cast<T>(std::sin(position / freq));
    if (2 * i + 1 < dim) out[2 * i + 1] = static_cast<T>(std::cos(position / freq));
  }
}

template <typename T>
TemporalEncoding<T> build_temporal_encoding(std::size_t horizon, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw std::invalid_argument("temporal encoding: dim must be even and positive, got " + std::to_string(dim));
  }
  TemporalEncoding<T> pe{Tensor<T>(Shape{horizon + 1, dim})};
  for (std::size_t tau = 0; tau <= horizon; ++tau) {
    sinusoid_row<T>(static_cast<double>(tau), dim, &pe.table.at(tau, 0));
  }
  return pe;
}

ChannelSplit default_channel_split(std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw std::invalid_argument("spatial encoding: dim must be even and positive, got " + std::to_string(dim));
  }
  const std::size_t pairs = dim / 2;
  ChannelSplit split{};
  for (std::size_t a = 0; a < 3; ++a) split[a] = 2 * (pairs / 3 + (a < pairs % 3 ? 1 : 0));
  return split;
}

template <typename T>
SpatialEncoding<T> build_spatial_encoding(const GridExtents& grid, std::size_t dim, const ChannelSplit& split) {
  if (split[0] + split[1] + split[2] != dim) {
    throw std::invalid_argument("spatial encoding: split " + std::to_string(split[0]) + "+" +
                                std::to_string(split[1]) + "+" + std::to_string(split[2]) + " != dim " +
                                std::to_string(dim));
  }
  for (auto part : split) {
    if (part == 0 || part % 2 != 0) throw std::invalid_argument("spatial encoding: every split part must be even and positive");
  }
  for (auto e : grid) {
    if (e == 0) throw std::invalid_argument("spatial encoding: zero grid extent");
  }
  SpatialEncoding<T> pe;
  pe.grid = grid;
  pe.split = split;
  pe.table = Tensor<T>(Shape{grid[0] * grid[1] * grid[2], dim});
  std::vector<T> rx(split[0]), ry(split[1]), rz(split[2]);
  for (std::size_t k = 0; k < grid[2]; ++k) {
    sinusoid_row<T>(static_cast<double>(k), split[2], rz.data());
    for (std::size_t j = 0; j < grid[1]; ++j) {
      sinusoid_row<T>(static_cast<double>(j), split[1], ry.data());
      for (std::size_t i = 0; i < grid[0]; ++i) {
        sinusoid_row<T>(static_cast<double>(i), split[0], rx.data());
        T* row = &pe.table.at(SpatialEncoding<T>::flat_index(grid, i, j, k), 0);
        std::copy(rx.begin(), rx.end(), row);
        std::copy(ry.begin(), ry.end(), row + split[0]);
        std::copy(rz.begin(), rz.end(), row + split[0] + split[1]);
      }
    }
  }
  return pe;
}

template void sinusoid_row<float>(double, std::size_t, float*);
template void sinusoid_row<double>(double, std::size_t, double*);
template TemporalEncoding<float> build_temporal_encoding<float>(std::size_t, std::size_t);
template TemporalEncoding<double> build_temporal_encoding<double>(std::size_t, std::size_t);
template SpatialEncoding<float> build_spatial_encoding<float>(const GridExtents&, std::size_t, const ChannelSplit&);
template SpatialEncoding<double> build_spatial_encoding<double>(const GridExtents&, std::size_t, const ChannelSplit&);

}  // namespace foresight
