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

#include "foresight/policy/block_mask.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace foresight {

std::size_t BlockLayout::total() const { return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}); }

std::size_t BlockLayout::begin(Block b) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(b); ++i) off += sizes[i];
  return off;
}

std::size_t BlockLayout::block_of(std::size_t i) const {
  std::size_t end = 0;
  for (std::size_t b = 0; b < kBlockCount; ++b) {
    end += sizes[b];
    if (i < end) return b;
  }
  throw std::out_of_range("block_of: token " + std::to_string(i) + " beyond sequence");
}

AttentionMask build_block_mask(const BlockLayout& layout) {
  const std::size_t n = layout.total();
  if (n == 0) throw std::invalid_argument("build_block_mask: empty sequence");
  std::vector<std::size_t> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = layout.block_of(i);
  AttentionMask mask;
  mask.n = n;
  mask.allowed.resize(n * n);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t k = 0; k < n; ++k) mask.allowed[q * n + k] = block[k] <= block[q] ? 1 : 0;
  return mask;
}

template <typename T>
Tensor<T> AttentionMask::additive() const {
  Tensor<T> t({n, n});
  for (std::size_t i = 0; i < n * n; ++i) t[i] = allowed[i] ? T(0) : -std::numeric_limits<T>::infinity();
  return t;
}

template Tensor<float> AttentionMask::additive<float>() const;
template Tensor<double> AttentionMask::additive<double>() const;

}  // namespace foresight
