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
#include <cstdint>
#include <vector>

#include "foresight/numerics/tensor.hpp"

namespace foresight {

// Token groups in sequence order.
enum class Block : std::size_t { kPerception = 0, kHistory = 1, kQueries = 2, kState = 3, kAction = 4 };
inline constexpr std::size_t kBlockCount = 5;

struct BlockLayout {
  std::array<std::size_t, kBlockCount> sizes{};

  std::size_t total() const;
  std::size_t begin(Block b) const;
  std::size_t end(Block b) const { return begin(b) + sizes[static_cast<std::size_t>(b)]; }
  std::size_t context() const { return begin(Block::kAction); }
  /// Block index of token i.
  std::size_t block_of(std::size_t i) const;
};

/// allowed(q, k) iff block(k) <= block(q).
struct AttentionMask {
  std::size_t n = 0;
  std::vector<std::uint8_t> allowed;  // row-major n x n

  bool at(std::size_t q, std::size_t k) const { return allowed[q * n + k] != 0; }
  /// 0 where allowed, -inf elsewhere, shape (n, n).
  template <typename T>
  Tensor<T> additive() const;
};

AttentionMask build_block_mask(const BlockLayout& layout);

}  // namespace foresight
