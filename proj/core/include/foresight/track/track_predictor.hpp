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

#include "foresight/numerics/encoding.hpp"
#include "foresight/numerics/params.hpp"

namespace foresight {

struct TrackConfig {
  std::size_t keypoints = 4;  // K
  std::size_t channels = 64;  // C
  std::size_t history = 8;    // L_max, left-padded window
  std::size_t horizon = 8;    // H
};

/// Left-padded keypoint trajectories.
template <typename T>
struct KeypointHistory {
  Tensor<T> positions;  // (K, L, 3)
  Tensor<T> valid;      // (K, L), 1 on a contiguous suffix

  std::size_t keypoints() const { return positions.dim(0); }
  std::size_t length() const { return positions.dim(1); }
  /// Throws unless shapes agree, positions are finite and every keypoint has
  /// a non-empty contiguous valid suffix.
  void validate() const;
};

/// Steps [t - length, t) of a (T, K, 3) trajectory; steps before 0 are
/// padding. Requires 1 <= t <= T.
template <typename T>
KeypointHistory<T> history_window(const Tensor<T>& trajectory, std::size_t t, std::size_t length);

template <typename T>
class TrackPredictor {
 public:
  static TrackPredictor create(ParameterStore<T>& store, const std::string& name, const TrackConfig& config);

  const TrackConfig& config() const { return config_; }

  /// One token per keypoint, (K, C): a shared query attends over the valid
  /// steps of each trajectory, each embedded as MLP(p) + sinusoid(age).
  ad::Var<T> encode_history(const KeypointHistory<T>& history) const;
  /// Adds the learned per-keypoint tag embedding, (K, C) -> (K, C).
  ad::Var<T> tag_tokens(const ad::Var<T>& tokens) const;
  /// Learned future track queries, (K, C).
  const ad::Var<T>& future_queries() const { return future_queries_; }

  /// (K, C) embeddings -> (H+1, K, 3) positions with
  /// p[tau, k] = MLP(e_k + pe[tau]).
  ad::Var<T> decode(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe) const;

  const TanhMlp<T>& step_embedding() const { return embed_; }
  const TanhMlp<T>& decoder() const { return decoder_; }

 private:
  TrackConfig config_;
  TanhMlp<T> embed_;
  ad::Var<T> history_query_;  // (1, C)
  Linear<T> wq_, wk_, wv_;
  ad::Var<T> keypoint_tags_;   // (K, C)
  ad::Var<T> future_queries_;  // (K, C)
  TanhMlp<T> decoder_;
};

/// sum_k sum_tau |p - gt|^2 / (K (H+1)) over (H+1, K, 3) tensors.
template <typename T>
ad::Var<T> track_loss(const ad::Var<T>& pred, const Tensor<T>& gt);

/// Additive attention mask (0 or -inf) from a 0/1 validity tensor.
template <typename T>
Tensor<T> additive_mask(const Tensor<T>& valid);

}  // namespace foresight
