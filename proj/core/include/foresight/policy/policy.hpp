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
#include <functional>
#include <string>

#include "foresight/numerics/encoding.hpp"
#include "foresight/numerics/params.hpp"
#include "foresight/policy/block_mask.hpp"
#include "foresight/policy/trunk.hpp"

namespace foresight {

inline constexpr std::size_t kActionDim = 7;  // dx (3), axis-angle dtheta (3), gripper
inline constexpr double kFlowTimeScale = 1000.0;

struct PolicyConfig {
  TrunkConfig trunk;
  std::size_t horizon = 8;
  std::size_t state_dim = 4;
  std::size_t tasks = 2;
  std::size_t cameras = 2;
  std::size_t image_height = 32;
  std::size_t image_width = 32;
  std::size_t patch = 8;

  std::size_t patches_per_view() const { return (image_height / patch) * (image_width / patch); }
};

/// Inputs of the context blocks. Empty Vars stand for empty blocks.
template <typename T>
struct PolicyInputs {
  std::size_t task = 0;
  Tensor<T> images;       // (cameras, height, width)
  ad::Var<T> history;     // (K_hist, C) history track tokens
  ad::Var<T> queries;     // (N_q, C) future-track then spatial queries
  Tensor<T> state;        // (state_dim)
};

template <typename T>
struct ContextSequence {
  ad::Var<T> tokens;   // (N_ctx, C)
  BlockLayout layout;  // includes the action block
};

/// Noised action and regression target along the straight noise-to-data path.
template <typename T>
struct FlowSample {
  T s{};
  Tensor<T> noisy;   // (1 - s) noise + s action
  Tensor<T> target;  // action - noise
};

template <typename T>
FlowSample<T> make_flow_sample(const Tensor<T>& action, const Tensor<T>& noise, T s);

/// Mean over every element of (v_hat - target)^2.
template <typename T>
ad::Var<T> cfm_loss(const ad::Var<T>& velocity, const Tensor<T>& target);

struct LossWeights {
  double action = 1.0, track = 1.0, depth = 1.0;
};

template <typename T>
ad::Var<T> total_loss(const ad::Var<T>& action, const ad::Var<T>& track, const ad::Var<T>& depth,
                      const LossWeights& weights);

template <typename T>
class Policy {
 public:
  using VelocityOverride = std::function<Tensor<T>(const Tensor<T>& x, T s)>;

  static Policy create(ParameterStore<T>& store, const std::string& name, const PolicyConfig& config);

  const PolicyConfig& config() const { return config_; }
  const Trunk<T>& trunk() const { return trunk_; }

  /// Blocks 1-4 in order with per-block type embeddings.
  ContextSequence<T> embed_context(const PolicyInputs<T>& inputs) const;
  /// One token per chunk step: projection of x_s, embedding of s, step
  /// encoding and the action type embedding.
  ad::Var<T> embed_actions(const Tensor<T>& noisy, T s) const;

  struct Output {
    ad::Var<T> context;  // (N_ctx, C)
    ad::Var<T> actions;  // (H, C)
  };
  /// Full block-masked pass over context and action tokens.
  Output forward(const ContextSequence<T>& context, const ad::Var<T>& action_tokens) const;
  /// (H, C) action features -> (H, 7) velocity.
  ad::Var<T> velocity(const ad::Var<T>& action_features) const;

  /// Context-only pass. `features` receives the (N_ctx, C) trunk outputs.
  KVCache<T> build_kv_cache(const ContextSequence<T>& context, Tensor<T>* features = nullptr) const;
  /// Velocity from the cached context.
  Tensor<T> cached_velocity(const KVCache<T>& cache, const Tensor<T>& x, T s) const;

  /// Euler integration from `noise` at s = 0 to s = 1 in `steps` steps.
  Tensor<T> sample_actions(const KVCache<T>& cache, std::size_t steps, const Tensor<T>& noise,
                           const VelocityOverride& override_velocity = {}) const;
  /// Same with standard normal noise drawn from `seed`.
  Tensor<T> sample_actions(const KVCache<T>& cache, std::size_t steps, std::uint64_t seed,
                           const VelocityOverride& override_velocity = {}) const;

 private:
  PolicyConfig config_;
  Trunk<T> trunk_;
  ad::Var<T> task_table_;   // (tasks, C)
  Linear<T> patch_embed_;   // P*P -> C
  ad::Var<T> patch_pos_;    // (cameras * patches, C)
  Linear<T> state_embed_;
  ad::Var<T> block_types_;  // (5, C)
  Linear<T> action_in_;     // 7 -> C
  Linear<T> action_out_;    // C -> 7
  TemporalEncoding<T> step_pe_;
};

}  // namespace foresight
