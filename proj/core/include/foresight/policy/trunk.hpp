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

#include "foresight/numerics/params.hpp"

namespace foresight {

struct TrunkConfig {
  std::size_t channels = 64;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t mlp_ratio = 4;
};

/// Per-layer attention keys and values of the context tokens, each
/// (heads, context, head_dim).
template <typename T>
struct KVCache {
  std::vector<Tensor<T>> keys;
  std::vector<Tensor<T>> values;
  std::size_t length = 0;
};

/// Pre-norm transformer. Rows from `action_begin` on use their own layer-norm
/// parameters; attention and MLP weights are shared.
template <typename T>
class Trunk {
 public:
  static Trunk create(ParameterStore<T>& store, const std::string& name, const TrunkConfig& config);

  const TrunkConfig& config() const { return config_; }

  /// (N, C) tokens with an additive (N, N) mask; returns final-normed (N, C).
  ad::Var<T> forward(const ad::Var<T>& x, const Tensor<T>& mask, std::size_t action_begin) const;

  /// Context-only pass. Fills `cache` when non-null.
  ad::Var<T> forward_context(const ad::Var<T>& x, const Tensor<T>& mask, KVCache<T>* cache) const;
  /// Action rows attending to cached context keys/values plus themselves.
  ad::Var<T> forward_actions(const KVCache<T>& cache, const ad::Var<T>& x) const;

 private:
  struct Norm {
    ad::Var<T> gain, bias;
    ad::Var<T> operator()(const ad::Var<T>& x) const { return ad::layer_norm(x, gain, bias); }
  };
  struct Layer {
    Norm ln1_ctx, ln1_act, ln2_ctx, ln2_act;
    Linear<T> wq, wk, wv, wo;
    TanhMlp<T> mlp;
  };
  static Norm make_norm(ParameterStore<T>& store, const std::string& name, std::size_t c);
  // Applies `ctx` to rows [0, split) and `act` to the rest.
  static ad::Var<T> split_norm(const ad::Var<T>& x, std::size_t split, const Norm& ctx, const Norm& act);
  // (N, C) -> (heads, N, d)
  ad::Var<T> heads(const ad::Var<T>& x) const;
  ad::Var<T> merge(const ad::Var<T>& x) const;
  ad::Var<T> attend(const ad::Var<T>& q, const ad::Var<T>& k, const ad::Var<T>& v, const Tensor<T>* mask) const;

  TrunkConfig config_;
  std::vector<Layer> layers_;
  Norm final_ctx_, final_act_;
};

}  // namespace foresight
