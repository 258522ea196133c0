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
#include <string>
#include <vector>

#include "foresight/geometry/geometry_predictor.hpp"
#include "foresight/harness/dataset.hpp"
#include "foresight/policy/policy.hpp"
#include "foresight/renderer/renderer.hpp"
#include "foresight/track/track_predictor.hpp"

namespace foresight {

/// Scalar summary of one forward pass.
struct LossReport {
  double action = 0.0, track = 0.0, depth = 0.0, total = 0.0;
  std::size_t gaussians_initial = 0;  // summed over tau
  std::size_t gaussians_refined = 0;
  std::size_t marked_voxels = 0;
  bool depth_mask_empty = false;
  std::uint64_t structure = 0;  // render and refinement-mask digest
};

/// Track, geometry and policy modules sharing one parameter store.
template <typename T>
class Model {
 public:
  explicit Model(const RunConfig& config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const RunConfig& config() const { return config_; }
  ParameterStore<T>& store() { return store_; }
  const ParameterStore<T>& store() const { return store_; }
  const GeometryPredictor<T>& geometry() const { return geometry_; }
  const Policy<T>& policy() const { return policy_; }
  const TemporalEncoding<T>& time_encoding() const { return pe_; }
  const RenderOptions& render_options() const { return render_; }

  struct Forward {
    ad::Var<T> action, track, depth, total;
    ad::Var<T> tracks;                    // (H+1, K, 3), empty when future tracks are off
    std::vector<GaussianSet<T>> gaussians;  // G^total per tau
    ad::Var<T> rendered;                  // (H+1, cameras, h, w), empty when depth is off
    LossReport report;
  };
  /// Training pass: flow sample at time s with the given noise, track
  /// decoding, Gaussian prediction, rendering and the weighted total.
  Forward forward(const Sample<T>& sample, const Tensor<T>& noise, T s) const;

  /// What the geometry branch produced during `act` when asked to run it.
  struct GeometryTrace {
    Tensor<T> tracks;
    Tensor<T> rendered;
    std::size_t gaussians = 0;
    std::size_t marked_voxels = 0;  // summed over tau
  };
  /// Inference: one cached context pass, then `steps` Euler steps from noise
  /// drawn with `seed`. With `trace`, the track decoder, voxel decoder and
  /// renderer also run on the context features; the actions do not depend
  /// on it.
  Tensor<T> act(const Sample<T>& sample, std::size_t steps, std::uint64_t seed, GeometryTrace* trace = nullptr) const;

 private:
  ContextSequence<T> context(const Sample<T>& sample) const;
  std::size_t future_query_count() const;
  struct Geometry {
    std::vector<GaussianSet<T>> sets;
    ad::Var<T> rendered;
    std::uint64_t structure = 0;
    std::size_t initial = 0, refined = 0, marked = 0;
  };
  Geometry predict_geometry(const ad::Var<T>& spatial_features, const Tensor<T>* tracks,
                            const std::vector<CameraModel>& cameras) const;

  RunConfig config_;
  ParameterStore<T> store_;
  TrackPredictor<T> track_;
  GeometryPredictor<T> geometry_;
  Policy<T> policy_;
  TemporalEncoding<T> pe_;
  RenderOptions render_;
};

}  // namespace foresight
