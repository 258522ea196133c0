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
#include <optional>
#include <string>
#include <vector>

#include "foresight/harness/model.hpp"

namespace foresight {

/// What a predictor says about one window. Empty tensors mean the pathway
/// is switched off.
struct Prediction {
  Tensor<double> tracks;   // (H+1, K, 3)
  Tensor<double> depths;   // (H+1, cameras, h, w)
  Tensor<double> actions;  // (H, 7)
  std::size_t marked_voxels = 0;  // summed over tau
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const EpisodeRecord& episode, std::size_t t, std::size_t window_index) = 0;
};

/// Runs the inference path of a model, with the geometry branch traced so
/// that track and depth errors can be measured. Window i samples its noise
/// from a seed mixed from (seed, i).
template <typename T>
class ModelPredictor : public Predictor {
 public:
  ModelPredictor(const Model<T>& model, std::size_t denoise_steps, std::uint64_t seed)
      : model_(model), steps_(denoise_steps), seed_(seed) {}
  Prediction predict(const EpisodeRecord& episode, std::size_t t, std::size_t window_index) override;

 private:
  const Model<T>& model_;
  std::size_t steps_;
  std::uint64_t seed_;
};

struct Metrics {
  std::size_t windows = 0;
  std::optional<double> track_mse;     // mean over windows of sum |p - gt|^2 / (K (H+1)), m^2
  std::optional<double> depth_l1;      // masked L1 pooled over all windows, cameras and steps, m
  double action_mse = 0.0;             // mean over windows and the H x 7 entries
  std::optional<double> refined_voxels;  // mean marked voxels per predicted step
};

/// Scores every window of `episodes`.
Metrics evaluate(Predictor& predictor, const std::vector<EpisodeRecord>& episodes, const RunConfig& config);

/// `windows=... track_mse=... depth_l1=... action_mse=... refined_voxels=...`
/// with `off` for pathways that were switched off.
std::string format_metrics(const Metrics& m);

}  // namespace foresight
