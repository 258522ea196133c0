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

#include "foresight/harness/evaluate.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace foresight {

template <typename T>
Prediction ModelPredictor<T>::predict(const EpisodeRecord& episode, std::size_t t, std::size_t window_index) {
  const auto sample = make_sample<T>(episode, t, model_.config());
  typename Model<T>::GeometryTrace trace;
  Prediction p;
  p.actions = model_.act(sample, steps_, splitmix64(seed_ ^ splitmix64(window_index + 1)), &trace).template cast<double>();
  p.tracks = trace.tracks.template cast<double>();
  p.depths = trace.rendered.template cast<double>();
  p.marked_voxels = trace.marked_voxels;
  return p;
}

Metrics evaluate(Predictor& predictor, const std::vector<EpisodeRecord>& episodes, const RunConfig& config) {
  Metrics m;
  const auto windows = enumerate_windows(episodes, config.horizon);
  double track_sum = 0.0, action_sum = 0.0, depth_abs = 0.0, depth_mask = 0.0, marked = 0.0;
  bool has_tracks = true, has_depth = true, has_refine = !config.disable.refinement && !config.disable.future_track &&
                                                         !config.disable.depth;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& ep = episodes[windows[i].episode];
    const auto gt = make_sample<double>(ep, windows[i].t, config);
    const auto p = predictor.predict(ep, windows[i].t, i);
    if (p.actions.shape() != gt.actions.shape()) throw ShapeError("evaluate: predicted actions have the wrong shape");
    double a = 0.0;
    for (std::size_t j = 0; j < p.actions.size(); ++j) a += (p.actions[j] - gt.actions[j]) * (p.actions[j] - gt.actions[j]);
    action_sum += a / double(p.actions.size());

    if (p.tracks.size() == 0) {
      has_tracks = false;
    } else {
      if (p.tracks.shape() != gt.tracks.shape()) throw ShapeError("evaluate: predicted tracks have the wrong shape");
      double s = 0.0;
      for (std::size_t j = 0; j < p.tracks.size(); ++j) s += (p.tracks[j] - gt.tracks[j]) * (p.tracks[j] - gt.tracks[j]);
      track_sum += s / double(gt.tracks.dim(0) * gt.tracks.dim(1));
    }
    if (p.depths.size() == 0) {
      has_depth = false;
    } else {
      if (p.depths.shape() != gt.depths.shape()) throw ShapeError("evaluate: predicted depths have the wrong shape");
      for (std::size_t j = 0; j < p.depths.size(); ++j) {
        depth_abs += gt.masks[j] * std::abs(p.depths[j] - gt.depths[j]);
        depth_mask += gt.masks[j];
      }
    }
    marked += double(p.marked_voxels);
  }
  const double n = double(windows.size());
  m.windows = windows.size();
  m.action_mse = n > 0 ? action_sum / n : 0.0;
  if (has_tracks && n > 0) m.track_mse = track_sum / n;
  if (has_depth && n > 0) m.depth_l1 = depth_mask > 0 ? depth_abs / depth_mask : 0.0;
  if (has_refine && n > 0) m.refined_voxels = marked / (n * double(config.horizon + 1));
  return m;
}

std::string format_metrics(const Metrics& m) {
  std::ostringstream os;
  os << std::setprecision(9);
  auto opt = [&](const char* k, const std::optional<double>& v) {
    os << ' ' << k << '=';
    if (v) os << *v;
    else os << "off";
  };
  os << "windows=" << m.windows;
  opt("track_mse", m.track_mse);
  opt("depth_l1", m.depth_l1);
  os << " action_mse=" << m.action_mse;
  opt("refined_voxels", m.refined_voxels);
  return os.str();
}

template class ModelPredictor<float>;
template class ModelPredictor<double>;

}  // namespace foresight
