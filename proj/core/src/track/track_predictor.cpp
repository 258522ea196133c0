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

#include "foresight/track/track_predictor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace foresight {

template <typename T>
void KeypointHistory<T>::validate() const {
  if (positions.rank() != 3 || positions.dim(2) != 3) {
    throw ShapeError("keypoint history: positions must be (K,L,3), got " + shape_to_string(positions.shape()));
  }
  if (valid.shape() != Shape{positions.dim(0), positions.dim(1)}) {
    throw ShapeError("keypoint history: validity " + shape_to_string(valid.shape()) + " does not match positions " +
                     shape_to_string(positions.shape()));
  }
  if (!positions.all_finite()) throw std::invalid_argument("keypoint history: non-finite position");
  const std::size_t k_count = keypoints(), len = length();
  for (std::size_t k = 0; k < k_count; ++k) {
    std::size_t first = len;
    for (std::size_t l = 0; l < len; ++l) {
      const T v = valid.at(k, l);
      if (v != T(0) && v != T(1)) throw std::invalid_argument("keypoint history: validity must be 0 or 1");
      if (v == T(1) && first == len) first = l;
      if (v == T(0) && first != len) {
        throw std::invalid_argument("keypoint history: valid steps of keypoint " + std::to_string(k) +
                                    " are not a contiguous suffix");
      }
    }
    if (first == len) {
      throw std::invalid_argument("keypoint history: keypoint " + std::to_string(k) + " has no valid steps");
    }
  }
}

template <typename T>
KeypointHistory<T> history_window(const Tensor<T>& trajectory, std::size_t t, std::size_t length) {
  if (trajectory.rank() != 3 || trajectory.dim(2) != 3) {
    throw ShapeError("history_window: trajectory must be (T,K,3), got " + shape_to_string(trajectory.shape()));
  }
  if (t == 0 || t > trajectory.dim(0) || length == 0) {
    throw std::invalid_argument("history_window: step " + std::to_string(t) + " has no history");
  }
  const std::size_t k_count = trajectory.dim(1);
  KeypointHistory<T> h{Tensor<T>({k_count, length, 3}), Tensor<T>({k_count, length})};
  for (std::size_t l = 0; l < length; ++l) {
    if (t + l < length) continue;
    const std::size_t step = t + l - length;
    for (std::size_t k = 0; k < k_count; ++k) {
      h.valid.at(k, l) = T(1);
      for (std::size_t a = 0; a < 3; ++a) h.positions.at(k, l, a) = trajectory.at(step, k, a);
    }
  }
  return h;
}

template <typename T>
Tensor<T> additive_mask(const Tensor<T>& valid) {
  Tensor<T> mask(valid.shape());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    mask[i] = valid[i] != T(0) ? T(0) : -std::numeric_limits<T>::infinity();
  }
  return mask;
}

template <typename T>
TrackPredictor<T> TrackPredictor<T>::create(ParameterStore<T>& store, const std::string& name,
                                            const TrackConfig& config) {
  if (config.keypoints == 0 || config.channels == 0 || config.history == 0) {
    throw std::invalid_argument("track predictor: keypoints, channels and history must be positive");
  }
  const std::size_t c = config.channels;
  TrackPredictor p;
  p.config_ = config;
  p.embed_ = TanhMlp<T>::create(store, name + ".embed", 3, c, c);
  p.history_query_ = store.create(name + ".history_query", {1, c}, InitSpec::normal(1.0));
  p.wq_ = Linear<T>::create(store, name + ".attn.q", c, c, false);
  p.wk_ = Linear<T>::create(store, name + ".attn.k", c, c, false);
  p.wv_ = Linear<T>::create(store, name + ".attn.v", c, c, false);
  p.keypoint_tags_ = store.create(name + ".keypoint_tags", {config.keypoints, c}, InitSpec::normal(0.1));
  p.future_queries_ = store.create(name + ".future_queries", {config.keypoints, c}, InitSpec::normal(1.0));
  p.decoder_ = TanhMlp<T>::create(store, name + ".decoder", c, c, 3);
  return p;
}

template <typename T>
ad::Var<T> TrackPredictor<T>::encode_history(const KeypointHistory<T>& history) const {
  history.validate();
  const std::size_t k_count = history.keypoints(), len = history.length(), c = config_.channels;
  auto steps = constant(history.positions);
  // Step l carries its age L - 1 - l, so the newest step has age 0.
  Tensor<T> ages({len, c});
  for (std::size_t l = 0; l < len; ++l) sinusoid_row(double(len - 1 - l), c, &ages.at(l, 0));
  auto embedded = ad::add(embed_(steps), constant(std::move(ages)));  // (K, L, C)
  auto query = wq_(history_query_);                         // (1, C)
  auto keys = wk_(embedded);                                // (K, L, C)
  auto values = wv_(embedded);                              // (K, L, C)
  auto scores = ad::matmul(keys, ad::transpose(query, 0, 1));  // (K, L, 1)
  scores = ad::scale(ad::reshape(scores, {k_count, len}), T(1) / std::sqrt(static_cast<T>(c)));
  auto weights = ad::masked_softmax(scores, additive_mask(history.valid));
  auto pooled = ad::matmul(ad::reshape(weights, {k_count, 1, len}), values);  // (K, 1, C)
  return ad::reshape(pooled, {k_count, c});
}

template <typename T>
ad::Var<T> TrackPredictor<T>::tag_tokens(const ad::Var<T>& tokens) const {
  return ad::add(tokens, keypoint_tags_);
}

template <typename T>
ad::Var<T> TrackPredictor<T>::decode(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe) const {
  const Shape& s = embeddings.shape();
  if (s.size() != 2 || s[1] != pe.dim()) {
    throw ShapeError("decode_future_tracks: embeddings " + shape_to_string(s) + " do not match encoding dim " +
                     std::to_string(pe.dim()));
  }
  const std::size_t k_count = s[0], steps = pe.rows(), c = pe.dim();
  Tensor<T> shifts({steps, k_count, c});
  for (std::size_t tau = 0; tau < steps; ++tau)
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t ch = 0; ch < c; ++ch) shifts.at(tau, k, ch) = pe.at(tau, ch);
  return decoder_(ad::add(constant(std::move(shifts)), embeddings));
}

template <typename T>
ad::Var<T> track_loss(const ad::Var<T>& pred, const Tensor<T>& gt) {
  const Shape& s = pred.shape();
  if (s.size() != 3 || s[2] != 3 || gt.shape() != s) {
    throw ShapeError("track_loss: prediction " + shape_to_string(s) + " and target " + shape_to_string(gt.shape()) +
                     " must be matching (H+1,K,3)");
  }
  const T norm = T(1) / static_cast<T>(s[0] * s[1]);
  return ad::scale(ad::sum(ad::squared_error(pred, constant(gt))), norm);
}

#define FORESIGHT_INSTANTIATE_TRACK(T)                                                            \
  template struct KeypointHistory<T>;                                                            \
  template KeypointHistory<T> history_window<T>(const Tensor<T>&, std::size_t, std::size_t);     \
  template Tensor<T> additive_mask<T>(const Tensor<T>&);                                         \
  template class TrackPredictor<T>;                                                              \
  template ad::Var<T> track_loss<T>(const ad::Var<T>&, const Tensor<T>&);

FORESIGHT_INSTANTIATE_TRACK(float)
FORESIGHT_INSTANTIATE_TRACK(double)

#undef FORESIGHT_INSTANTIATE_TRACK

}  // namespace foresight
