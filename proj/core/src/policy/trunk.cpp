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

#include "foresight/policy/trunk.hpp"

#include <cmath>
#include <stdexcept>

namespace foresight {

template <typename T>
typename Trunk<T>::Norm Trunk<T>::make_norm(ParameterStore<T>& store, const std::string& name, std::size_t c) {
  return {store.create(name + ".gain", {c}, InitSpec::constant(1.0)), store.create(name + ".bias", {c}, InitSpec::zeros())};
}

template <typename T>
Trunk<T> Trunk<T>::create(ParameterStore<T>& store, const std::string& name, const TrunkConfig& config) {
  if (config.heads == 0 || config.channels % config.heads != 0) {
    throw std::invalid_argument("trunk: channels must be divisible by heads");
  }
  const std::size_t c = config.channels;
  Trunk t;
  t.config_ = config;
  const double out_gain = 1.0 / std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(config.layers, 1)));
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = name + ".layer" + std::to_string(l);
    Layer layer;
    layer.ln1_ctx = make_norm(store, p + ".ln1", c);
    layer.ln1_act = make_norm(store, p + ".ln1_action", c);
    layer.ln2_ctx = make_norm(store, p + ".ln2", c);
    layer.ln2_act = make_norm(store, p + ".ln2_action", c);
    layer.wq = Linear<T>::create(store, p + ".attn.q", c, c, false);
    layer.wk = Linear<T>::create(store, p + ".attn.k", c, c, false);
    layer.wv = Linear<T>::create(store, p + ".attn.v", c, c, false);
    layer.wo = Linear<T>::create(store, p + ".attn.out", c, c, true, InitSpec::fan_in(out_gain));
    layer.mlp = TanhMlp<T>::create(store, p + ".mlp", c, config.mlp_ratio * c, c, InitSpec::fan_in(out_gain));
    t.layers_.push_back(std::move(layer));
  }
  t.final_ctx_ = make_norm(store, name + ".final", c);
  t.final_act_ = make_norm(store, name + ".final_action", c);
  return t;
}

template <typename T>
ad::Var<T> Trunk<T>::split_norm(const ad::Var<T>& x, std::size_t split, const Norm& ctx, const Norm& act) {
  const std::size_t n = x.shape()[0];
  if (split == 0) return act(x);
  if (split >= n) return ctx(x);
  return ad::concat<T>({ctx(ad::slice(x, 0, 0, split)), act(ad::slice(x, 0, split, n))}, 0);
}

template <typename T>
ad::Var<T> Trunk<T>::heads(const ad::Var<T>& x) const {
  const std::size_t n = x.shape()[0], h = config_.heads, d = config_.channels / h;
  return ad::permute(ad::reshape(x, {n, h, d}), {1, 0, 2});
}

template <typename T>
ad::Var<T> Trunk<T>::merge(const ad::Var<T>& x) const {
  const std::size_t n = x.shape()[1];
  return ad::reshape(ad::permute(x, {1, 0, 2}), {n, config_.channels});
}

template <typename T>
ad::Var<T> Trunk<T>::attend(const ad::Var<T>& q, const ad::Var<T>& k, const ad::Var<T>& v,
                            const Tensor<T>* mask) const {
  const T scale = T(1) / std::sqrt(static_cast<T>(config_.channels / config_.heads));
  auto scores = ad::scale(ad::matmul(q, ad::transpose(k, 1, 2)), scale);
  auto weights = mask != nullptr ? ad::masked_softmax(scores, *mask)
                                 : ad::masked_softmax(scores, Tensor<T>::scalar(T(0)));
  return ad::matmul(weights, v);
}

template <typename T>
ad::Var<T> Trunk<T>::forward(const ad::Var<T>& x, const Tensor<T>& mask, std::size_t action_begin) const {
  const Shape& s = x.shape();
  if (s.size() != 2 || s[1] != config_.channels) {
    throw ShapeError("trunk: expected (N," + std::to_string(config_.channels) + ") tokens, got " + shape_to_string(s));
  }
  if (mask.shape() != Shape{s[0], s[0]}) {
    throw ShapeError("trunk: mask " + shape_to_string(mask.shape()) + " does not match " + std::to_string(s[0]) +
                     " tokens");
  }
  ad::Var<T> h = x;
  for (const auto& layer : layers_) {
    auto a = split_norm(h, action_begin, layer.ln1_ctx, layer.ln1_act);
    auto att = attend(heads(layer.wq(a)), heads(layer.wk(a)), heads(layer.wv(a)), &mask);
    h = ad::add(h, layer.wo(merge(att)));
    auto m = split_norm(h, action_begin, layer.ln2_ctx, layer.ln2_act);
    h = ad::add(h, layer.mlp(m));
  }
  return split_norm(h, action_begin, final_ctx_, final_act_);
}

template <typename T>
ad::Var<T> Trunk<T>::forward_context(const ad::Var<T>& x, const Tensor<T>& mask, KVCache<T>* cache) const {
  const std::size_t n = x.shape()[0];
  if (mask.shape() != Shape{n, n}) throw ShapeError("trunk: context mask does not match the context length");
  if (cache != nullptr) {
    cache->keys.clear();
    cache->values.clear();
    cache->length = n;
  }
  ad::Var<T> h = x;
  for (const auto& layer : layers_) {
    auto a = layer.ln1_ctx(h);
    auto k = heads(layer.wk(a));
    auto v = heads(layer.wv(a));
    if (cache != nullptr) {
      cache->keys.push_back(k.value());
      cache->values.push_back(v.value());
    }
    h = ad::add(h, layer.wo(merge(attend(heads(layer.wq(a)), k, v, &mask))));
    h = ad::add(h, layer.mlp(layer.ln2_ctx(h)));
  }
  return final_ctx_(h);
}

template <typename T>
ad::Var<T> Trunk<T>::forward_actions(const KVCache<T>& cache, const ad::Var<T>& x) const {
  if (cache.keys.size() != layers_.size()) throw std::invalid_argument("trunk: cache depth does not match layers");
  ad::Var<T> h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    auto a = layer.ln1_act(h);
    auto k = ad::concat<T>({constant(cache.keys[l]), heads(layer.wk(a))}, 1);
    auto v = ad::concat<T>({constant(cache.values[l]), heads(layer.wv(a))}, 1);
    h = ad::add(h, layer.wo(merge(attend(heads(layer.wq(a)), k, v, nullptr))));
    h = ad::add(h, layer.mlp(layer.ln2_act(h)));
  }
  return final_act_(h);
}

template class Trunk<float>;
template class Trunk<double>;

}  // namespace foresight
