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

#include "foresight/numerics/params.hpp"

#include <cmath>
#include <stdexcept>

namespace foresight {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  return splitmix64(seed ^ splitmix64(fnv1a(purpose)));
}

template <typename T>
ad::Var<T> ParameterStore<T>::create(const std::string& name, Shape shape, InitSpec init) {
  if (contains(name)) throw std::invalid_argument("parameter '" + name + "' registered twice");
  Tensor<T> value(shape);
  Rng rng(derive_seed(seed_, name));
  switch (init.kind) {
    case InitSpec::Kind::kZeros:
      break;
    case InitSpec::Kind::kConstant:
      for (auto& v : value.data()) v = static_cast<T>(init.value);
      break;
    case InitSpec::Kind::kNormal: {
      std::normal_distribution<double> dist(0.0, init.value);
      for (auto& v : value.data()) v = static_cast<T>(dist(rng));
      break;
    }
    case InitSpec::Kind::kFanIn: {
      const double stddev = init.value / std::sqrt(static_cast<double>(shape.front()));
      std::normal_distribution<double> dist(0.0, stddev);
      for (auto& v : value.data()) v = static_cast<T>(dist(rng));
      break;
    }
  }
  auto var = ad::Var<T>::parameter(std::move(value));
  index_[name] = entries_.size();
  entries_.emplace_back(name, var);
  return var;
}

template <typename T>
const ad::Var<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
std::size_t ParameterStore<T>::total_elements() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& [name, v] : entries_) v.zero_grad();
}

template <typename T>
Linear<T> Linear<T>::create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                            bool with_bias, InitSpec init) {
  Linear l;
  l.weight = store.create(name + ".weight", Shape{in, out}, init);
  if (with_bias) l.bias = store.create(name + ".bias", Shape{out}, InitSpec::zeros());
  return l;
}

template <typename T>
ad::Var<T> Linear<T>::operator()(const ad::Var<T>& x) const {
  auto y = ad::matmul(x, weight);
  return bias.defined() ? ad::add(y, bias) : y;
}

template <typename T>
TanhMlp<T> TanhMlp<T>::create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t width,
                              std::size_t out, InitSpec out_init) {
  return TanhMlp{Linear<T>::create(store, name + ".fc1", in, width),
                 Linear<T>::create(store, name + ".fc2", width, out, true, out_init)};
}

template <typename T>
ad::Var<T> TanhMlp<T>::operator()(const ad::Var<T>& x) const {
  return output(ad::tanh(hidden(x)));
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template struct Linear<float>;
template struct Linear<double>;
template struct TanhMlp<float>;
template struct TanhMlp<double>;

}  // namespace foresight
