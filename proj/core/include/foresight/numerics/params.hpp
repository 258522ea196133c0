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
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "foresight/numerics/autodiff.hpp"

namespace foresight {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view s);
/// Independent stream seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

struct InitSpec {
  enum class Kind { kZeros, kConstant, kNormal, kFanIn };
  Kind kind = Kind::kFanIn;
  double value = 0.0;  // constant value, normal stddev, or fan-in gain

  static InitSpec zeros() { return {Kind::kZeros, 0.0}; }
  static InitSpec constant(double v) { return {Kind::kConstant, v}; }
  static InitSpec normal(double stddev) { return {Kind::kNormal, stddev}; }
  // N(0, gain^2 / fan_in) with fan_in = first extent.
  static InitSpec fan_in(double gain = 1.0) { return {Kind::kFanIn, gain}; }
};

/// Named parameter registry. Each tensor is initialized from its own stream
/// derived from (seed, name), so values do not depend on creation order.
template <typename T>
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}

  ad::Var<T> create(const std::string& name, Shape shape, InitSpec init = InitSpec::fan_in());
  const ad::Var<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  /// Registration order.
  const std::vector<std::pair<std::string, ad::Var<T>>>& entries() const { return entries_; }
  std::size_t total_elements() const;
  void zero_grad();

 private:
  std::uint64_t seed_;
  std::vector<std::pair<std::string, ad::Var<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

template <typename T>
struct Linear {
  ad::Var<T> weight;  // (in, out)
  ad::Var<T> bias;    // (out), undefined when created without bias

  static Linear create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                       bool with_bias = true, InitSpec init = InitSpec::fan_in());
  ad::Var<T> operator()(const ad::Var<T>& x) const;
  std::size_t in_features() const { return weight.shape()[0]; }
  std::size_t out_features() const { return weight.shape()[1]; }
};

/// Linear -> tanh -> Linear.
template <typename T>
struct TanhMlp {
  Linear<T> hidden;
  Linear<T> output;

  static TanhMlp create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t width,
                        std::size_t out, InitSpec out_init = InitSpec::fan_in());
  ad::Var<T> operator()(const ad::Var<T>& x) const;
};

template <typename T>
ad::Var<T> constant(Tensor<T> t) {
  return ad::Var<T>::constant(std::move(t));
}

}  // namespace foresight
