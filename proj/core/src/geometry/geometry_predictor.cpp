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

#include "foresight/geometry/geometry_predictor.hpp"

#include <cmath>
#include <stdexcept>

namespace foresight {

template <typename T>
std::vector<std::uint8_t> refinement_mask(const Tensor<T>& keypoints, const WorkspaceSpec& ws) {
  if (keypoints.rank() != 2 || keypoints.dim(1) != 3) {
    throw ShapeError("refinement_mask: keypoints must be (K,3), got " + shape_to_string(keypoints.shape()));
  }
  std::vector<std::uint8_t> mask(ws.fine_count(), 0);
  for (std::size_t k = 0; k < keypoints.dim(0); ++k) {
    const Vec3d p{static_cast<double>(keypoints.at(k, 0)), static_cast<double>(keypoints.at(k, 1)),
                  static_cast<double>(keypoints.at(k, 2))};
    if (auto v = ws.voxel_of(p)) mask[*v] = 1;
  }
  return mask;
}

std::vector<std::size_t> marked_voxels(const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

template <typename T>
ad::Var<T> activate_gaussians(const ad::Var<T>& raw, const std::vector<Vec3d>& centers, double radius,
                              double base_log_scale) {
  const Shape& s = raw.shape();
  if (s.size() != 2 || s[1] != 11 || centers.size() != s[0]) {
    throw ShapeError("activate_gaussians: raw " + shape_to_string(s) + " with " + std::to_string(centers.size()) +
                     " centers");
  }
  const std::size_t m = s[0];
  const T r = static_cast<T>(radius), s0 = static_cast<T>(base_log_scale);
  Tensor<T> y(s);
  const auto& x = raw.value();
  for (std::size_t i = 0; i < m; ++i) {
    const T* in = x.data().data() + i * 11;
    T* out = y.data().data() + i * 11;
    for (int a = 0; a < 3; ++a) out[a] = static_cast<T>(centers[i][a]) + std::tanh(in[a]) * r;
    out[3] = in[3];
    for (int a = 0; a < 3; ++a) out[4 + a] = in[4 + a] + s0;
    out[7] = in[7] + T(1);
    for (int a = 8; a < 11; ++a) out[a] = in[a];
  }
  auto pa = raw.shared();
  return ad::make_op<T>("activate_gaussians", std::move(y), {raw}, [pa, r, m](ad::Node<T>& self) {
    T* g = pa->grad_buffer();
    const auto& in = pa->value;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < 11; ++c) {
        const std::size_t idx = i * 11 + c;
        if (c < 3) {
          const T t = std::tanh(in[idx]);
          g[idx] += self.grad[idx] * r * (T(1) - t * t);
        } else {
          g[idx] += self.grad[idx];
        }
      }
    }
  });
}

template <typename T>
GeometryPredictor<T> GeometryPredictor<T>::create(ParameterStore<T>& store, const std::string& name,
                                                  const GeometryConfig& config) {
  const auto& ws = config.workspace;
  if (ws.fine_count() == 0) throw std::invalid_argument("geometry predictor: empty workspace");
  for (int a = 0; a < 3; ++a) {
    if (ws.coarse[a] * 4 != ws.fine[a]) {
      throw std::invalid_argument("geometry predictor: coarse extents must be fine extents / 4");
    }
  }
  if (config.gaussians_per_voxel == 0 || config.refined_per_voxel <= config.gaussians_per_voxel) {
    throw std::invalid_argument("geometry predictor: need 1 <= per-voxel count < refined count");
  }
  const std::size_t c = config.channels, cf = config.feature_channels;
  GeometryPredictor p;
  p.config_ = config;
  p.encoding_ = build_spatial_encoding<T>(ws.coarse, c);
  p.queries_ = store.create(name + ".queries", {ws.coarse_count(), c}, InitSpec::normal(0.1));
  for (int st = 0; st < 2; ++st) {
    const std::string prefix = name + ".up" + std::to_string(st);
    p.stages_[st].expand = Linear<T>::create(store, prefix + ".expand", st == 0 ? c : cf, 8 * cf, false);
    p.stages_[st].pointwise = TanhMlp<T>::create(store, prefix + ".pointwise", cf, cf, cf);
  }
  p.head_ = Linear<T>::create(store, name + ".head", cf, config.gaussians_per_voxel * 11, true, InitSpec::fan_in(0.1));
  p.refine_ = TanhMlp<T>::create(store, name + ".refine", cf, cf, config.refined_per_voxel * 11, InitSpec::fan_in(0.1));
  return p;
}

template <typename T>
ad::Var<T> GeometryPredictor<T>::spatial_queries() const {
  return ad::add(queries_, constant(encoding_.table));
}

template <typename T>
ad::Var<T> GeometryPredictor<T>::shift_temporal(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe,
                                                std::size_t tau) {
  if (tau >= pe.rows()) {
    throw std::invalid_argument("shift_temporal: step " + std::to_string(tau) + " outside [0, " +
                                std::to_string(pe.horizon()) + "]");
  }
  const Shape& s = embeddings.shape();
  if (s.size() != 2 || s[1] != pe.dim()) {
    throw ShapeError("shift_temporal: embeddings " + shape_to_string(s) + " do not match encoding dim " +
                     std::to_string(pe.dim()));
  }
  Tensor<T> row({pe.dim()});
  for (std::size_t c = 0; c < pe.dim(); ++c) row[c] = pe.at(tau, c);
  return ad::add(embeddings, constant(std::move(row)));
}

template <typename T>
ad::Var<T> GeometryPredictor<T>::shift_all(const ad::Var<T>& embeddings, const TemporalEncoding<T>& pe) {
  const Shape& s = embeddings.shape();
  if (s.size() != 2 || s[1] != pe.dim()) {
    throw ShapeError("shift_temporal: embeddings " + shape_to_string(s) + " do not match encoding dim " +
                     std::to_string(pe.dim()));
  }
  const std::size_t steps = pe.rows(), n = s[0], c = s[1];
  Tensor<T> shifts({steps, n, c});
  for (std::size_t tau = 0; tau < steps; ++tau)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ch = 0; ch < c; ++ch) shifts.at(tau, i, ch) = pe.at(tau, ch);
  return ad::add(constant(std::move(shifts)), embeddings);
}

template <typename T>
ad::Var<T> GeometryPredictor<T>::upsample(const Stage& stage, const ad::Var<T>& x, const GridExtents& grid) const {
  const std::size_t steps = x.shape()[0], cf = config_.feature_channels;
  auto children = stage.expand(x);  // (T, N, 8 C')
  children = ad::reshape(children, {steps, grid[2], grid[1], grid[0], 2, 2, 2, cf});
  // (T, nz, ny, nx, cz, cy, cx, C') -> (T, nz, cz, ny, cy, nx, cx, C')
  children = ad::permute(children, {0, 1, 4, 2, 5, 3, 6, 7});
  children = ad::reshape(children, {steps, 8 * grid[0] * grid[1] * grid[2], cf});
  return identity_pointwise_ ? children : stage.pointwise(children);
}

template <typename T>
ad::Var<T> GeometryPredictor<T>::voxel_decode(const ad::Var<T>& shifted) const {
  const Shape& s = shifted.shape();
  const auto& ws = config_.workspace;
  if (s.size() != 3 || s[1] != ws.coarse_count() || s[2] != config_.channels) {
    throw ShapeError("voxel_decode: expected (T," + std::to_string(ws.coarse_count()) + "," +
                     std::to_string(config_.channels) + "), got " + shape_to_string(s));
  }
  const GridExtents mid{ws.coarse[0] * 2, ws.coarse[1] * 2, ws.coarse[2] * 2};
  return upsample(stages_[1], upsample(stages_[0], shifted, ws.coarse), mid);
}

template <typename T>
GaussianSet<T> GeometryPredictor<T>::gaussian_head(const ad::Var<T>& volume) const {
  const auto& ws = config_.workspace;
  const std::size_t nf = ws.fine_count(), ng = config_.gaussians_per_voxel;
  if (volume.shape() != Shape{nf, config_.feature_channels}) {
    throw ShapeError("gaussian_head: expected (" + std::to_string(nf) + "," +
                     std::to_string(config_.feature_channels) + "), got " + shape_to_string(volume.shape()));
  }
  auto raw = ad::reshape(head_(volume), {nf * ng, 11});
  std::vector<Vec3d> centers(nf * ng);
  GaussianSet<T> set;
  set.tags.resize(nf * ng);
  for (std::size_t v = 0; v < nf; ++v) {
    const Vec3d c = ws.voxel_center(v);
    for (std::size_t k = 0; k < ng; ++k) {
      centers[v * ng + k] = c;
      set.tags[v * ng + k] = {Provenance::kInitial, static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(k)};
    }
  }
  set.params = activate_gaussians(raw, centers, 0.5 * ws.voxel * config_.offset_range, std::log(0.5 * ws.voxel));
  return set;
}

template <typename T>
GaussianSet<T> GeometryPredictor<T>::refine(const ad::Var<T>& volume, const std::vector<std::size_t>& marked) const {
  GaussianSet<T> set;
  if (marked.empty()) return set;
  const auto& ws = config_.workspace;
  const std::size_t nr = config_.refined_per_voxel, m = marked.size();
  auto features = ad::gather_rows(volume, marked);
  auto raw = ad::reshape(refine_(features), {m * nr, 11});
  std::vector<Vec3d> centers(m * nr);
  set.tags.resize(m * nr);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3d c = ws.voxel_center(marked[i]);
    for (std::size_t k = 0; k < nr; ++k) {
      centers[i * nr + k] = c;
      set.tags[i * nr + k] = {Provenance::kRefined, static_cast<std::uint32_t>(marked[i]),
                              static_cast<std::uint32_t>(k)};
    }
  }
  set.params = activate_gaussians(raw, centers, 0.5 * ws.voxel * config_.offset_range, std::log(0.25 * ws.voxel));
  return set;
}

#define FORESIGHT_INSTANTIATE_GEOMETRY(T)                                                                      \
  template std::vector<std::uint8_t> refinement_mask<T>(const Tensor<T>&, const WorkspaceSpec&);            \
  template ad::Var<T> activate_gaussians<T>(const ad::Var<T>&, const std::vector<Vec3d>&, double, double); \
  template class GeometryPredictor<T>;

FORESIGHT_INSTANTIATE_GEOMETRY(float)
FORESIGHT_INSTANTIATE_GEOMETRY(double)

#undef FORESIGHT_INSTANTIATE_GEOMETRY

}  // namespace foresight
