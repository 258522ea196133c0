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

#include "foresight/renderer/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include "foresight/numerics/params.hpp"

namespace foresight {

namespace {

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// Intermediates of the world-to-screen projection of one row.
template <typename T>
struct Projection {
  Mat3<T> w;      // world-to-camera rotation
  Vec3<T> pc;     // camera-frame center
  T alpha{};
  Vec3<T> scale;  // exp(log-scale)
  T quat[4]{};    // normalized
  T quat_norm{};
  Mat3<T> rq;     // rotation of the normalized quaternion
  Mat3<T> m;      // rq * diag(scale)
  Mat3<T> sigma_cam;
  T j[2][3]{};
  T c2[2][2]{};
  T k[2][2]{};    // inverse of c2
  bool culled = true;
};

template <typename T>
Projection<T> compute_projection(std::span<const T> row, const CameraModel& cam, const RenderOptions& opt) {
  Projection<T> p;
  for (std::size_t i = 0; i < 9; ++i) p.w.m[i] = static_cast<T>(cam.rotation.m[i]);
  const Vec3<T> mu{row[kMeanOffset], row[kMeanOffset + 1], row[kMeanOffset + 2]};
  const Vec3<T> t{static_cast<T>(cam.translation.x), static_cast<T>(cam.translation.y),
                  static_cast<T>(cam.translation.z)};
  p.pc = p.w * mu + t;
  p.alpha = stable_sigmoid(row[kLogitOffset]);
  for (int a = 0; a < 3; ++a) {
    p.scale[a] = std::exp(std::min(row[kLogScaleOffset + a], static_cast<T>(ad::kExpClamp)));
  }
  T qn2 = T(0);
  for (int a = 0; a < 4; ++a) qn2 += row[kQuatOffset + a] * row[kQuatOffset + a];
  p.quat_norm = std::sqrt(qn2);
  if (!(p.pc.z > static_cast<T>(opt.near_plane)) || !(p.quat_norm > T(0))) return p;
  for (int a = 0; a < 4; ++a) p.quat[a] = row[kQuatOffset + a] / p.quat_norm;
  p.rq = quaternion_to_rotation(p.quat[0], p.quat[1], p.quat[2], p.quat[3]);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.m(r, c) = p.rq(r, c) * p.scale[c];
  const Mat3<T> wm = p.w * p.m;
  p.sigma_cam = wm * wm.transposed();

  const T fx = static_cast<T>(cam.fx), fy = static_cast<T>(cam.fy);
  const T z = p.pc.z;
  p.j[0][0] = fx / z;
  p.j[0][1] = T(0);
  p.j[0][2] = -fx * p.pc.x / (z * z);
  p.j[1][0] = T(0);
  p.j[1][1] = fy / z;
  p.j[1][2] = -fy * p.pc.y / (z * z);
  T js[2][3];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) js[r][c] = p.j[r][0] * p.sigma_cam(0, c) + p.j[r][1] * p.sigma_cam(1, c) +
                                           p.j[r][2] * p.sigma_cam(2, c);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) p.c2[r][c] = js[r][0] * p.j[c][0] + js[r][1] * p.j[c][1] + js[r][2] * p.j[c][2];
  const T reg = static_cast<T>(opt.cov_regularizer);
  p.c2[0][0] += reg;
  p.c2[1][1] += reg;
  const T off = T(0.5) * (p.c2[0][1] + p.c2[1][0]);
  p.c2[0][1] = off;
  p.c2[1][0] = off;
  const T det = p.c2[0][0] * p.c2[1][1] - off * off;
  if (!(det > T(0)) || !std::isfinite(det)) return p;
  p.k[0][0] = p.c2[1][1] / det;
  p.k[1][1] = p.c2[0][0] / det;
  p.k[0][1] = -off / det;
  p.k[1][0] = -off / det;
  p.culled = false;
  return p;
}

template <typename T>
SplatRecord<T> to_splat(const Projection<T>& p, const CameraModel& cam, const RenderOptions& opt) {
  SplatRecord<T> s;
  if (p.culled) return s;
  s.mean_x = static_cast<T>(cam.fx) * p.pc.x / p.pc.z + static_cast<T>(cam.cx);
  s.mean_y = static_cast<T>(cam.fy) * p.pc.y / p.pc.z + static_cast<T>(cam.cy);
  s.cov_xx = p.c2[0][0];
  s.cov_xy = p.c2[0][1];
  s.cov_yy = p.c2[1][1];
  s.conic_a = p.k[0][0];
  s.conic_b = p.k[0][1];
  s.conic_c = p.k[1][1];
  s.depth = p.pc.z;
  s.opacity = p.alpha;
  s.radius_x = static_cast<T>(opt.box_sigmas) * std::sqrt(s.cov_xx);
  s.radius_y = static_cast<T>(opt.box_sigmas) * std::sqrt(s.cov_yy);
  s.culled = !(std::isfinite(s.mean_x) && std::isfinite(s.mean_y) && std::isfinite(s.radius_x) &&
               std::isfinite(s.radius_y));
  return s;
}

// Inclusive pixel range [lo, hi] that may satisfy |p - center| <= radius,
// clamped to [0, extent). Empty when lo > hi.
template <typename T>
std::pair<long, long> pixel_span(T center, T radius, std::size_t extent) {
  const double lo = std::floor(static_cast<double>(center - radius));
  const double hi = std::ceil(static_cast<double>(center + radius));
  const double last = static_cast<double>(extent) - 1.0;
  const double clo = std::max(lo, 0.0);
  const double chi = std::min(hi, last);
  if (clo > chi) return {1, 0};
  return {static_cast<long>(clo), static_cast<long>(chi)};
}

template <typename T>
T falloff_power(const SplatRecord<T>& s, T dx, T dy) {
  return T(-0.5) * (s.conic_a * dx * dx + T(2) * s.conic_b * dx * dy + s.conic_c * dy * dy);
}

void check_params(std::size_t values, std::size_t keys) {
  if (values % kGaussianParams != 0) {
    throw ShapeError("render_depth: parameter count " + std::to_string(values) + " is not a multiple of 11");
  }
  const std::size_t n = values / kGaussianParams;
  if (keys != 0 && keys != n) {
    throw std::invalid_argument("render_depth: " + std::to_string(keys) + " sort keys for " + std::to_string(n) +
                                " Gaussians");
  }
}

}  // namespace

template <typename T>
SplatRecord<T> project_gaussian(std::span<const T> row, const CameraModel& cam, const RenderOptions& opt) {
  if (row.size() != kGaussianParams) throw ShapeError("project_gaussian: row must hold 11 values");
  return to_splat(compute_projection(row, cam, opt), cam, opt);
}

template <typename T>
std::uint64_t RenderRecord<T>::structure_hash() const {
  std::uint64_t h = splitmix64(width * 1315423911ULL + height);
  auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  for (std::size_t begin : pixel_begin) mix(begin);
  for (std::size_t i = 0; i < contrib_splat.size(); ++i) {
    mix((static_cast<std::uint64_t>(contrib_splat[i]) << 1) | contrib_clamped[i]);
  }
  return h;
}

template <typename T>
RenderRecord<T> DepthRenderer<T>::forward(std::span<const T> params, std::span<const std::uint64_t> sort_keys,
                                          const CameraModel& cam) const {
  check_params(params.size(), sort_keys.size());
  if (options_.tile == 0) throw std::invalid_argument("render_depth: tile size must be positive");
  const std::size_t n = params.size() / kGaussianParams;
  const std::size_t width = cam.width, height = cam.height;

  RenderRecord<T> rec;
  rec.width = width;
  rec.height = height;
  rec.count = n;
  rec.splats.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rec.splats[i] = to_splat(compute_projection(params.subspan(i * kGaussianParams, kGaussianParams), cam, options_),
                             cam, options_);
  }

  std::vector<std::uint32_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rec.splats[i].culled) order.push_back(static_cast<std::uint32_t>(i));
  }
  auto key_of = [&](std::uint32_t i) -> std::uint64_t { return sort_keys.empty() ? i : sort_keys[i]; };
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const T da = rec.splats[a].depth, db = rec.splats[b].depth;
    if (da != db) return da < db;
    const std::uint64_t ka = key_of(a), kb = key_of(b);
    if (ka != kb) return ka < kb;
    return a < b;
  });

  const std::size_t tile = options_.tile;
  const std::size_t tiles_x = (width + tile - 1) / tile;
  const std::size_t tiles_y = (height + tile - 1) / tile;
  std::vector<std::vector<std::uint32_t>> tile_lists(tiles_x * tiles_y);
  for (std::uint32_t idx : order) {
    const auto& s = rec.splats[idx];
    const auto [u0, u1] = pixel_span(s.mean_x, s.radius_x, width);
    const auto [v0, v1] = pixel_span(s.mean_y, s.radius_y, height);
    if (u0 > u1 || v0 > v1) continue;
    for (std::size_t ty = static_cast<std::size_t>(v0) / tile; ty <= static_cast<std::size_t>(v1) / tile; ++ty) {
      for (std::size_t tx = static_cast<std::size_t>(u0) / tile; tx <= static_cast<std::size_t>(u1) / tile; ++tx) {
        tile_lists[ty * tiles_x + tx].push_back(idx);
      }
    }
  }

  rec.depth = Tensor<T>({height, width});
  rec.pixel_begin.assign(width * height + 1, 0);
  const T clamp = static_cast<T>(options_.opacity_clamp);
  const T stop = static_cast<T>(options_.termination);
  for (std::size_t v = 0; v < height; ++v) {
    for (std::size_t u = 0; u < width; ++u) {
      const std::size_t pixel = v * width + u;
      rec.pixel_begin[pixel] = rec.contrib_splat.size();
      const auto& list = tile_lists[(v / tile) * tiles_x + u / tile];
      const T pu = static_cast<T>(u), pv = static_cast<T>(v);
      T trans = T(1), acc = T(0);
      for (std::uint32_t idx : list) {
        const auto& s = rec.splats[idx];
        if (!s.covers(pu, pv)) continue;
        const T g = options_.falloff ? std::exp(falloff_power(s, pu - s.mean_x, pv - s.mean_y)) : T(1);
        const T raw = s.opacity * g;
        const bool clamped = raw > clamp;
        const T a = clamped ? clamp : raw;
        rec.contrib_splat.push_back(idx);
        rec.contrib_alpha.push_back(a);
        rec.contrib_falloff.push_back(g);
        rec.contrib_transmittance.push_back(trans);
        rec.contrib_clamped.push_back(clamped ? 1 : 0);
        acc += trans * a * s.depth;
        trans *= T(1) - a;
        if (trans < stop) break;
      }
      rec.depth.at(v, u) = acc;
    }
  }
  rec.pixel_begin[width * height] = rec.contrib_splat.size();
  return rec;
}

template <typename T>
std::vector<T> DepthRenderer<T>::backward(const RenderRecord<T>& rec, std::span<const T> params,
                                          const CameraModel& cam, std::span<const T> upstream) const {
  check_params(params.size(), 0);
  const std::size_t n = params.size() / kGaussianParams;
  if (n != rec.count) throw ShapeError("render_depth: backward parameter count differs from the forward pass");
  if (upstream.size() != rec.width * rec.height) throw ShapeError("render_depth: upstream gradient has wrong size");

  // Screen-space gradients: mean (x, y), conic (a, b, c), depth, opacity.
  std::vector<T> g_mx(n, T(0)), g_my(n, T(0)), g_ca(n, T(0)), g_cb(n, T(0)), g_cc(n, T(0)), g_d(n, T(0)),
      g_op(n, T(0));
  std::vector<std::uint8_t> touched(n, 0);

  for (std::size_t v = 0; v < rec.height; ++v) {
    for (std::size_t u = 0; u < rec.width; ++u) {
      const std::size_t pixel = v * rec.width + u;
      const T up = upstream[pixel];
      const std::size_t begin = rec.pixel_begin[pixel], end = rec.pixel_begin[pixel + 1];
      if (up == T(0) || begin == end) continue;
      T suffix = T(0);
      for (std::size_t c = end; c-- > begin;) {
        const std::uint32_t idx = rec.contrib_splat[c];
        const auto& s = rec.splats[idx];
        const T a = rec.contrib_alpha[c];
        const T ti = rec.contrib_transmittance[c];
        touched[idx] = 1;
        g_d[idx] += up * ti * a;
        const T g_alpha = up * (ti * s.depth - suffix / (T(1) - a));
        suffix += ti * a * s.depth;
        if (rec.contrib_clamped[c]) continue;
        const T g = rec.contrib_falloff[c];
        g_op[idx] += g_alpha * g;
        if (!options_.falloff) continue;
        const T g_power = g_alpha * s.opacity * g;
        const T dx = static_cast<T>(u) - s.mean_x, dy = static_cast<T>(v) - s.mean_y;
        g_ca[idx] += T(-0.5) * g_power * dx * dx;
        g_cb[idx] += -g_power * dx * dy;
        g_cc[idx] += T(-0.5) * g_power * dy * dy;
        g_mx[idx] += g_power * (s.conic_a * dx + s.conic_b * dy);
        g_my[idx] += g_power * (s.conic_b * dx + s.conic_c * dy);
      }
    }
  }

  std::vector<T> out(params.size(), T(0));
  const T fx = static_cast<T>(cam.fx), fy = static_cast<T>(cam.fy);
  for (std::size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    const auto row = params.subspan(i * kGaussianParams, kGaussianParams);
    const Projection<T> p = compute_projection(row, cam, options_);
    T* g = out.data() + i * kGaussianParams;

    g[kLogitOffset] = g_op[i] * p.alpha * (T(1) - p.alpha);

    // Conic -> regularized 2D covariance: dC = -K dK K.
    const T gk[2][2] = {{g_ca[i], T(0.5) * g_cb[i]}, {T(0.5) * g_cb[i], g_cc[i]}};
    T kg[2][2], gc2[2][2];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) kg[r][c] = p.k[r][0] * gk[0][c] + p.k[r][1] * gk[1][c];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) gc2[r][c] = -(kg[r][0] * p.k[0][c] + kg[r][1] * p.k[1][c]);

    // C = J Sc J^T.
    Mat3<T> g_sc;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        T acc = T(0);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) acc += p.j[a][r] * gc2[a][b] * p.j[b][c];
        g_sc(r, c) = acc;
      }
    T gj[2][3];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) {
        T acc = T(0);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 3; ++b) acc += gc2[r][a] * p.j[a][b] * p.sigma_cam(b, c);
        gj[r][c] = T(2) * acc;
      }

    const T x = p.pc.x, y = p.pc.y, z = p.pc.z;
    const T z2 = z * z, z3 = z2 * z;
    Vec3<T> g_pc{};
    g_pc.x = g_mx[i] * fx / z + gj[0][2] * (-fx / z2);
    g_pc.y = g_my[i] * fy / z + gj[1][2] * (-fy / z2);
    g_pc.z = g_d[i] - g_mx[i] * fx * x / z2 - g_my[i] * fy * y / z2 - gj[0][0] * fx / z2 - gj[1][1] * fy / z2 +
             gj[0][2] * T(2) * fx * x / z3 + gj[1][2] * T(2) * fy * y / z3;
    const Vec3<T> g_mu = p.w.transposed() * g_pc;
    for (int a = 0; a < 3; ++a) g[kMeanOffset + a] = g_mu[a];

    // Sc = W S W^T, S = M M^T.
    const Mat3<T> g_sigma = p.w.transposed() * g_sc * p.w;
    const Mat3<T> g_m_half = g_sigma * p.m;
    Mat3<T> g_rq;
    Vec3<T> g_scale{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const T gm = T(2) * g_m_half(r, c);
        g_rq(r, c) = gm * p.scale[c];
        g_scale[c] += gm * p.rq(r, c);
      }
    for (int a = 0; a < 3; ++a) {
      const bool saturated = row[kLogScaleOffset + a] > static_cast<T>(ad::kExpClamp);
      g[kLogScaleOffset + a] = saturated ? T(0) : g_scale[a] * p.scale[a];
    }

    const T qw = p.quat[0], qx = p.quat[1], qy = p.quat[2], qz = p.quat[3];
    const auto& R = g_rq;
    T gq[4];
    gq[0] = T(2) * (qz * (R(1, 0) - R(0, 1)) + qy * (R(0, 2) - R(2, 0)) + qx * (R(2, 1) - R(1, 2)));
    gq[1] = T(2) * (qy * (R(1, 0) + R(0, 1)) + qz * (R(2, 0) + R(0, 2)) + qw * (R(2, 1) - R(1, 2)) -
                    T(2) * qx * (R(1, 1) + R(2, 2)));
    gq[2] = T(2) * (qx * (R(1, 0) + R(0, 1)) + qw * (R(0, 2) - R(2, 0)) + qz * (R(2, 1) + R(1, 2)) -
                    T(2) * qy * (R(0, 0) + R(2, 2)));
    gq[3] = T(2) * (qw * (R(1, 0) - R(0, 1)) + qx * (R(2, 0) + R(0, 2)) + qy * (R(2, 1) + R(1, 2)) -
                    T(2) * qz * (R(0, 0) + R(1, 1)));
    const T qdot = qw * gq[0] + qx * gq[1] + qy * gq[2] + qz * gq[3];
    for (int a = 0; a < 4; ++a) g[kQuatOffset + a] = (gq[a] - p.quat[a] * qdot) / p.quat_norm;
  }
  return out;
}

template <typename T>
ad::Var<T> render_depth(const ad::Var<T>& gaussians, std::vector<std::uint64_t> sort_keys, const CameraModel& cam,
                        const RenderOptions& options, RenderStats* stats) {
  const Shape& s = gaussians.shape();
  if (s.size() != 2 || s[1] != kGaussianParams) {
    throw ShapeError("render_depth: expected (N,11) Gaussians, got " + shape_to_string(s));
  }
  DepthRenderer<T> renderer(options);
  auto rec = std::make_shared<RenderRecord<T>>(renderer.forward(gaussians.value().data(), sort_keys, cam));
  if (stats != nullptr) {
    stats->visible = static_cast<std::size_t>(
        std::count_if(rec->splats.begin(), rec->splats.end(), [](const SplatRecord<T>& r) { return !r.culled; }));
    stats->contributions = rec->contributions();
    stats->structure_hash = rec->structure_hash();
  }
  Tensor<T> depth = rec->depth;
  auto parent = gaussians.shared();
  return ad::make_op<T>("render_depth", std::move(depth), {gaussians},
                        [parent, rec, renderer, cam](ad::Node<T>& self) {
                          const std::vector<T> grad =
                              renderer.backward(*rec, parent->value.data(), cam, std::span<const T>(self.grad));
                          T* dst = parent->grad_buffer();
                          for (std::size_t i = 0; i < grad.size(); ++i) dst[i] += grad[i];
                        });
}

#define FORESIGHT_INSTANTIATE_RENDERER(T)                                                                      \
  template SplatRecord<T> project_gaussian<T>(std::span<const T>, const CameraModel&, const RenderOptions&); \
  template struct RenderRecord<T>;                                                                             \
  template class DepthRenderer<T>;                                                                             \
  template ad::Var<T> render_depth<T>(const ad::Var<T>&, std::vector<std::uint64_t>, const CameraModel&,     \
                                      const RenderOptions&, RenderStats*);

FORESIGHT_INSTANTIATE_RENDERER(float)
FORESIGHT_INSTANTIATE_RENDERER(double)

#undef FORESIGHT_INSTANTIATE_RENDERER

}  // namespace foresight
