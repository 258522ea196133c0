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

// Independent reference implementations for the depth renderer: a forward-mode
// dual number, a quaternion-sandwich rotation and a brute-force compositor that
// visits every Gaussian at every pixel.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "foresight/renderer/camera.hpp"
#include "foresight/renderer/renderer.hpp"

namespace foresight::testing {

struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}
  friend Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
};

/// Pixel coordinates of a world point.
template <typename S>
std::array<S, 2> oracle_pixel(const CameraModel& cam, const std::array<S, 3>& world) {
  std::array<S, 3> pc;
  for (int r = 0; r < 3; ++r) {
    pc[r] = S(cam.translation[r]);
    for (int c = 0; c < 3; ++c) pc[r] = pc[r] + S(cam.rotation(r, c)) * world[c];
  }
  return {S(cam.fx) * pc[0] / pc[2] + S(cam.cx), S(cam.fy) * pc[1] / pc[2] + S(cam.cy)};
}

/// 2x3 Jacobian of oracle_pixel at `world`, by forward-mode dual numbers.
inline std::array<std::array<double, 3>, 2> oracle_pixel_jacobian(const CameraModel& cam,
                                                                  const std::array<double, 3>& world) {
  std::array<std::array<double, 3>, 2> jac{};
  for (int c = 0; c < 3; ++c) {
    std::array<Dual, 3> p{Dual(world[0]), Dual(world[1]), Dual(world[2])};
    p[c].d = 1.0;
    const auto px = oracle_pixel(cam, p);
    jac[0][c] = px[0].d;
    jac[1][c] = px[1].d;
  }
  return jac;
}

using Quat = std::array<double, 4>;

inline Quat hamilton(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3], a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1], a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

/// Columns are q e_i q* for the normalized quaternion.
inline std::array<std::array<double, 3>, 3> oracle_rotation(Quat q) {
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (auto& v : q) v /= n;
  const Quat conj{q[0], -q[1], -q[2], -q[3]};
  std::array<std::array<double, 3>, 3> r{};
  for (int c = 0; c < 3; ++c) {
    Quat e{0.0, 0.0, 0.0, 0.0};
    e[c + 1] = 1.0;
    const Quat rotated = hamilton(hamilton(q, e), conj);
    for (int k = 0; k < 3; ++k) r[k][c] = rotated[k + 1];
  }
  return r;
}

/// World-space covariance R diag(s^2) R^T of a parameter row.
inline std::array<std::array<double, 3>, 3> oracle_covariance(std::span<const double> row) {
  const auto r = oracle_rotation({row[7], row[8], row[9], row[10]});
  std::array<std::array<double, 3>, 3> cov{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int k = 0; k < 3; ++k) cov[a][b] += r[a][k] * r[b][k] * std::exp(2.0 * row[4 + k]);
  return cov;
}

struct OracleSplat {
  bool culled = true;
  double mx = 0, my = 0, depth = 0, opacity = 0;
  double cxx = 0, cxy = 0, cyy = 0;
};

inline OracleSplat oracle_project(std::span<const double> row, const CameraModel& cam, const RenderOptions& opt) {
  OracleSplat s;
  const std::array<double, 3> mu{row[0], row[1], row[2]};
  const Vec3d pc = cam.to_camera({mu[0], mu[1], mu[2]});
  if (pc.z <= opt.near_plane) return s;
  s.culled = false;
  const auto px = oracle_pixel(cam, mu);
  s.mx = px[0];
  s.my = px[1];
  s.depth = pc.z;
  s.opacity = 1.0 / (1.0 + std::exp(-row[3]));
  const auto jac = oracle_pixel_jacobian(cam, mu);
  const auto cov = oracle_covariance(row);
  double c2[2][2] = {};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c2[a][b] += jac[a][i] * cov[i][j] * jac[b][j];
  s.cxx = c2[0][0] + opt.cov_regularizer;
  s.cxy = 0.5 * (c2[0][1] + c2[1][0]);
  s.cyy = c2[1][1] + opt.cov_regularizer;
  return s;
}

/// Every pixel against every Gaussian, no tiles, same clamps and ordering.
inline std::vector<double> brute_force_depth(std::span<const double> params, const CameraModel& cam,
                                             const RenderOptions& opt) {
  const std::size_t n = params.size() / kGaussianParams;
  std::vector<OracleSplat> splats(n);
  for (std::size_t i = 0; i < n; ++i) splats[i] = oracle_project(params.subspan(i * 11, 11), cam, opt);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return splats[a].depth < splats[b].depth; });
  std::vector<double> depth(cam.width * cam.height, 0.0);
  for (std::size_t v = 0; v < cam.height; ++v) {
    for (std::size_t u = 0; u < cam.width; ++u) {
      double trans = 1.0, acc = 0.0;
      for (std::size_t idx : order) {
        const auto& s = splats[idx];
        if (s.culled) continue;
        const double dx = double(u) - s.mx, dy = double(v) - s.my;
        if (std::abs(dx) > opt.box_sigmas * std::sqrt(s.cxx) || std::abs(dy) > opt.box_sigmas * std::sqrt(s.cyy)) {
          continue;
        }
        const double det = s.cxx * s.cyy - s.cxy * s.cxy;
        const double q = (s.cyy * dx * dx - 2.0 * s.cxy * dx * dy + s.cxx * dy * dy) / det;
        const double g = opt.falloff ? std::exp(-0.5 * q) : 1.0;
        const double a = std::min(s.opacity * g, opt.opacity_clamp);
        acc += trans * a * s.depth;
        trans *= 1.0 - a;
        if (trans < opt.termination) break;
      }
      depth[v * cam.width + u] = acc;
    }
  }
  return depth;
}

/// Gaussians scattered around `center`, screen footprints of a few pixels.
inline std::vector<double> random_gaussians(std::size_t n, std::mt19937_64& rng, const Vec3d& center, double spread,
                                            double log_scale_lo = std::log(0.04), double log_scale_hi = std::log(0.12)) {
  std::uniform_real_distribution<double> pos(-spread, spread);
  std::uniform_real_distribution<double> logit(-1.5, 2.5);
  std::uniform_real_distribution<double> ls(log_scale_lo, log_scale_hi);
  std::normal_distribution<double> quat(0.0, 1.0);
  std::vector<double> p(n * kGaussianParams);
  for (std::size_t i = 0; i < n; ++i) {
    double* r = p.data() + i * kGaussianParams;
    r[0] = center.x + pos(rng);
    r[1] = center.y + pos(rng);
    r[2] = center.z + pos(rng);
    r[3] = logit(rng);
    for (int k = 0; k < 3; ++k) r[4 + k] = ls(rng);
    for (int k = 0; k < 4; ++k) r[7 + k] = quat(rng);
  }
  return p;
}

}  // namespace foresight::testing
