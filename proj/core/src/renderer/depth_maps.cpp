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

#include "foresight/renderer/depth_maps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace foresight {

namespace {

template <typename T>
void require_image(const Tensor<T>& t, const char* what) {
  if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected an (H,W) image, got " + shape_to_string(t.shape()));
}

}  // namespace

template <typename T>
Tensor<T> workspace_mask(const Tensor<T>& gt_depth, const CameraModel& cam, const WorkspaceSpec& ws) {
  require_image(gt_depth, "workspace_mask");
  if (gt_depth.dim(0) != cam.height || gt_depth.dim(1) != cam.width) {
    throw ShapeError("workspace_mask: depth " + shape_to_string(gt_depth.shape()) + " does not match camera extents");
  }
  Tensor<T> mask(gt_depth.shape());
  for (std::size_t v = 0; v < cam.height; ++v) {
    for (std::size_t u = 0; u < cam.width; ++u) {
      const double d = static_cast<double>(gt_depth.at(v, u));
      if (d == kBackgroundDepth || !std::isfinite(d)) continue;
      const Vec3d world = cam.to_world(cam.backproject(static_cast<double>(u), static_cast<double>(v), d));
      mask.at(v, u) = ws.contains(world) ? T(1) : T(0);
    }
  }
  return mask;
}

template <typename T>
MaskedL1<T> masked_depth_loss(const ad::Var<T>& pred, const Tensor<T>& gt, const Tensor<T>& mask) {
  if (pred.shape() != gt.shape() || gt.shape() != mask.shape()) {
    throw ShapeError("masked_depth_loss: shapes " + shape_to_string(pred.shape()) + ", " +
                     shape_to_string(gt.shape()) + ", " + shape_to_string(mask.shape()) + " differ");
  }
  MaskedL1<T> out;
  for (std::size_t i = 0; i < mask.size(); ++i) out.mask_total += mask[i];
  if (out.mask_total == T(0)) {
    out.empty_mask = true;
    out.loss = ad::Var<T>::constant(Tensor<T>::scalar(T(0)));
    return out;
  }
  const T total = out.mask_total;
  const auto& p = pred.value();
  T acc = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) acc += mask[i] * std::abs(p[i] - gt[i]);
  auto parent = pred.shared();
  out.loss = ad::make_op<T>("masked_depth_loss", Tensor<T>::scalar(acc / total), {pred},
                            [parent, gt, mask, total](ad::Node<T>& self) {
                              const T up = self.grad[0] / total;
                              T* g = parent->grad_buffer();
                              const auto& pv = parent->value;
                              for (std::size_t i = 0; i < pv.size(); ++i) {
                                const T diff = pv[i] - gt[i];
                                const T sign = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                                g[i] += up * mask[i] * sign;
                              }
                            });
  return out;
}

template <typename T>
void write_depth_pgm(std::ostream& out, const Tensor<T>& depth) {
  require_image(depth, "write_depth_pgm");
  const std::size_t h = depth.dim(0), w = depth.dim(1);
  out << "P5\n" << w << ' ' << h << "\n65535\n";
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double mm = std::round(static_cast<double>(depth[i]) * 1000.0);
    const double clamped = std::isfinite(mm) ? std::clamp(mm, 0.0, 65535.0) : 0.0;
    const auto v = static_cast<std::uint16_t>(clamped);
    const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) throw std::runtime_error("write_depth_pgm: stream write failed");
}

template <typename T>
void save_depth_pgm(const std::filesystem::path& path, const Tensor<T>& depth) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_depth_pgm: cannot open " + path.string());
  write_depth_pgm(f, depth);
}

#define FORESIGHT_INSTANTIATE_DEPTH_MAPS(T)                                                            \
  template Tensor<T> workspace_mask<T>(const Tensor<T>&, const CameraModel&, const WorkspaceSpec&); \
  template MaskedL1<T> masked_depth_loss<T>(const ad::Var<T>&, const Tensor<T>&, const Tensor<T>&); \
  template void write_depth_pgm<T>(std::ostream&, const Tensor<T>&);                                 \
  template void save_depth_pgm<T>(const std::filesystem::path&, const Tensor<T>&);

FORESIGHT_INSTANTIATE_DEPTH_MAPS(float)
FORESIGHT_INSTANTIATE_DEPTH_MAPS(double)

#undef FORESIGHT_INSTANTIATE_DEPTH_MAPS

}  // namespace foresight
