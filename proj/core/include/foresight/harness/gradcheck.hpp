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
#include <string>

namespace foresight {

/// Analytic gradients against central differences. A coordinate passes when
/// its relative error is below the scope tolerance. Below that, the renderer
/// accepts |analytic| < 1e-6 with absolute error < 1e-8, and the other scopes
/// accept gradients under 1e-6 that agree to 1e-10 (the difference quotient
/// cannot resolve them); such coordinates are counted in `floored`.
/// Coordinates whose probes change a discrete branch (which splats hit which pixels, clamping, refinement mask,
/// L1 residual signs) are not smooth points; the scene or coordinate is
/// redrawn and counted in `redraws`.
struct GradcheckResult {
  std::string scope;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::size_t redraws = 0;
  std::size_t floored = 0;
  double max_relative = 0.0;
  double max_absolute = 0.0;
  bool passed = false;
};

/// Every parameter of `scenes` random scenes of <= 8 Gaussians on a 16x16
/// image, loss = masked L1 depth loss, step 1e-5, tolerance 1e-3.
GradcheckResult gradcheck_renderer(std::uint64_t seed, std::size_t scenes = 4);
/// Every trunk parameter under a block mask, step 1e-5, tolerance 1e-4.
GradcheckResult gradcheck_trunk(std::uint64_t seed);
/// `parameters` random scalars of the tiny end-to-end model against the
/// weighted total loss, five-point stencil with step 1e-4, tolerance 1e-4.
GradcheckResult gradcheck_full(std::uint64_t seed, std::size_t parameters = 100);

std::string format_gradcheck(const GradcheckResult& r);

}  // namespace foresight
