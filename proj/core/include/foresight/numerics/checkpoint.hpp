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

#include <filesystem>

#include "foresight/numerics/params.hpp"

namespace foresight {

// A checkpoint directory holds manifest.txt (one "name d0,d1,..." line per
// parameter, registration order) and tensors.bin (the tensors serialized
// back to back in the same order).
template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const ParameterStore<T>& store);

/// Overwrites every parameter of `store`. Throws when names, order or shapes
/// differ from the manifest.
template <typename T>
void load_checkpoint(const std::filesystem::path& dir, ParameterStore<T>& store);

}  // namespace foresight
