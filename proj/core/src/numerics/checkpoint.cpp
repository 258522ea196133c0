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

#include "foresight/numerics/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace foresight {

namespace {

std::string shape_field(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const ParameterStore<T>& store) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt");
  std::ofstream blob(dir / "tensors.bin", std::ios::binary);
  if (!manifest || !blob) throw std::runtime_error("save_checkpoint: cannot write into " + dir.string());
  for (const auto& [name, var] : store.entries()) {
    manifest << name << ' ' << shape_field(var.shape()) << '\n';
    write_tensor(blob, var.value());
  }
  if (!manifest || !blob) throw std::runtime_error("save_checkpoint: write failed in " + dir.string());
}

template <typename T>
void load_checkpoint(const std::filesystem::path& dir, ParameterStore<T>& store) {
  std::ifstream manifest(dir / "manifest.txt");
  std::ifstream blob(dir / "tensors.bin", std::ios::binary);
  if (!manifest || !blob) throw std::runtime_error("load_checkpoint: missing manifest or tensors in " + dir.string());
  std::vector<std::pair<std::string, std::string>> lines;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string name, shape;
    is >> name >> shape;
    lines.emplace_back(name, shape);
  }
  const auto& entries = store.entries();
  if (lines.size() != entries.size()) {
    throw std::runtime_error("load_checkpoint: manifest lists " + std::to_string(lines.size()) + " tensors, model has " +
                             std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, var] = entries[i];
    if (lines[i].first != name || lines[i].second != shape_field(var.shape())) {
      throw std::runtime_error("load_checkpoint: entry " + std::to_string(i) + " is " + lines[i].first + " [" +
                               lines[i].second + "], model expects " + name + " [" + shape_field(var.shape()) + "]");
    }
    const Tensor<T> t = read_tensor<T>(blob);
    if (t.shape() != var.shape()) throw std::runtime_error("load_checkpoint: tensor shape differs for " + name);
    auto dst = var.mutable_value();
    std::copy(t.data().begin(), t.data().end(), dst.begin());
  }
}

template void save_checkpoint<float>(const std::filesystem::path&, const ParameterStore<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const ParameterStore<double>&);
template void load_checkpoint<float>(const std::filesystem::path&, ParameterStore<float>&);
template void load_checkpoint<double>(const std::filesystem::path&, ParameterStore<double>&);

}  // namespace foresight
