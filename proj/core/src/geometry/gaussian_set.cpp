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

#include "foresight/geometry/gaussian_set.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace foresight {

template <typename T>
std::size_t GaussianSet<T>::count(Provenance p) const {
  return static_cast<std::size_t>(
      std::count_if(tags.begin(), tags.end(), [p](const GaussianTag& t) { return t.provenance == p; }));
}

template <typename T>
std::vector<std::uint64_t> GaussianSet<T>::sort_keys() const {
  std::vector<std::uint64_t> keys(tags.size());
  std::transform(tags.begin(), tags.end(), keys.begin(), [](const GaussianTag& t) { return t.sort_key(); });
  return keys;
}

template <typename T>
GaussianSet<T> union_gaussians(const GaussianSet<T>& init, const GaussianSet<T>& refined) {
  if (init.empty()) return refined;
  if (refined.empty()) return init;
  GaussianSet<T> out;
  out.params = ad::concat<T>({init.params, refined.params}, 0);
  out.tags = init.tags;
  out.tags.insert(out.tags.end(), refined.tags.begin(), refined.tags.end());
  return out;
}

template <typename T>
void write_gaussian_dump(std::ostream& out, const GaussianSet<T>& set) {
  constexpr std::size_t kCols = 14;
  std::vector<double> values;
  values.reserve(set.size() * kCols);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto row = set.params.value().data().subspan(i * 11, 11);
    for (int a = 0; a < 3; ++a) values.push_back(static_cast<double>(row[a]));
    values.push_back(1.0 / (1.0 + std::exp(-static_cast<double>(row[3]))));
    for (int a = 0; a < 3; ++a) values.push_back(static_cast<double>(row[4 + a]));
    double qn = 0.0;
    for (int a = 0; a < 4; ++a) qn += static_cast<double>(row[7 + a]) * static_cast<double>(row[7 + a]);
    qn = std::sqrt(qn);
    for (int a = 0; a < 4; ++a) values.push_back(static_cast<double>(row[7 + a]) / qn);
    const auto& tag = set.tags[i];
    values.push_back(static_cast<double>(tag.provenance));
    values.push_back(static_cast<double>(tag.voxel));
    values.push_back(static_cast<double>(tag.slot));
  }
  write_f64_records(out, {set.size(), kCols}, values);
}

template <typename T>
void save_gaussian_dump(const std::filesystem::path& path, const GaussianSet<T>& set) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_gaussian_dump: cannot open " + path.string());
  write_gaussian_dump(f, set);
}

std::vector<GaussianDumpRecord> read_gaussian_dump(std::istream& in) {
  Shape shape;
  const auto values = read_f64_records(in, shape);
  if (shape.size() != 2 || shape[1] != 14) {
    throw std::runtime_error("read_gaussian_dump: expected (count,14) records, got " + shape_to_string(shape));
  }
  std::vector<GaussianDumpRecord> out(shape[0]);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* v = values.data() + i * 14;
    auto& r = out[i];
    std::copy_n(v, 3, r.mean);
    r.opacity = v[3];
    std::copy_n(v + 4, 3, r.log_scale);
    std::copy_n(v + 7, 4, r.quat);
    r.tag.provenance = v[11] == 0.0 ? Provenance::kInitial : Provenance::kRefined;
    r.tag.voxel = static_cast<std::uint32_t>(v[12]);
    r.tag.slot = static_cast<std::uint32_t>(v[13]);
  }
  return out;
}

#define FORESIGHT_INSTANTIATE_GAUSSIAN_SET(T)                                                   \
  template struct GaussianSet<T>;                                                              \
  template GaussianSet<T> union_gaussians<T>(const GaussianSet<T>&, const GaussianSet<T>&);    \
  template void write_gaussian_dump<T>(std::ostream&, const GaussianSet<T>&);                  \
  template void save_gaussian_dump<T>(const std::filesystem::path&, const GaussianSet<T>&);

FORESIGHT_INSTANTIATE_GAUSSIAN_SET(float)
FORESIGHT_INSTANTIATE_GAUSSIAN_SET(double)

#undef FORESIGHT_INSTANTIATE_GAUSSIAN_SET

}  // namespace foresight
