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

#include "foresight/numerics/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace foresight {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

namespace {

void check_extents(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor: rank must be at least 1");
  for (auto e : shape) {
    if (e == 0) throw ShapeError("tensor: zero extent in shape " + shape_to_string(shape));
  }
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("read_tensor: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

template <typename Word, typename F>
void put_le(std::ostream& out, F value) {
  Word w = std::bit_cast<Word>(value);
  unsigned char bytes[sizeof(Word)];
  for (std::size_t i = 0; i < sizeof(Word); ++i) bytes[i] = static_cast<unsigned char>((w >> (8 * i)) & 0xffu);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(Word));
}

template <typename Word, typename F>
F get_le(std::istream& in) {
  unsigned char bytes[sizeof(Word)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(Word));
  if (!in) throw std::runtime_error("read_tensor: truncated element stream");
  Word w = 0;
  for (std::size_t i = 0; i < sizeof(Word); ++i) w |= static_cast<Word>(bytes[i]) << (8 * i);
  return std::bit_cast<F>(w);
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(shape_numel(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor: " + std::to_string(data_.size()) + " elements do not fill shape " +
                     shape_to_string(shape_));
  }
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("reshape: " + shape_to_string(shape_) + " -> " + shape_to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
void write_tensor(std::ostream& out, const Tensor<T>& t) {
  out.write(kTensorMagic, 4);
  put_u64(out, t.rank());
  for (auto e : t.shape()) put_u64(out, e);
  put_u64(out, sizeof(T));
  for (T v : t.data()) {
    if constexpr (sizeof(T) == 8) {
      put_le<std::uint64_t>(out, v);
    } else {
      put_le<std::uint32_t>(out, v);
    }
  }
  if (!out) throw std::runtime_error("write_tensor: stream failure");
}

template <typename T>
Tensor<T> read_tensor(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0) throw std::runtime_error("read_tensor: bad magic");
  const auto rank = get_u64(in);
  if (rank == 0 || rank > 16) throw std::runtime_error("read_tensor: implausible rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& e : shape) e = get_u64(in);
  const auto width = get_u64(in);
  const std::size_t n = shape_numel(shape);
  std::vector<T> data(n);
  if (width == 8) {
    for (auto& v : data) v = static_cast<T>(get_le<std::uint64_t, double>(in));
  } else if (width == 4) {
    for (auto& v : data) v = static_cast<T>(get_le<std::uint32_t, float>(in));
  } else {
    throw std::runtime_error("read_tensor: unsupported element width " + std::to_string(width));
  }
  return Tensor<T>(std::move(shape), std::move(data));
}

void write_f64_records(std::ostream& out, const Shape& shape, std::span<const double> values) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  if (shape.empty() || n != values.size()) throw ShapeError("write_f64_records: value count does not match shape");
  out.write(kTensorMagic, 4);
  put_u64(out, shape.size());
  for (auto e : shape) put_u64(out, e);
  put_u64(out, 8);
  for (double v : values) put_le<std::uint64_t>(out, v);
  if (!out) throw std::runtime_error("write_f64_records: stream failure");
}

std::vector<double> read_f64_records(std::istream& in, Shape& shape) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTensorMagic, 4) != 0) throw std::runtime_error("read_f64_records: bad magic");
  const auto rank = get_u64(in);
  if (rank == 0 || rank > 16) throw std::runtime_error("read_f64_records: implausible rank " + std::to_string(rank));
  shape.assign(rank, 0);
  std::size_t n = 1;
  for (auto& e : shape) {
    e = get_u64(in);
    n *= e;
  }
  if (get_u64(in) != 8) throw std::runtime_error("read_f64_records: expected 64-bit elements");
  std::vector<double> data(n);
  for (auto& v : data) v = get_le<std::uint64_t, double>(in);
  return data;
}

template <typename T>
void save_tensor(const std::string& path, const Tensor<T>& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_tensor: cannot open " + path);
  write_tensor(out, t);
}

template <typename T>
Tensor<T> load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_tensor: cannot open " + path);
  return read_tensor<T>(in);
}

template class Tensor<float>;
template class Tensor<double>;
template void write_tensor(std::ostream&, const Tensor<float>&);
template void write_tensor(std::ostream&, const Tensor<double>&);
template Tensor<float> read_tensor<float>(std::istream&);
template Tensor<double> read_tensor<double>(std::istream&);
template void save_tensor(const std::string&, const Tensor<float>&);
template void save_tensor(const std::string&, const Tensor<double>&);
template Tensor<float> load_tensor<float>(const std::string&);
template Tensor<double> load_tensor<double>(const std::string&);

}  // namespace foresight
