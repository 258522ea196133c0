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

#include <array>
#include <cmath>

namespace foresight {

// Fixed-size 3-vectors and 3x3 matrices. Templated on the scalar so the
// renderer can push dual numbers through the same code.
template <typename S>
struct Vec3 {
  S x{}, y{}, z{};

  S& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const S& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(const Vec3& a, const S& s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(const S& s, const Vec3& a) { return {a.x * s, a.y * s, a.z * s}; }
  Vec3& operator+=(const Vec3& b) {
    x = x + b.x;
    y = y + b.y;
    z = z + b.z;
    return *this;
  }
};

using Vec3d = Vec3<double>;

template <typename S>
S dot(const Vec3<S>& a, const Vec3<S>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename S>
Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3d& a) { return std::sqrt(dot(a, a)); }
inline Vec3d normalized(const Vec3d& a) { return a * (1.0 / norm(a)); }

template <typename S>
struct Mat3 {
  std::array<S, 9> m{};  // row-major

  S& operator()(int r, int c) { return m[r * 3 + c]; }
  const S& operator()(int r, int c) const { return m[r * 3 + c]; }

  static Mat3 identity() {
    Mat3 out;
    out(0, 0) = S(1);
    out(1, 1) = S(1);
    out(2, 2) = S(1);
    return out;
  }
  static Mat3 from_rows(const Vec3<S>& r0, const Vec3<S>& r1, const Vec3<S>& r2) {
    Mat3 out;
    for (int c = 0; c < 3; ++c) {
      out(0, c) = r0[c];
      out(1, c) = r1[c];
      out(2, c) = r2[c];
    }
    return out;
  }

  Mat3 transposed() const {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
    return out;
  }

  friend Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        S acc = a(r, 0) * b(0, c);
        acc = acc + a(r, 1) * b(1, c);
        acc = acc + a(r, 2) * b(2, c);
        out(r, c) = acc;
      }
    return out;
  }
  friend Vec3<S> operator*(const Mat3& a, const Vec3<S>& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z, a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
  }
};

using Mat3d = Mat3<double>;

/// Rotation matrix of a unit quaternion (w, x, y, z).
template <typename S>
Mat3<S> quaternion_to_rotation(const S& w, const S& x, const S& y, const S& z) {
  Mat3<S> r;
  const S one(1), two(2);
  r(0, 0) = one - two * (y * y + z * z);
  r(0, 1) = two * (x * y - w * z);
  r(0, 2) = two * (x * z + w * y);
  r(1, 0) = two * (x * y + w * z);
  r(1, 1) = one - two * (x * x + z * z);
  r(1, 2) = two * (y * z - w * x);
  r(2, 0) = two * (x * z - w * y);
  r(2, 1) = two * (y * z + w * x);
  r(2, 2) = one - two * (x * x + y * y);
  return r;
}

/// Rodrigues' formula.
Mat3d axis_angle_to_rotation(const Vec3d& rotvec);
/// Inverse of axis_angle_to_rotation for rotations with angle < pi.
Vec3d rotation_to_axis_angle(const Mat3d& r);

Mat3d rotation_z(double angle);
Mat3d rotation_y(double angle);

}  // namespace foresight
