#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace elemap {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadProportions : Error {
  using Error::Error;
};
struct NoValidGoal : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct Divergence : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Small linear algebra
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec2 xy() const { return {x, y}; }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
};

// Row-major 3x3 rotation matrix.
struct Mat3 {
  double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }

  static Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{1, 0, 0, 0, c, -s, 0, s, c}};
  }
  static Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{c, 0, s, 0, 1, 0, -s, 0, c}};
  }
  static Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += m[3 * i + k] * o.m[3 * k + j];
        r.m[3 * i + j] = s;
      }
    return r;
  }

  Mat3 transposed() const {
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }
};

// Rigid transform mapping local coordinates into the parent frame.
struct Pose {
  Mat3 rotation;
  Vec3 position;

  Vec3 apply(const Vec3& local) const { return rotation * local + position; }
  Vec3 inverse_apply(const Vec3& world) const {
    return rotation.transposed() * (world - position);
  }
  Pose compose(const Pose& child) const {
    return {rotation * child.rotation, apply(child.position)};
  }

  // Yaw of the rotated x axis projected on the ground plane.
  double yaw() const { return std::atan2(m(1, 0), m(0, 0)); }

 private:
  double m(int r, int c) const { return rotation.m[3 * r + c]; }
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

constexpr double kPi = 3.14159265358979323846;

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

inline double deg_to_rad(double d) { return d * kPi / 180.0; }

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Absolute angular distance in [0, pi].
inline double angle_dist(double a, double b) {
  return std::abs(wrap_angle(a - b));
}

inline double sq(double v) { return v * v; }

// ---------------------------------------------------------------------------
// Dense row-major grid
// ---------------------------------------------------------------------------

template <typename T>
struct GridT {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  GridT() = default;
  GridT(int r, int c, T fill = T{}) : rows(r), cols(c), data(size_t(r) * c, fill) {}

  T& at(int r, int c) { return data[size_t(r) * cols + c]; }
  const T& at(int r, int c) const { return data[size_t(r) * cols + c]; }
  size_t size() const { return data.size(); }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows && c >= 0 && c < cols;
  }
  bool same_shape(const GridT& o) const {
    return rows == o.rows && cols == o.cols;
  }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using Grid = GridT<double>;
using MaskGrid = GridT<std::uint8_t>;

}  // namespace elemap
