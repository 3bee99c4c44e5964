#pragma once

#include <array>
#include <cmath>

namespace sonoshape {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  double norm() const { return std::sqrt(x * x + y * y); }
  double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
// z-component of the cross product; positive when b lies to the left of a.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
// Rotate by +90 degrees (counter-clockwise).
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

// Row-major 2x2 matrix.
struct Mat2 {
  double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

  Mat2() = default;
  Mat2(double m00, double m01, double m10, double m11)
      : a00(m00), a01(m01), a10(m10), a11(m11) {}

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {}; }
  // Outer product a * b^T.
  static Mat2 outer(const Vec2& a, const Vec2& b) {
    return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
  }

  Mat2 operator+(const Mat2& o) const {
    return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11};
  }
  Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  Vec2 operator*(const Vec2& v) const {
    return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y};
  }
  Mat2 operator*(const Mat2& o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }

  double det() const { return a00 * a11 - a01 * a10; }
  double trace() const { return a00 + a11; }
  Mat2 transposed() const { return {a00, a10, a01, a11}; }
  Mat2 inverse() const {
    const double d = det();
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
  }
  double max_abs() const {
    return std::max(std::max(std::abs(a00), std::abs(a01)),
                    std::max(std::abs(a10), std::abs(a11)));
  }
  double asymmetry() const { return std::abs(a01 - a10); }
  // Smallest eigenvalue, valid for symmetric matrices.
  double min_eig_sym() const {
    const double t = 0.5 * trace();
    const double d = std::sqrt(std::max(0.0, t * t - det()));
    return t - d;
  }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

}  // namespace sonoshape
