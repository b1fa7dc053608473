#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hspace {

inline constexpr int kDim = 6;

/// Six real components tagged by role, so a point cannot be passed where a
/// tangent vector is expected.
template <class Tag>
struct Vec6 {
  std::array<double, kDim> c{};

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr const double& operator[](std::size_t i) const { return c[i]; }

  constexpr auto begin() { return c.begin(); }
  constexpr auto end() { return c.end(); }
  constexpr auto begin() const { return c.begin(); }
  constexpr auto end() const { return c.end(); }

  friend constexpr bool operator==(const Vec6&, const Vec6&) = default;

  constexpr Vec6& operator+=(const Vec6& o) {
    for (int i = 0; i < kDim; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec6& operator-=(const Vec6& o) {
    for (int i = 0; i < kDim; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec6& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  friend constexpr Vec6 operator+(Vec6 a, const Vec6& b) { return a += b; }
  friend constexpr Vec6 operator-(Vec6 a, const Vec6& b) { return a -= b; }
  friend constexpr Vec6 operator*(double s, Vec6 a) { return a *= s; }
  friend constexpr Vec6 operator*(Vec6 a, double s) { return a *= s; }
  friend constexpr Vec6 operator-(Vec6 a) { return a *= -1.0; }

  bool all_finite() const {
    for (double v : c)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct PointTag {};
struct TangentTag {};

/// Coordinates x^1..x^6 of the holonomic chart (stored 0-based).
using Point = Vec6<PointTag>;
/// Tangent components dx^i/dt.
using Tangent = Vec6<TangentTag>;

/// x + h v, the chart point reached by moving along v for parameter time h.
constexpr Point displace(Point x, double h, const Tangent& v) {
  for (int i = 0; i < kDim; ++i) x[i] += h * v[i];
  return x;
}

}  // namespace hspace
