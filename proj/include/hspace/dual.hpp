#pragma once

#include <array>
#include <cmath>

#include "hspace/coords.hpp"

namespace hspace {

/// Forward-mode dual number carrying the value and the six partials d/dx^1..d/dx^6.
struct Dual6 {
  double value = 0.0;
  std::array<double, kDim> d{};

  constexpr Dual6() = default;
  constexpr Dual6(double v) : value(v) {}  // NOLINT: implicit lift of constants
  constexpr Dual6(double v, const std::array<double, kDim>& partials) : value(v), d(partials) {}

  /// The coordinate function x^(index+1) with a unit partial in slot `index`.
  static constexpr Dual6 variable(int index, double v) {
    Dual6 r(v);
    r.d[index] = 1.0;
    return r;
  }

  constexpr bool is_constant() const {
    for (double p : d)
      if (p != 0.0) return false;
    return true;
  }

  bool all_finite() const {
    if (!std::isfinite(value)) return false;
    for (double p : d)
      if (!std::isfinite(p)) return false;
    return true;
  }

  constexpr Dual6& operator+=(const Dual6& o) {
    value += o.value;
    for (int i = 0; i < kDim; ++i) d[i] += o.d[i];
    return *this;
  }
  constexpr Dual6& operator-=(const Dual6& o) {
    value -= o.value;
    for (int i = 0; i < kDim; ++i) d[i] -= o.d[i];
    return *this;
  }
  constexpr Dual6& operator*=(const Dual6& o) {
    for (int i = 0; i < kDim; ++i) d[i] = d[i] * o.value + value * o.d[i];
    value *= o.value;
    return *this;
  }
  constexpr Dual6& operator/=(const Dual6& o) {
    const double inv = 1.0 / o.value;
    const double q = value / o.value;
    for (int i = 0; i < kDim; ++i) d[i] = (d[i] - q * o.d[i]) * inv;
    value = q;
    return *this;
  }

  friend constexpr Dual6 operator+(Dual6 a, const Dual6& b) { return a += b; }
  friend constexpr Dual6 operator-(Dual6 a, const Dual6& b) { return a -= b; }
  friend constexpr Dual6 operator*(Dual6 a, const Dual6& b) { return a *= b; }
  friend constexpr Dual6 operator/(Dual6 a, const Dual6& b) { return a /= b; }
  friend constexpr Dual6 operator-(Dual6 a) {
    a.value = -a.value;
    for (auto& p : a.d) p = -p;
    return a;
  }
};

namespace detail {
// f(a) with f'(a.value) = slope
constexpr Dual6 chain(const Dual6& a, double fa, double slope) {
  Dual6 r(fa);
  for (int i = 0; i < kDim; ++i) r.d[i] = slope * a.d[i];
  return r;
}
}  // namespace detail

inline Dual6 sin(const Dual6& a) { return detail::chain(a, std::sin(a.value), std::cos(a.value)); }
inline Dual6 cos(const Dual6& a) { return detail::chain(a, std::cos(a.value), -std::sin(a.value)); }
inline Dual6 tan(const Dual6& a) {
  const double t = std::tan(a.value);
  return detail::chain(a, t, 1.0 + t * t);
}
inline Dual6 exp(const Dual6& a) {
  const double e = std::exp(a.value);
  return detail::chain(a, e, e);
}
inline Dual6 log(const Dual6& a) { return detail::chain(a, std::log(a.value), 1.0 / a.value); }
inline Dual6 sqrt(const Dual6& a) {
  const double s = std::sqrt(a.value);
  return detail::chain(a, s, 0.5 / s);
}
inline Dual6 sinh(const Dual6& a) { return detail::chain(a, std::sinh(a.value), std::cosh(a.value)); }
inline Dual6 cosh(const Dual6& a) { return detail::chain(a, std::cosh(a.value), std::sinh(a.value)); }
inline Dual6 tanh(const Dual6& a) {
  const double t = std::tanh(a.value);
  return detail::chain(a, t, 1.0 - t * t);
}

/// a^b. A constant exponent uses the power rule, so negative bases with integer
/// exponents differentiate cleanly; a varying exponent goes through exp(b log a).
inline Dual6 pow(const Dual6& a, const Dual6& b) {
  const double v = std::pow(a.value, b.value);
  Dual6 r(v);
  if (b.is_constant()) {
    const double slope = b.value == 0.0 ? 0.0 : b.value * std::pow(a.value, b.value - 1.0);
    for (int i = 0; i < kDim; ++i) r.d[i] = slope * a.d[i];
    return r;
  }
  const double la = std::log(a.value);
  for (int i = 0; i < kDim; ++i) r.d[i] = v * (b.d[i] * la + b.value * a.d[i] / a.value);
  return r;
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual6& x) { return x.value; }

inline bool finite_all(double x) { return std::isfinite(x); }
inline bool finite_all(const Dual6& x) { return x.all_finite(); }

}  // namespace hspace
