#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "hspace/coords.hpp"
#include "hspace/error.hpp"

namespace hspace {

inline constexpr int kSymSize = kDim * (kDim + 1) / 2;  // 21

/// Position of (i, j) in packed upper-triangular storage, 0-based, either order.
constexpr int sym_index(int i, int j) {
  if (i > j) std::swap(i, j);
  return i * kDim - i * (i - 1) / 2 + (j - i);
}

/// Dense 6x6 matrix, row-major. Used for expanded symmetric tensors and for g^-1 a.
using Matrix6 = std::array<std::array<double, kDim>, kDim>;

inline Matrix6 identity_matrix() {
  Matrix6 m{};
  for (int i = 0; i < kDim; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix6 matmul(const Matrix6& a, const Matrix6& b) {
  Matrix6 r{};
  for (int i = 0; i < kDim; ++i)
    for (int k = 0; k < kDim; ++k) {
      const double aik = a[i][k];
      for (int j = 0; j < kDim; ++j) r[i][j] += aik * b[k][j];
    }
  return r;
}

/// Symmetric rank-2 tensor T_ij; only i <= j is stored.
class SymTensor {
 public:
  constexpr SymTensor() = default;

  static SymTensor identity() {
    SymTensor t;
    for (int i = 0; i < kDim; ++i) t(i, i) = 1.0;
    return t;
  }
  static SymTensor diagonal(const std::array<double, kDim>& d) {
    SymTensor t;
    for (int i = 0; i < kDim; ++i) t(i, i) = d[i];
    return t;
  }
  /// Symmetric part of a full matrix.
  static SymTensor from_matrix(const Matrix6& m) {
    SymTensor t;
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) t(i, j) = 0.5 * (m[i][j] + m[j][i]);
    return t;
  }

  constexpr double& operator()(int i, int j) { return v_[sym_index(i, j)]; }
  constexpr double operator()(int i, int j) const { return v_[sym_index(i, j)]; }

  const std::array<double, kSymSize>& packed() const { return v_; }
  std::array<double, kSymSize>& packed() { return v_; }

  Matrix6 to_matrix() const {
    Matrix6 m{};
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) m[i][j] = (*this)(i, j);
    return m;
  }

  SymTensor& operator+=(const SymTensor& o) {
    for (int k = 0; k < kSymSize; ++k) v_[k] += o.v_[k];
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    for (int k = 0; k < kSymSize; ++k) v_[k] -= o.v_[k];
    return *this;
  }
  SymTensor& operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
  }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(double s, SymTensor a) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  bool all_finite() const {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
  }

  friend bool operator==(const SymTensor&, const SymTensor&) = default;

 private:
  std::array<double, kSymSize> v_{};
};

/// T_ijk symmetric in (i, j) with a free third index: slice(k) holds T_..k.
class Tensor3 {
 public:
  constexpr double& operator()(int i, int j, int k) { return s_[k](i, j); }
  constexpr double operator()(int i, int j, int k) const { return s_[k](i, j); }

  SymTensor& slice(int k) { return s_[k]; }
  const SymTensor& slice(int k) const { return s_[k]; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& s : s_) m = std::max(m, s.max_abs());
    return m;
  }
  /// Sum of squares over all 126 stored components.
  double sum_squares() const {
    double acc = 0.0;
    for (const auto& s : s_)
      for (double x : s.packed()) acc += x * x;
    return acc;
  }
  bool all_finite() const {
    return std::all_of(s_.begin(), s_.end(), [](const SymTensor& s) { return s.all_finite(); });
  }

 private:
  std::array<SymTensor, kDim> s_{};
};

struct Signature {
  int plus = 0;
  int minus = 0;
  bool degenerate = false;

  friend bool operator==(const Signature&, const Signature&) = default;
};

namespace detail {

struct LuResult {
  Matrix6 lu{};
  std::array<int, kDim> perm{};
  int sign = 1;
  bool singular = false;  // an exactly zero pivot was met
};

// Doolittle LU with partial pivoting; PA = LU with unit-diagonal L stored below the diagonal.
inline LuResult lu_decompose(Matrix6 a) {
  LuResult r;
  for (int i = 0; i < kDim; ++i) r.perm[i] = i;
  for (int col = 0; col < kDim; ++col) {
    int piv = col;
    double best = std::abs(a[col][col]);
    for (int row = col + 1; row < kDim; ++row) {
      if (std::abs(a[row][col]) > best) {
        best = std::abs(a[row][col]);
        piv = row;
      }
    }
    if (best == 0.0) {
      r.singular = true;
      continue;
    }
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(r.perm[piv], r.perm[col]);
      r.sign = -r.sign;
    }
    for (int row = col + 1; row < kDim; ++row) {
      a[row][col] /= a[col][col];
      const double f = a[row][col];
      for (int k = col + 1; k < kDim; ++k) a[row][k] -= f * a[col][k];
    }
  }
  r.lu = a;
  return r;
}

inline double lu_det(const LuResult& r) {
  if (r.singular) return 0.0;
  double d = r.sign;
  for (int i = 0; i < kDim; ++i) d *= r.lu[i][i];
  return d;
}

}  // namespace detail

inline double det(const Matrix6& m) { return detail::lu_det(detail::lu_decompose(m)); }
inline double det(const SymTensor& t) { return det(t.to_matrix()); }

/// Inverse of a general 6x6 matrix; throws SingularError when |det| <= tol.
inline Matrix6 invert(const Matrix6& m, double tol) {
  const auto lu = detail::lu_decompose(m);
  const double d = detail::lu_det(lu);
  if (!(std::abs(d) > tol)) throw SingularError("matrix is singular (det = " + std::to_string(d) + ")", d);
  Matrix6 inv{};
  for (int col = 0; col < kDim; ++col) {
    std::array<double, kDim> x{};
    for (int i = 0; i < kDim; ++i) {
      double s = lu.perm[i] == col ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= lu.lu[i][k] * x[k];
      x[i] = s;
    }
    for (int i = kDim - 1; i >= 0; --i) {
      double s = x[i];
      for (int k = i + 1; k < kDim; ++k) s -= lu.lu[i][k] * x[k];
      x[i] = s / lu.lu[i][i];
    }
    for (int i = 0; i < kDim; ++i) inv[i][col] = x[i];
  }
  return inv;
}

inline SymTensor invert(const SymTensor& t, double tol) {
  return SymTensor::from_matrix(invert(t.to_matrix(), tol));
}

/// Eigenvalues of a symmetric tensor by cyclic Jacobi rotations, ascending.
inline std::array<double, kDim> sym_eigenvalues(const SymTensor& t) {
  Matrix6 a = t.to_matrix();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, scale = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) {
        scale += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    if (off <= 1e-30 * scale || off == 0.0) break;
    for (int p = 0; p < kDim - 1; ++p) {
      for (int q = p + 1; q < kDim; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double tn = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tn * tn + 1.0), s = tn * c;
        for (int k = 0; k < kDim; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < kDim; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, kDim> ev{};
  for (int i = 0; i < kDim; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Counts eigenvalues above tol and below -tol; anything in between marks the tensor degenerate.
inline Signature signature(const SymTensor& t, double tol) {
  Signature s;
  for (double ev : sym_eigenvalues(t)) {
    if (ev > tol)
      ++s.plus;
    else if (ev < -tol)
      ++s.minus;
    else
      s.degenerate = true;
  }
  return s;
}

/// T_ij u^i v^j.
inline double quad_form(const SymTensor& t, const Tangent& u, const Tangent& v) {
  double acc = 0.0;
  for (int i = 0; i < kDim; ++i) {
    acc += t(i, i) * u[i] * v[i];
    for (int j = i + 1; j < kDim; ++j) acc += t(i, j) * (u[i] * v[j] + u[j] * v[i]);
  }
  return acc;
}

}  // namespace hspace
