#pragma once

// Characteristic roots of the pencil (a, g) and their multiplicity pattern.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hspace/catalog.hpp"
#include "hspace/geometry.hpp"
#include "hspace/tensor.hpp"

namespace hspace {

struct RootCluster {
  double value;
  int multiplicity;
};

/// Sorted by value; multiplicities sum to 6.
using RootPattern = std::vector<RootCluster>;

class ComplexRootsError : public Error {
 public:
  ComplexRootsError(const std::string& what, double imag) : Error(what), imag_(imag) {}
  double imag() const { return imag_; }

 private:
  double imag_;
};

/// Eigenvalues of T^-1 S for symmetric S and invertible g-like T, ascending.
/// Imaginary parts above tol_imag * max(1, |root|) are an error; smaller ones are
/// Jordan-block splitting from rounding and are dropped.
inline std::array<double, kDim> pencil_roots(const SymTensor& S, const SymTensor& T, double tol_imag) {
  const Matrix6 m = matmul(metric_inverse(T), S.to_matrix());
  Eigen::Matrix<double, kDim, kDim> em;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) em(i, j) = m[i][j];
  const Eigen::EigenSolver<Eigen::Matrix<double, kDim, kDim>> es(em, false);
  if (es.info() != Eigen::Success) throw DomainError("eigenvalue iteration did not converge");
  std::array<double, kDim> roots{};
  for (int i = 0; i < kDim; ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > tol_imag * std::max(1.0, std::abs(z.real())))
      throw ComplexRootsError("complex characteristic root (imaginary part " + std::to_string(z.imag()) + ")",
                              z.imag());
    roots[i] = z.real();
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Roots of det(a - mu g) = 0.
inline std::array<double, kDim> char_roots(const FieldEval& fe, double tol_imag = 1e-6) {
  return pencil_roots(fe.a, fe.g, tol_imag);
}

/// Single-linkage clustering of sorted roots; the gap threshold is
/// cluster_tol * max(1, max |root|) and each cluster reports its mean.
inline RootPattern multiplicity_pattern(const std::array<double, kDim>& roots, double cluster_tol = 1e-6) {
  double scale = 1.0;
  for (double r : roots) scale = std::max(scale, std::abs(r));
  const double gap = cluster_tol * scale;
  RootPattern out;
  double sum = roots[0];
  int count = 1;
  for (int i = 1; i < kDim; ++i) {
    if (roots[i] - roots[i - 1] <= gap) {
      sum += roots[i];
      ++count;
    } else {
      out.push_back({sum / count, count});
      sum = roots[i];
      count = 1;
    }
  }
  out.push_back({sum / count, count});
  return out;
}

/// Pattern the family predicts at p (coinciding predicted roots are merged).
inline RootPattern expected_pattern(const HSpaceSpec& spec, const Point& p) {
  auto roots = family_roots(spec, p);
  std::sort(roots.begin(), roots.end(), [](const ExpectedRoot& a, const ExpectedRoot& b) { return a.value < b.value; });
  RootPattern out;
  for (const auto& r : roots) {
    if (!out.empty() && out.back().value == r.value)
      out.back().multiplicity += r.multiplicity;
    else
      out.push_back({r.value, r.multiplicity});
  }
  return out;
}

struct PencilPoint {
  Point at;
  RootPattern computed;
  RootPattern expected;
  bool match = false;
  double deviation = 0.0;        // max |root - expected value|, relative to max(1, |value|)
  double shift_deviation = 0.0;  // cluster means of (h, g) vs (a, g) + 2 phi
  std::string error;             // set when the roots could not be computed
};

struct PencilReport {
  std::vector<PencilPoint> points;
  bool all_match = true;
  double max_deviation = 0.0;
  double max_shift_deviation = 0.0;
};

inline bool same_multiplicities(const RootPattern& a, const RootPattern& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].multiplicity != b[k].multiplicity) return false;
  return true;
}

inline PencilPoint check_pencil_at(const HSpaceSpec& spec, const Point& p, double cluster_tol = 1e-6,
                                   double root_tol = 1e-6) {
  PencilPoint pp;
  pp.at = p;
  pp.expected = expected_pattern(spec, p);
  const FieldEval fe = eval_fields(spec, p);
  std::array<double, kDim> roots_a{}, roots_h{};
  try {
    roots_a = char_roots(fe);
    roots_h = pencil_roots(fe.h, fe.g, 1e-6);
  } catch (const ComplexRootsError& ex) {
    pp.error = ex.what();
    pp.deviation = std::abs(ex.imag());
    return pp;
  }
  pp.computed = multiplicity_pattern(roots_a, cluster_tol);
  if (!same_multiplicities(pp.computed, pp.expected)) {
    pp.deviation = INFINITY;
    return pp;
  }
  int idx = 0;
  for (const auto& cl : pp.expected)
    for (int m = 0; m < cl.multiplicity; ++m, ++idx)
      pp.deviation = std::max(pp.deviation, std::abs(roots_a[idx] - cl.value) / std::max(1.0, std::abs(cl.value)));
  pp.match = pp.deviation <= root_tol;
  const RootPattern shifted = multiplicity_pattern(roots_h, cluster_tol);
  if (same_multiplicities(shifted, pp.computed)) {
    for (std::size_t k = 0; k < shifted.size(); ++k)
      pp.shift_deviation =
          std::max(pp.shift_deviation, std::abs(shifted[k].value - (pp.computed[k].value + 2.0 * fe.phi)));
  } else {
    pp.shift_deviation = INFINITY;
  }
  return pp;
}

inline PencilReport check_pencil(const HSpaceSpec& spec, int n, std::uint64_t seed, double cluster_tol = 1e-6) {
  PencilReport rep;
  for (const auto& p : sample_chart(spec, n, seed)) {
    rep.points.push_back(check_pencil_at(spec, p, cluster_tol));
    const auto& pp = rep.points.back();
    rep.all_match = rep.all_match && pp.match;
    rep.max_deviation = std::max(rep.max_deviation, pp.deviation);
    rep.max_shift_deviation = std::max(rep.max_shift_deviation, pp.shift_deviation);
  }
  return rep;
}

}  // namespace hspace
