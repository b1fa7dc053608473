#pragma once

// Levi-Civita connection, covariant derivatives and the Eisenhart residual
//   E_ijk = h_ij;k - 2 g_ij phi_,k - g_ik phi_,j - g_jk phi_,i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hspace/catalog.hpp"
#include "hspace/tensor.hpp"

namespace hspace {

/// Gamma^k_ij, symmetric in (i, j).
class Gamma {
 public:
  double& operator()(int k, int i, int j) { return t_(i, j, k); }
  double operator()(int k, int i, int j) const { return t_(i, j, k); }
  double max_abs() const { return t_.max_abs(); }

 private:
  Tensor3 t_;
};

/// g^-1 with a scale-aware singularity threshold: |det g| must exceed
/// 1e-14 times the Hadamard bound (product of row norms).
inline Matrix6 metric_inverse(const SymTensor& g) {
  const Matrix6 m = g.to_matrix();
  double bound = 1.0;
  for (int i = 0; i < kDim; ++i) {
    double row = 0.0;
    for (int j = 0; j < kDim; ++j) row += m[i][j] * m[i][j];
    bound *= std::sqrt(row);
  }
  return invert(m, 1e-14 * bound);
}

inline Gamma christoffel(const FieldEval& fe) {
  const Matrix6 ginv = metric_inverse(fe.g);
  Gamma out;
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      std::array<double, kDim> lower{};  // Gamma_lij
      for (int l = 0; l < kDim; ++l) lower[l] = 0.5 * (fe.dg(l, j, i) + fe.dg(i, l, j) - fe.dg(i, j, l));
      for (int k = 0; k < kDim; ++k) {
        double acc = 0.0;
        for (int l = 0; l < kDim; ++l) acc += ginv[k][l] * lower[l];
        out(k, i, j) = acc;
      }
    }
  return out;
}

/// T_ij;k = d_k T_ij - Gamma^l_ki T_lj - Gamma^l_kj T_il.
inline Tensor3 cov_deriv(const SymTensor& T, const Tensor3& dT, const Gamma& gamma) {
  Tensor3 out;
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        double acc = dT(i, j, k);
        for (int l = 0; l < kDim; ++l) acc -= gamma(l, k, i) * T(l, j) + gamma(l, k, j) * T(i, l);
        out(i, j, k) = acc;
      }
  return out;
}

struct ResidualAt {
  Tensor3 E;
  double max_abs = 0.0;
};

/// Residual of the Eisenhart equation from already evaluated fields.
inline ResidualAt eisenhart_residual(const FieldEval& fe) {
  const Gamma gamma = christoffel(fe);
  ResidualAt r;
  r.E = cov_deriv(fe.h, fe.dh, gamma);
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j)
        r.E(i, j, k) -= 2.0 * fe.g(i, j) * fe.dphi[k] + fe.g(i, k) * fe.dphi[j] + fe.g(j, k) * fe.dphi[i];
  r.max_abs = r.E.max_abs();
  return r;
}

inline ResidualAt eisenhart_residual(const HSpaceSpec& spec, const Point& p) {
  return eisenhart_residual(eval_fields(spec, p));
}

struct EisenhartReport {
  std::string variant;
  int n_points = 0;
  std::vector<double> per_point;  // max-abs residual at each sample
  double max = 0.0;
  double rms = 0.0;  // over all 126 components at all points
  int worst_index = -1;
  std::optional<Point> worst_point;
};

inline EisenhartReport residual_report(const HSpaceSpec& spec, const std::vector<Point>& pts) {
  EisenhartReport rep;
  rep.variant = std::string(spec.effective_variant());
  rep.n_points = static_cast<int>(pts.size());
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    const ResidualAt r = eisenhart_residual(spec, pts[n]);
    rep.per_point.push_back(r.max_abs);
    sum_sq += r.E.sum_squares();
    if (rep.worst_index < 0 || r.max_abs > rep.max) {  // strict: lowest index wins ties
      rep.max = r.max_abs;
      rep.worst_index = static_cast<int>(n);
      rep.worst_point = pts[n];
    }
  }
  if (!pts.empty()) rep.rms = std::sqrt(sum_sq / (126.0 * static_cast<double>(pts.size())));
  return rep;
}

enum class VariantVerdict {
  Unique,      // exactly one variant passes
  NonePass,    // no variant passes
  Ambiguous,   // several pass while the fields vary
  Degenerate,  // several pass, but all fields are constant so conventions are indistinguishable
};

inline std::string_view verdict_name(VariantVerdict v) {
  switch (v) {
    case VariantVerdict::Unique: return "unique";
    case VariantVerdict::NonePass: return "none";
    case VariantVerdict::Ambiguous: return "ambiguous";
    case VariantVerdict::Degenerate: return "degenerate";
  }
  return "?";
}

struct VariantReport {
  std::vector<EisenhartReport> variants;
  std::vector<bool> pass;
  double pass_tol = 1e-7;
  VariantVerdict verdict = VariantVerdict::NonePass;
  std::optional<std::string> passer;  // set when verdict is Unique
  std::string note;
};

/// Residual over n sampled points for every convention variant of the spec.
inline VariantReport discriminate_variants(const HSpaceSpec& spec, int n, std::uint64_t seed,
                                           double pass_tol = 1e-7) {
  VariantReport rep;
  rep.pass_tol = pass_tol;
  const std::vector<Point> pts = sample_chart(spec, n, seed);
  for (const auto& v : list_variants(spec)) {
    rep.variants.push_back(residual_report(v, pts));
    rep.pass.push_back(rep.variants.back().max <= pass_tol);
  }
  const auto n_pass = std::count(rep.pass.begin(), rep.pass.end(), true);
  if (n_pass == 1) {
    rep.verdict = VariantVerdict::Unique;
    for (std::size_t k = 0; k < rep.pass.size(); ++k)
      if (rep.pass[k]) rep.passer = rep.variants[k].variant;
    if (rep.variants.size() == 1) rep.note = "single convention";
  } else if (n_pass == 0) {
    rep.verdict = VariantVerdict::NonePass;
    rep.note = "no variant satisfies the Eisenhart equation";
  } else {
    bool constant = true;
    for (const auto& v : list_variants(spec))
      for (const auto& p : pts) {
        const FieldEval fe = eval_fields(v, p);
        if (fe.dg.max_abs() != 0.0 || fe.dh.max_abs() != 0.0) constant = false;
      }
    if (constant) {
      rep.verdict = VariantVerdict::Degenerate;
      rep.note = "all variants pass (degenerate discriminator: constant fields)";
    } else {
      rep.verdict = VariantVerdict::Ambiguous;
      rep.note = "several variants pass with non-constant fields";
    }
  }
  return rep;
}

}  // namespace hspace
