#pragma once

// Shared helpers for the unit suites and the acceptance runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sys/wait.h>
#include <optional>
#include <string>
#include <vector>

#include "hspace/hspace.hpp"

namespace hspace::testkit {

inline std::string spec_path(const std::string& rel) { return std::string(HSPACE_SPEC_DIR) + "/" + rel; }

inline HSpaceSpec load(const std::string& rel) { return load_spec(spec_path(rel)); }

/// Golden specs with non-constant function slots, one per type, sorted by file name.
inline std::vector<HSpaceSpec> golden_specs() {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(spec_path("golden")))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<HSpaceSpec> out;
  for (const auto& f : files) out.push_back(load_spec(f.string()));
  return out;
}

/// Golden specs plus S1, S2, S3.
inline std::vector<HSpaceSpec> all_reference_specs() {
  auto out = golden_specs();
  for (const char* s : {"S1.json", "S2.json", "S3.json"}) out.push_back(load(s));
  return out;
}

inline bool is_constant_phi_type(HSpaceType t) {
  return t == HSpaceType::Seg_g2211 || t == HSpaceType::Seg_g22_g11 || t == HSpaceType::Seg_g21_g21;
}

/// Copy of the spec with a_11 (hence h_11) shifted by 1e-3 x1.
inline HSpaceSpec perturbed_h11(HSpaceSpec s) {
  s.perturb = Perturbation{0, 0, ExprAst::parse("0.001*x1")};
  return s;
}

/// Random expression trees of bounded depth over x1..x6. Literals are nonnegative
/// since the parser only yields negation as a Neg node.
class RandomExpr {
 public:
  explicit RandomExpr(std::uint64_t seed) : rng_(seed) {}

  ExprAst tree(int depth) {
    using K = ExprAst::Kind;
    if (depth <= 1 || rng_.uniform() < 0.25) return leaf();
    const double r = rng_.uniform();
    if (r < 0.10) return ExprAst::unary(K::Neg, tree(depth - 1));
    if (r < 0.25) return ExprAst::binary(K::Add, tree(depth - 1), tree(depth - 1));
    if (r < 0.38) return ExprAst::binary(K::Sub, tree(depth - 1), tree(depth - 1));
    if (r < 0.55) return ExprAst::binary(K::Mul, tree(depth - 1), tree(depth - 1));
    if (r < 0.65) return ExprAst::binary(K::Div, tree(depth - 1), tree(depth - 1));
    if (r < 0.75) {
      const double e = static_cast<double>(1 + static_cast<int>(rng_.uniform() * 3));
      return ExprAst::binary(K::Pow, tree(depth - 1), ExprAst::literal(e));
    }
    static constexpr std::array<Func, 9> funcs{Func::Sin, Func::Cos,  Func::Tan,  Func::Exp, Func::Log,
                                               Func::Sqrt, Func::Sinh, Func::Cosh, Func::Tanh};
    return ExprAst::call(funcs[static_cast<std::size_t>(rng_.uniform() * funcs.size())], tree(depth - 1));
  }

  Point point(double lo, double hi) {
    Point p;
    for (auto& x : p) x = rng_.uniform(lo, hi);
    return p;
  }

  double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }

 private:
  ExprAst leaf() {
    if (rng_.uniform() < 0.6) return ExprAst::variable(static_cast<int>(rng_.uniform() * kDim));
    return ExprAst::literal(std::round(rng_.uniform(0.0, 3.0) * 1000.0) / 1000.0);
  }

  SplitMix64 rng_;
};

/// Worst relative AD-vs-FD disagreement, |dual - fd| / max(1, |fd|), at p.
/// Returns nullopt when p or a stencil point is outside the expression's domain.
inline std::optional<double> ad_fd_gap(const ExprAst& e, const Point& p) {
  Dual6 d;
  try {
    d = e.eval_dual(p);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  double worst = 0.0;
  for (int k = 0; k < kDim; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
    Point pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    double fp, fm;
    try {
      fp = e.eval(pp);
      fm = e.eval(pm);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    const double fd = (fp - fm) / (pp[k] - pm[k]);
    worst = std::max(worst, std::abs(d.d[k] - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

/// Expression and point acceptable for AD-vs-FD comparison: finite, moderate
/// magnitudes, and away from domain boundaries (FD stencil stays valid).
struct AdFdCase {
  ExprAst expr;
  Point at;
  double gap;
};

/// n expressions, each checked at `points` random points in [-1, 1]^6. Points where
/// the value or a partial is large (|.| > 1e3) or near a domain edge are redrawn.
inline std::vector<AdFdCase> ad_fd_cases(int n, int points, std::uint64_t seed) {
  RandomExpr gen(seed);
  std::vector<AdFdCase> out;
  int accepted_exprs = 0;
  while (accepted_exprs < n) {
    const ExprAst e = gen.tree(6);
    std::vector<AdFdCase> local;
    for (int tries = 0; tries < 200 && static_cast<int>(local.size()) < points; ++tries) {
      const Point p = gen.point(-1.0, 1.0);
      Dual6 d;
      try {
        d = e.eval_dual(p);
      } catch (const DomainError&) {
        continue;
      }
      bool tame = std::abs(d.value) <= 1e3;
      for (double g : d.d) tame = tame && std::abs(g) <= 1e3;
      if (!tame) continue;
      const auto gap = ad_fd_gap(e, p);
      if (!gap) continue;
      local.push_back({e, p, *gap});
    }
    if (static_cast<int>(local.size()) < points) continue;
    out.insert(out.end(), local.begin(), local.end());
    ++accepted_exprs;
  }
  return out;
}

/// Determinant by Laplace expansion along the first row (independent of LU).
inline double cofactor_det(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  double acc = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    acc += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * cofactor_det(minor);
  }
  return acc;
}

inline double cofactor_det(const SymTensor& t) {
  std::vector<std::vector<double>> m(kDim, std::vector<double>(kDim));
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) m[i][j] = t(i, j);
  return cofactor_det(m);
}

/// Max over metric components and coordinates of |dg_dual - dg_fd| / max(1, |dg_fd|).
inline double metric_ad_fd_gap(const HSpaceSpec& spec, const Point& p) {
  const FieldEval ad = eval_fields(spec, p);
  const FieldEval fd = eval_fields_fd(spec, p);
  double worst = 0.0;
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        worst = std::max(worst, std::abs(ad.dg(i, j, k) - fd.dg(i, j, k)) / std::max(1.0, std::abs(fd.dg(i, j, k))));
        worst = std::max(worst, std::abs(ad.dh(i, j, k) - fd.dh(i, j, k)) / std::max(1.0, std::abs(fd.dh(i, j, k))));
      }
  return worst;
}

/// max |nabla_k g_ij| from the Levi-Civita connection.
inline double metric_compatibility(const FieldEval& fe) {
  return cov_deriv(fe.g, fe.dg, christoffel(fe)).max_abs();
}

/// max |g g^-1 - I|.
inline double inverse_defect(const SymTensor& g) {
  const Matrix6 prod = matmul(g.to_matrix(), metric_inverse(g));
  double worst = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) worst = std::max(worst, std::abs(prod[i][j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

/// Measured RK4 order from successive step halvings against a tight adaptive reference.
inline double rk4_order(const HSpaceSpec& spec, const GeodesicState& s0) {
  AdaptiveOptions tight;
  tight.abs_tol = 1e-14;
  tight.rel_tol = 1e-14;
  tight.max_steps = 1000000;
  const Trajectory ref = integrate_adaptive(spec, s0, 1.0, tight);
  auto err = [&](double h) {
    const Trajectory t = integrate_rk4(spec, s0, 1.0, h);
    double e = 0.0;
    for (int i = 0; i < kDim; ++i) {
      e = std::max(e, std::abs(t.samples.back().x[i] - ref.samples.back().x[i]));
      e = std::max(e, std::abs(t.samples.back().v[i] - ref.samples.back().v[i]));
    }
    return e;
  };
  const double e1 = err(0.05), e2 = err(0.025);
  return std::log2(e1 / e2);
}

/// Runs a shell command and returns (exit code, stdout).
inline std::pair<int, std::string> run_tool(const std::string& args) {
  const std::string cmd = std::string(HSPACE_TOOL) + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace hspace::testkit
