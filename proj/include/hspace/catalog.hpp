#pragma once

// The eight families of six-dimensional h-spaces with Segre characteristic
// [(21..1)(21..1)..(1..1)]: metric g, tensor a, scalar phi and h = a + 2 phi g
// at any chart point, plus first derivatives from dual-number evaluation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hspace/coords.hpp"
#include "hspace/dual.hpp"
#include "hspace/error.hpp"
#include "hspace/expr.hpp"
#include "hspace/sampling.hpp"
#include "hspace/tensor.hpp"

namespace hspace {

enum class HSpaceType {
  Seg22_g11,    // [22(11)]
  Seg2_g21_1,   // [2(21)1]
  Seg2_g211,    // [2(211)]
  Seg_g22_11,   // [(22)11]
  Seg_g221_1,   // [(221)1]
  Seg_g2211,    // [(2211)]
  Seg_g22_g11,  // [(22)(11)]
  Seg_g21_g21,  // [(21)(21)]
};

inline constexpr std::array<HSpaceType, 8> kAllTypes{
    HSpaceType::Seg22_g11,  HSpaceType::Seg2_g21_1, HSpaceType::Seg2_g211,   HSpaceType::Seg_g22_11,
    HSpaceType::Seg_g221_1, HSpaceType::Seg_g2211,  HSpaceType::Seg_g22_g11, HSpaceType::Seg_g21_g21};

/// One free-function slot and the coordinates it may depend on (bit k = x^(k+1)).
struct SlotInfo {
  std::string_view name;
  unsigned allowed_mask;
};

struct TypeInfo {
  HSpaceType type;
  std::string_view tag;
  std::vector<std::string_view> signs;      // required sign names
  std::vector<std::string_view> constants;  // required constant names
  std::vector<SlotInfo> slots;
  std::vector<std::string_view> variants;  // first entry is the default
  bool constant_phi;                       // phi is constant on the chart
};

namespace detail {
constexpr unsigned vars(std::initializer_list<int> one_based) {
  unsigned m = 0;
  for (int v : one_based) m |= 1u << (v - 1);
  return m;
}
}  // namespace detail

inline const std::vector<TypeInfo>& type_table() {
  using detail::vars;
  static const std::vector<TypeInfo> table{
      {HSpaceType::Seg22_g11,
       "22(11)",
       {"e2", "e4"},
       {"lambda", "c", "a", "eps", "eps_tilde"},
       {{"theta", vars({2})}, {"omega", vars({4})}, {"F55", vars({5, 6})}, {"F56", vars({5, 6})},
        {"F66", vars({5, 6})}},
       {"literal", "doubled"},
       false},
      {HSpaceType::Seg2_g21_1,
       "2(21)1",
       {"e2", "e4", "e5", "e6"},
       {"lambda", "c", "eps"},
       {{"theta", vars({2})}, {"omega", vars({4, 5})}, {"f6", vars({6})}},
       {"as-written", "a-scaled"},
       false},
      {HSpaceType::Seg2_g211,
       "2(211)",
       {"e2", "e4"},
       {"lambda", "c", "eps"},
       {{"theta", vars({2})},
        {"omega", vars({4, 5, 6})},
        {"g55", vars({4, 5, 6})},
        {"g56", vars({4, 5, 6})},
        {"g66", vars({4, 5, 6})}},
       {"as-written", "a-scaled"},
       false},
      {HSpaceType::Seg_g22_11,
       "(22)11",
       {"e2", "e4", "e5", "e6"},
       {"lambda", "c"},
       {{"beta12", vars({2, 4})},
        {"beta34", vars({2, 4})},
        {"theta1", vars({2, 4})},
        {"theta2", vars({2, 4})},
        {"f5", vars({5})},
        {"f6", vars({6})}},
       {"standard"},
       false},
      {HSpaceType::Seg_g221_1,
       "(221)1",
       {"e2", "e4", "e5", "e6"},
       {"lambda", "c"},
       {{"beta12", vars({2, 4, 5})},
        {"beta34", vars({2, 4, 5})},
        {"theta1", vars({2, 4, 5})},
        {"theta2", vars({2, 4, 5})},
        {"theta3", vars({2, 4, 5})},
        {"g55", vars({2, 4, 5})},
        {"f6", vars({6})}},
       {"f6_lam+1", "f6_lam", "const_lam+1", "const_lam"},
       false},
      {HSpaceType::Seg_g2211,
       "(2211)",
       {"e2"},
       {"lambda", "c"},
       {{"theta", vars({2, 4, 5, 6})},
        {"g12", vars({2, 4, 5, 6})},
        {"g34", vars({2, 4, 5, 6})},
        {"g55", vars({2, 4, 5, 6})},
        {"g56", vars({2, 4, 5, 6})},
        {"g66", vars({2, 4, 5, 6})}},
       {"standard"},
       true},
      {HSpaceType::Seg_g22_g11,
       "(22)(11)",
       {"e2", "e4"},
       {"lambda1", "lambda2", "c"},
       {{"theta", vars({2, 4})},
        {"omega", vars({2, 4})},
        {"g55", vars({5, 6})},
        {"g56", vars({5, 6})},
        {"g66", vars({5, 6})}},
       {"as-written", "unscaled"},
       true},
      {HSpaceType::Seg_g21_g21,
       "(21)(21)",
       {"e2", "e3", "e5", "e6"},
       {"lambda1", "lambda2", "c"},
       {{"theta", vars({2, 3})}, {"omega", vars({5, 6})}},
       {"standard"},
       true},
  };
  return table;
}

inline const TypeInfo& type_info(HSpaceType t) {
  for (const auto& info : type_table())
    if (info.type == t) return info;
  throw SpecError("unknown h-space type");
}

inline std::string_view type_tag(HSpaceType t) { return type_info(t).tag; }

inline std::optional<HSpaceType> type_from_tag(std::string_view tag) {
  for (const auto& info : type_table())
    if (info.tag == tag) return info.type;
  return std::nullopt;
}

struct ChartBox {
  Point lo;
  Point hi;
  double margin = 0.05;  // delta_sing

  bool contains(const Point& p) const {
    for (int i = 0; i < kDim; ++i)
      if (!(p[i] >= lo[i] && p[i] <= hi[i])) return false;
    return true;
  }
};

/// Test hook: an expression added to a_ij (and therefore h_ij) for one component.
struct Perturbation {
  int i = 0;  // 0-based
  int j = 0;
  ExprAst expr;
};

/// A fully parameterized member of one of the eight families.
struct HSpaceSpec {
  HSpaceType type = HSpaceType::Seg22_g11;
  std::map<std::string, int> signs;
  std::map<std::string, double> constants;
  std::map<std::string, ExprAst> functions;
  ChartBox chart;
  std::string variant;  // empty selects the type's default convention
  std::optional<Perturbation> perturb;
  std::string name;  // label for reports

  const TypeInfo& info() const { return type_info(type); }
  std::string_view effective_variant() const {
    return variant.empty() ? info().variants.front() : std::string_view(variant);
  }
  double constant(std::string_view key) const {
    auto it = constants.find(std::string(key));
    if (it == constants.end()) throw SpecError("missing constant '" + std::string(key) + "'");
    return it->second;
  }
  double sign(std::string_view key) const {
    auto it = signs.find(std::string(key));
    if (it == signs.end()) throw SpecError("missing sign '" + std::string(key) + "'");
    return it->second;
  }
  const ExprAst& function(std::string_view key) const {
    auto it = functions.find(std::string(key));
    if (it == functions.end()) throw SpecError("missing function slot '" + std::string(key) + "'");
    return it->second;
  }
};

/// g, a, h, phi and their coordinate derivatives at one point.
struct FieldEval {
  Point at;
  SymTensor g;
  Tensor3 dg;  // dg(i,j,k) = d_k g_ij
  SymTensor a;
  SymTensor h;
  Tensor3 dh;
  double phi = 0.0;
  std::array<double, kDim> dphi{};
};

/// A quantity that must stay away from zero on the chart (e.g. f2 - lambda).
struct Separation {
  std::string_view name;
  double value;
};

/// Characteristic root value and its multiplicity as predicted by the family.
struct ExpectedRoot {
  double value;
  int multiplicity;
};

namespace detail {

struct DualSym {
  std::array<Dual6, kSymSize> v{};
  Dual6& operator()(int i, int j) { return v[sym_index(i, j)]; }
  const Dual6& operator()(int i, int j) const { return v[sym_index(i, j)]; }
};

// Accumulates a quadratic form written as sum c dx^i dx^j (1-based indices).
// A written cross term c dx^i dx^j contributes c/2 to g_ij and g_ji.
class LineElement {
 public:
  void term(int i, int j, const Dual6& c) {
    if (i == j)
      m_(i - 1, i - 1) += c;
    else
      m_(i - 1, j - 1) += 0.5 * c;
  }
  const DualSym& tensor() const { return m_; }
  Dual6 operator()(int i, int j) const { return m_(i - 1, j - 1); }

 private:
  DualSym m_;
};

struct FamilyFields {
  DualSym g;
  DualSym a;
  Dual6 phi;
  std::vector<std::pair<std::string_view, Dual6>> separations;
  std::vector<std::pair<Dual6, int>> roots;
};

// a_ij = k g_ij on the block of 1-based indices `idx`.
inline void scaled_block(DualSym& a, const DualSym& g, std::initializer_list<int> idx, const Dual6& k) {
  for (int i : idx)
    for (int j : idx)
      if (i <= j) a(i - 1, j - 1) = k * g(i - 1, j - 1);
}

inline Dual6 sq(const Dual6& x) { return x * x; }

inline FamilyFields build_fields(const HSpaceSpec& s, std::string_view variant, const Point& p) {
  std::array<Dual6, kDim> x;
  for (int i = 0; i < kDim; ++i) x[i] = Dual6::variable(i, p[i]);
  auto fn = [&](std::string_view slot) { return s.function(slot).eval_dual(p); };
  auto k = [&](std::string_view name) { return Dual6(s.constant(name)); };
  auto e = [&](std::string_view name) { return Dual6(s.sign(name)); };

  FamilyFields out;
  LineElement g;
  DualSym& a = out.a;

  switch (s.type) {
    case HSpaceType::Seg22_g11: {
      const Dual6 eps = k("eps"), et = k("eps_tilde"), lam = k("lambda"), c = k("c");
      const Dual6 A = eps * x[0] + fn("theta");
      const Dual6 At = et * x[2] + fn("omega");
      const Dual6 f2 = eps * x[1];
      const Dual6 f4 = et * x[3] + k("a");
      const Dual6 K = sq(f2 - lam) * sq(f4 - lam);
      const double cross = variant == "doubled" ? 2.0 : 1.0;
      g.term(1, 2, cross * e("e2") * A * sq(f4 - f2));
      g.term(2, 2, -e("e2") * sq(A) * (f4 - f2));
      g.term(3, 4, cross * e("e4") * At * sq(f2 - f4));
      g.term(4, 4, -e("e4") * sq(At) * (f2 - f4));
      g.term(5, 5, fn("F55") * K);
      g.term(5, 6, 2.0 * fn("F56") * K);
      g.term(6, 6, fn("F66") * K);
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2}, f2);
      scaled_block(a, out.g, {3, 4}, f4);
      scaled_block(a, out.g, {5, 6}, lam);
      a(1, 1) += A * out.g(0, 1);
      a(3, 3) += At * out.g(2, 3);
      out.phi = 0.5 * (2.0 * f2 + 2.0 * f4 + c);
      out.separations = {{"f2-f4", f2 - f4}, {"f2-lambda", f2 - lam}, {"f4-lambda", f4 - lam}, {"A", A}, {"A~", At}};
      out.roots = {{f2, 2}, {f4, 2}, {lam, 2}};
      break;
    }
    case HSpaceType::Seg2_g21_1: {
      const Dual6 eps = k("eps"), lam = k("lambda"), c = k("c");
      const Dual6 A = eps * x[0] + fn("theta");
      const Dual6 f2 = eps * x[1];
      const Dual6 f6 = fn("f6");
      const Dual6 P = (f6 - lam) * sq(f2 - lam);
      const Dual6 Sigma = 2.0 / (f2 - lam) + 1.0 / (f6 - lam);
      g.term(1, 2, 2.0 * e("e2") * (f6 - f2) * A);
      g.term(2, 2, -e("e2") * sq(A));
      g.term(3, 4, 2.0 * e("e4") * P);
      g.term(4, 4, -e("e4") * P * (Sigma + fn("omega")));
      g.term(5, 5, e("e5") * P);
      g.term(6, 6, e("e6") * sq(f2 - f6));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2}, f2);
      scaled_block(a, out.g, {3, 4, 5}, lam);
      a(5, 5) = f6 * out.g(5, 5);
      a(1, 1) += variant == "a-scaled" ? A * out.g(0, 1) : out.g(0, 1);
      a(3, 3) += out.g(2, 3);
      out.phi = 0.5 * (2.0 * f2 + f6 + c);
      out.separations = {{"f2-f6", f2 - f6}, {"f2-lambda", f2 - lam}, {"f6-lambda", f6 - lam}, {"A", A}};
      out.roots = {{f2, 2}, {lam, 3}, {f6, 1}};
      break;
    }
    case HSpaceType::Seg2_g211: {
      const Dual6 eps = k("eps"), lam = k("lambda"), c = k("c");
      const Dual6 A = eps * x[0] + fn("theta");
      const Dual6 f2 = eps * x[1];
      const Dual6 P = sq(f2 - lam);
      const Dual6 Sigma = 2.0 / (f2 - lam);
      g.term(1, 2, 2.0 * e("e2") * A);
      g.term(3, 4, 2.0 * e("e4") * P);
      g.term(4, 4, -e("e4") * P * (Sigma + fn("omega")));
      g.term(5, 5, P * fn("g55"));
      g.term(5, 6, 2.0 * P * fn("g56"));
      g.term(6, 6, P * fn("g66"));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2}, f2);
      scaled_block(a, out.g, {3, 4, 5, 6}, lam);
      a(1, 1) += variant == "a-scaled" ? A * out.g(0, 1) : out.g(0, 1);
      a(3, 3) += out.g(2, 3);
      out.phi = 0.5 * (2.0 * f2 + c);
      out.separations = {{"f2-lambda", f2 - lam}, {"A", A}};
      out.roots = {{f2, 2}, {lam, 4}};
      break;
    }
    case HSpaceType::Seg_g22_11: {
      const Dual6 lam = k("lambda"), c = k("c");
      const Dual6 f5 = fn("f5"), f6 = fn("f6");
      const Dual6 Pi = (f5 - lam) * (f6 - lam);
      const Dual6 Sigma1 = 1.0 / (f5 - lam) + 1.0 / (f6 - lam);
      g.term(1, 2, 2.0 * Pi * fn("beta12"));
      g.term(2, 2, -e("e2") * Pi * (Sigma1 + fn("theta1")));
      g.term(3, 4, 2.0 * Pi * fn("beta34"));
      g.term(4, 4, -e("e4") * Pi * (Sigma1 + fn("theta2")));
      g.term(5, 5, e("e5") * (f6 - f5));
      g.term(6, 6, e("e6") * (f5 - f6));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2, 3, 4}, lam);
      a(1, 1) += out.g(0, 1);
      a(3, 3) += out.g(2, 3);
      a(4, 4) = f5 * out.g(4, 4);
      a(5, 5) = f6 * out.g(5, 5);
      out.phi = 0.5 * (f5 + f6 + c);
      out.separations = {{"f5-f6", f5 - f6}, {"f5-lambda", f5 - lam}, {"f6-lambda", f6 - lam}};
      out.roots = {{lam, 4}, {f5, 1}, {f6, 1}};
      break;
    }
    case HSpaceType::Seg_g221_1: {
      const Dual6 lam = k("lambda"), c = k("c");
      const Dual6 f6 = fn("f6");
      const Dual6 Pi = f6 - lam;
      const Dual6 Sigma1 = 1.0 / (f6 - lam);
      const bool f_is_f6 = variant.starts_with("f6");
      const bool g_coef_plus_one = variant.ends_with("lam+1");
      // f - lambda inside G: either f6 - lambda or a constant absorbed into theta3 and g55.
      const Dual6 fm = f_is_f6 ? f6 - lam : Dual6(1.0);
      g.term(1, 2, 2.0 * Pi * fn("beta12"));
      g.term(2, 2, -e("e2") * Pi * (Sigma1 + fn("theta1")));
      g.term(3, 4, 2.0 * Pi * fn("beta34"));
      g.term(4, 4, -e("e4") * Pi * (Sigma1 + fn("theta2")));
      g.term(4, 5, Pi * 2.0 * e("e5") * (1.0 + fn("theta3") * fm));
      g.term(5, 5, Pi * fm * fn("g55"));
      g.term(6, 6, Pi * e("e6"));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2, 3, 4, 5}, lam);
      a(1, 1) += out.g(0, 1);
      a(3, 3) += out.g(2, 3);
      a(5, 5) = f6 * out.g(5, 5);
      if (g_coef_plus_one) {
        a(3, 4) += out.g(3, 4);
        a(4, 4) += out.g(4, 4);
      }
      out.phi = 0.5 * (f6 + c);
      out.separations = {{"f6-lambda", f6 - lam}};
      out.roots = {{lam, 5}, {f6, 1}};
      break;
    }
    case HSpaceType::Seg_g2211: {
      const Dual6 lam = k("lambda"), c = k("c");
      g.term(1, 2, 2.0 * fn("g12"));
      g.term(2, 2, -e("e2") * fn("theta"));
      g.term(3, 4, 2.0 * fn("g34"));
      g.term(5, 5, fn("g55"));
      g.term(5, 6, 2.0 * fn("g56"));
      g.term(6, 6, fn("g66"));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2, 3, 4, 5, 6}, lam);
      a(1, 1) += out.g(0, 1);
      out.phi = 0.5 * c;
      out.roots = {{lam, 6}};
      break;
    }
    case HSpaceType::Seg_g22_g11: {
      const Dual6 l1 = k("lambda1"), l2 = k("lambda2"), c = k("c");
      g.term(1, 2, 2.0 * e("e2"));
      g.term(2, 2, -e("e2") * fn("theta"));
      g.term(3, 4, 2.0 * e("e4"));
      g.term(4, 4, -e("e4") * fn("omega"));
      g.term(5, 5, fn("g55"));
      g.term(5, 6, 2.0 * fn("g56"));
      g.term(6, 6, fn("g66"));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2, 3, 4}, l1);
      scaled_block(a, out.g, {5, 6}, l2);
      const Dual6 nil = variant == "unscaled" ? Dual6(1.0) : l1;
      a(1, 1) += nil * e("e2");
      a(3, 3) += nil * e("e4");
      out.phi = 0.5 * c;
      out.roots = {{l1, 4}, {l2, 2}};
      break;
    }
    case HSpaceType::Seg_g21_g21: {
      const Dual6 l1 = k("lambda1"), l2 = k("lambda2"), c = k("c");
      g.term(1, 2, 2.0 * e("e2"));
      g.term(2, 2, -e("e2") * fn("theta"));
      g.term(3, 3, e("e3"));
      g.term(4, 5, 2.0 * e("e5"));
      g.term(5, 5, -e("e5") * fn("omega"));
      g.term(6, 6, e("e6"));
      out.g = g.tensor();
      scaled_block(a, out.g, {1, 2, 3}, l1);
      scaled_block(a, out.g, {4, 5, 6}, l2);
      a(1, 1) += e("e2");
      a(4, 4) += e("e5");
      out.phi = 0.5 * c;
      out.roots = {{l1, 3}, {l2, 3}};
      break;
    }
  }

  if (s.perturb) {
    const Dual6 dp = s.perturb->expr.eval_dual(p);
    a(s.perturb->i, s.perturb->j) += dp;
  }
  return out;
}

inline bool dual_sym_finite(const DualSym& m) {
  return std::all_of(m.v.begin(), m.v.end(), [](const Dual6& d) { return d.all_finite(); });
}

}  // namespace detail

/// Separation quantities of the spec's family at p (values only).
inline std::vector<Separation> separations(const HSpaceSpec& spec, const Point& p) {
  const auto f = detail::build_fields(spec, spec.effective_variant(), p);
  std::vector<Separation> out;
  for (const auto& [name, v] : f.separations) out.push_back({name, v.value});
  return out;
}

/// First separation quantity with |value| < threshold, if any.
inline std::optional<Separation> violated_separation(const HSpaceSpec& spec, const Point& p, double threshold) {
  for (const auto& s : separations(spec, p))
    if (!(std::abs(s.value) >= threshold)) return s;
  return std::nullopt;
}

/// Fields without the singular-locus guard. Integrator stages use this so they may
/// probe slightly outside the admissible region.
inline FieldEval eval_fields_unguarded(const HSpaceSpec& spec, const Point& p) {
  const auto f = detail::build_fields(spec, spec.effective_variant(), p);
  if (!detail::dual_sym_finite(f.g) || !detail::dual_sym_finite(f.a) || !f.phi.all_finite())
    throw DomainError("non-finite metric data at point");
  FieldEval fe;
  fe.at = p;
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      const Dual6& gij = f.g(i, j);
      const Dual6& aij = f.a(i, j);
      const Dual6 hij = aij + 2.0 * f.phi * gij;
      fe.g(i, j) = gij.value;
      fe.a(i, j) = aij.value;
      fe.h(i, j) = hij.value;
      for (int k = 0; k < kDim; ++k) {
        fe.dg(i, j, k) = gij.d[k];
        fe.dh(i, j, k) = hij.d[k];
      }
    }
  }
  fe.phi = f.phi.value;
  fe.dphi = f.phi.d;
  return fe;
}

/// Fields at p. Throws SingularLocusError when a separation quantity is within margin/2 of zero.
inline FieldEval eval_fields(const HSpaceSpec& spec, const Point& p) {
  if (auto bad = violated_separation(spec, p, 0.5 * spec.chart.margin))
    throw SingularLocusError("point is within margin/2 of the singular locus " + std::string(bad->name) +
                             " = 0 (value " + std::to_string(bad->value) + ")");
  return eval_fields_unguarded(spec, p);
}

/// Same fields with derivatives from central differences (step = rel_step * max(1, |x^k|)).
/// Cross-check path for the dual-number derivatives.
inline FieldEval eval_fields_fd(const HSpaceSpec& spec, const Point& p, double rel_step = 1e-6) {
  FieldEval fe = eval_fields(spec, p);
  for (int k = 0; k < kDim; ++k) {
    const double step = rel_step * std::max(1.0, std::abs(p[k]));
    Point pp = p, pm = p;
    pp[k] += step;
    pm[k] -= step;
    const FieldEval ep = eval_fields_unguarded(spec, pp);
    const FieldEval em = eval_fields_unguarded(spec, pm);
    const double inv = 1.0 / (pp[k] - pm[k]);
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        fe.dg(i, j, k) = (ep.g(i, j) - em.g(i, j)) * inv;
        fe.dh(i, j, k) = (ep.h(i, j) - em.h(i, j)) * inv;
      }
    fe.dphi[k] = (ep.phi - em.phi) * inv;
  }
  return fe;
}

/// Characteristic roots of (a, g) predicted by the family at p, with multiplicities.
inline std::vector<ExpectedRoot> family_roots(const HSpaceSpec& spec, const Point& p) {
  const auto f = detail::build_fields(spec, spec.effective_variant(), p);
  std::vector<ExpectedRoot> out;
  for (const auto& [v, m] : f.roots) out.push_back({v.value, m});
  return out;
}

/// Alternate-convention copies of the spec; the first entry uses the type's default.
inline std::vector<HSpaceSpec> list_variants(const HSpaceSpec& spec) {
  std::vector<HSpaceSpec> out;
  for (auto v : spec.info().variants) {
    HSpaceSpec copy = spec;
    copy.variant = std::string(v);
    out.push_back(std::move(copy));
  }
  return out;
}

/// Corner k (bit i picks hi for coordinate i) of the chart box.
inline Point chart_corner(const ChartBox& box, unsigned k) {
  Point p;
  for (int i = 0; i < kDim; ++i) p[i] = (k >> i) & 1u ? box.hi[i] : box.lo[i];
  return p;
}

inline Point chart_point(const ChartBox& box, const std::array<double, kDim>& u) {
  Point p;
  for (int i = 0; i < kDim; ++i) p[i] = box.lo[i] + u[i] * (box.hi[i] - box.lo[i]);
  return p;
}

/// n quasi-random chart points passing the singular-locus guard, deterministic in seed.
inline std::vector<Point> sample_chart(const HSpaceSpec& spec, int n, std::uint64_t seed) {
  std::vector<Point> pts;
  if (n <= 0) return pts;
  pts.reserve(n);
  const HaltonSampler sampler(seed);
  const std::uint64_t budget = 100ull * static_cast<std::uint64_t>(n);
  for (std::uint64_t k = 0; k < budget && static_cast<int>(pts.size()) < n; ++k) {
    const Point p = chart_point(spec.chart, sampler.unit(k));
    try {
      (void)eval_fields(spec, p);
    } catch (const Error&) {
      continue;
    }
    pts.push_back(p);
  }
  if (static_cast<int>(pts.size()) < n)
    throw ExhaustionError("only " + std::to_string(pts.size()) + " admissible points in " +
                          std::to_string(budget) + " draws; chart box too close to a singular locus");
  return pts;
}

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::optional<Signature> signature;  // achieved at the first sample point
  bool signature_constant = true;
  int points_checked = 0;

  bool ok() const { return violations.empty(); }
};

/// Checks structure, the families' side conditions, separation margins and
/// non-degeneracy of g at n quasi-random points plus the 64 box corners.
inline ValidationReport validate_spec(const HSpaceSpec& spec, int n_samples, std::uint64_t seed) {
  ValidationReport rep;
  auto add = [&](std::string code, std::string msg) { rep.violations.push_back({std::move(code), std::move(msg)}); };
  const TypeInfo& info = spec.info();

  for (auto name : info.signs) {
    auto it = spec.signs.find(std::string(name));
    if (it == spec.signs.end())
      add("MISSING_SIGN", "sign " + std::string(name) + " is required for type " + std::string(info.tag));
    else if (it->second != 1 && it->second != -1)
      add("BAD_SIGN", "sign " + std::string(name) + " must be +1 or -1");
  }
  for (const auto& [name, v] : spec.signs) {
    const bool known = std::find(info.signs.begin(), info.signs.end(), name) != info.signs.end();
    if (!known && name != "e4") add("UNKNOWN_SIGN", "sign " + name + " is not used by type " + std::string(info.tag));
  }
  for (auto name : info.constants)
    if (!spec.constants.count(std::string(name)))
      add("MISSING_CONSTANT", "constant " + std::string(name) + " is required for type " + std::string(info.tag));
  for (const auto& [name, v] : spec.constants) {
    if (std::find(info.constants.begin(), info.constants.end(), name) == info.constants.end())
      add("UNKNOWN_CONSTANT", "constant " + name + " is not used by type " + std::string(info.tag));
    else if (!std::isfinite(v))
      add("BAD_CONSTANT", "constant " + name + " must be finite");
  }
  for (auto name : {"eps", "eps_tilde"}) {
    auto it = spec.constants.find(name);
    if (it != spec.constants.end() && it->second != 0.0 && it->second != 1.0)
      add("BAD_EPS", std::string(name) + " must be 0 or 1");
  }
  for (const auto& slot : info.slots) {
    auto it = spec.functions.find(std::string(slot.name));
    if (it == spec.functions.end()) {
      add("MISSING_SLOT", "function slot " + std::string(slot.name) + " is required");
      continue;
    }
    const unsigned extra = it->second.variable_mask() & ~slot.allowed_mask;
    for (int v = 0; v < kDim; ++v)
      if (extra & (1u << v))
        add("SLOT_VARS", "slot " + std::string(slot.name) + " references disallowed coordinate x" + std::to_string(v + 1));
  }
  for (const auto& [name, ast] : spec.functions) {
    const bool known = std::any_of(info.slots.begin(), info.slots.end(), [&](const SlotInfo& s) { return s.name == name; });
    if (!known) add("UNKNOWN_SLOT", "function slot " + name + " is not used by type " + std::string(info.tag));
  }
  if (!spec.variant.empty() &&
      std::find(info.variants.begin(), info.variants.end(), spec.variant) == info.variants.end())
    add("BAD_VARIANT", "variant " + spec.variant + " is not defined for type " + std::string(info.tag));
  for (int i = 0; i < kDim; ++i)
    if (!(spec.chart.lo[i] < spec.chart.hi[i]))
      add("BAD_CHART", "chart lo must be below hi in coordinate x" + std::to_string(i + 1));
  if (!(spec.chart.margin > 0.0)) add("BAD_CHART", "chart margin must be positive");
  if (spec.perturb && (spec.perturb->i < 0 || spec.perturb->i >= kDim || spec.perturb->j < 0 || spec.perturb->j >= kDim))
    add("BAD_PERTURB", "perturbation component out of range");

  const auto has = [&](const char* c) { return spec.constants.count(c) > 0; };
  if (has("lambda1") && has("lambda2") && spec.constants.at("lambda1") == spec.constants.at("lambda2"))
    add("LAMBDA_EQ", "lambda1 must differ from lambda2");
  if (spec.type == HSpaceType::Seg22_g11 && has("eps_tilde") && has("a") && spec.constants.at("eps_tilde") == 0.0 &&
      spec.constants.at("a") == 0.0)
    add("A_ZERO", "a must be nonzero when eps_tilde=0");
  if (!rep.violations.empty()) return rep;  // sampling needs a structurally sound spec

  // Sample points: quasi-random interior plus all corners.
  std::vector<Point> pts;
  const HaltonSampler sampler(seed);
  for (int k = 0; k < n_samples; ++k) pts.push_back(chart_point(spec.chart, sampler.unit(k)));
  for (unsigned c = 0; c < (1u << kDim); ++c) pts.push_back(chart_corner(spec.chart, c));

  // theta / omega must not vanish identically when the matching eps is 0.
  auto identically_zero = [&](std::string_view slot) {
    for (const auto& p : pts) {
      try {
        if (spec.function(slot).eval(p) != 0.0) return false;
      } catch (const DomainError&) {
        return false;
      }
    }
    return true;
  };
  const bool eps_slot_type = spec.type == HSpaceType::Seg22_g11 || spec.type == HSpaceType::Seg2_g21_1 ||
                             spec.type == HSpaceType::Seg2_g211;
  if (eps_slot_type && spec.constant("eps") == 0.0 && identically_zero("theta"))
    add("THETA_ZERO", "theta must be nonzero when eps=0");
  if (spec.type == HSpaceType::Seg22_g11 && spec.constant("eps_tilde") == 0.0 && identically_zero("omega"))
    add("OMEGA_ZERO", "omega must be nonzero when eps_tilde=0");

  std::map<std::string, double> worst_sep;
  bool domain_reported = false, degenerate_reported = false;
  for (const auto& p : pts) {
    ++rep.points_checked;
    try {
      for (const auto& s : separations(spec, p)) {
        if (!(std::abs(s.value) >= spec.chart.margin)) {
          auto key = std::string(s.name);
          auto it = worst_sep.find(key);
          if (it == worst_sep.end() || std::abs(s.value) < std::abs(it->second)) worst_sep[key] = s.value;
        }
      }
      const FieldEval fe = eval_fields_unguarded(spec, p);
      const Matrix6 gm = fe.g.to_matrix();
      double hadamard = 1.0;
      for (int i = 0; i < kDim; ++i) {
        double row = 0.0;
        for (int j = 0; j < kDim; ++j) row += gm[i][j] * gm[i][j];
        hadamard *= std::sqrt(row);
      }
      const double d = det(gm);
      if (!(std::abs(d) > 1e-12 * hadamard) && !degenerate_reported) {
        add("DEGENERATE_METRIC", "det g = " + std::to_string(d) + " is numerically zero on the chart");
        degenerate_reported = true;
        continue;
      }
      const Signature sig = signature(fe.g, 1e-12 * std::max(1.0, fe.g.max_abs()));
      if (!rep.signature)
        rep.signature = sig;
      else if (!(sig == *rep.signature))
        rep.signature_constant = false;
    } catch (const Error& ex) {
      if (!domain_reported) add("EVAL_ERROR", ex.what());
      domain_reported = true;
    }
  }
  for (const auto& [name, v] : worst_sep)
    add("SEPARATION", "|" + name + "| = " + std::to_string(std::abs(v)) + " falls below the chart margin");
  if (!rep.signature_constant) add("SIGNATURE_VARIES", "signature of g changes across the chart");
  return rep;
}

}  // namespace hspace
