#pragma once

// Geodesic integration (fixed-step RK4 and Dormand-Prince 5(4)) and monitoring of
// the quadratic first integral I = (h - 4 phi g)(v, v) and the norm N = g(v, v).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "hspace/catalog.hpp"
#include "hspace/geometry.hpp"
#include "hspace/sampling.hpp"

namespace hspace {

struct GeodesicState {
  double t = 0.0;
  Point x;
  Tangent v;
};

enum class TrajectoryStatus { Completed, SingularAbort, NonFinite, MaxSteps, StepUnderflow };

inline std::string_view status_name(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::SingularAbort: return "singular_abort";
    case TrajectoryStatus::NonFinite: return "nonfinite";
    case TrajectoryStatus::MaxSteps: return "max_steps";
    case TrajectoryStatus::StepUnderflow: return "step_underflow";
  }
  return "?";
}

struct Trajectory {
  std::vector<GeodesicState> samples;
  std::vector<double> I;
  std::vector<double> N;
  int steps = 0;
  int rejected = 0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::string message;

  bool ok() const { return status == TrajectoryStatus::Completed; }
};

/// K_ij = h_ij - 4 phi g_ij.
inline SymTensor integral_tensor(const FieldEval& fe) { return fe.h - 4.0 * fe.phi * fe.g; }

inline double first_integral(const HSpaceSpec& spec, const Point& x, const Tangent& v) {
  const FieldEval fe = eval_fields(spec, x);
  return quad_form(integral_tensor(fe), v, v);
}

struct Derivative {
  Tangent dx;
  Tangent dv;
};

namespace detail {

inline Derivative rhs_from_fields(const FieldEval& fe, const Tangent& v) {
  const Gamma gamma = christoffel(fe);
  Derivative d;
  d.dx = v;
  for (int k = 0; k < kDim; ++k) {
    double acc = 0.0;
    for (int i = 0; i < kDim; ++i) {
      acc += gamma(k, i, i) * v[i] * v[i];
      for (int j = i + 1; j < kDim; ++j) acc += 2.0 * gamma(k, i, j) * v[i] * v[j];
    }
    d.dv[k] = -acc;
  }
  return d;
}

// Stage evaluation: no singular-locus guard (stages may probe slightly outside).
inline Derivative stage_rhs(const HSpaceSpec& spec, const Point& x, const Tangent& v) {
  return rhs_from_fields(eval_fields_unguarded(spec, x), v);
}

// Guard at accepted states: inside the chart box and clear of the singular locus.
inline bool admissible(const HSpaceSpec& spec, const Point& x, std::string& why) {
  if (!x.all_finite()) {
    why = "non-finite state";
    return false;
  }
  if (!spec.chart.contains(x)) {
    why = "left the chart box";
    return false;
  }
  if (auto bad = violated_separation(spec, x, 0.5 * spec.chart.margin)) {
    why = "reached the singular locus " + std::string(bad->name) + " = 0";
    return false;
  }
  return true;
}

inline void record(const HSpaceSpec& spec, Trajectory& tr, const GeodesicState& s) {
  const FieldEval fe = eval_fields(spec, s.x);
  tr.samples.push_back(s);
  tr.I.push_back(quad_form(integral_tensor(fe), s.v, s.v));
  tr.N.push_back(quad_form(fe.g, s.v, s.v));
}

}  // namespace detail

/// dx = v, dv^k = -Gamma^k_ij v^i v^j.
inline Derivative geodesic_rhs(const HSpaceSpec& spec, const GeodesicState& s) {
  return detail::rhs_from_fields(eval_fields(spec, s.x), s.v);
}

/// Classical RK4 with fixed step; the last step is shortened to land on t_end.
inline Trajectory integrate_rk4(const HSpaceSpec& spec, const GeodesicState& s0, double t_end, double h_step) {
  if (!(h_step > 0.0)) throw DomainError("step must be positive");
  Trajectory tr;
  std::string why;
  if (!detail::admissible(spec, s0.x, why)) throw SingularLocusError("initial point: " + why);
  detail::record(spec, tr, s0);
  GeodesicState s = s0;
  const double span = t_end - s0.t;
  if (!(span > 0.0)) return tr;
  const auto n_steps = static_cast<long>(std::ceil(span / h_step - 1e-9));
  for (long n = 0; n < n_steps; ++n) {
    const double t_next = n + 1 == n_steps ? t_end : s0.t + static_cast<double>(n + 1) * h_step;
    const double h = t_next - s.t;
    try {
      const Derivative k1 = detail::stage_rhs(spec, s.x, s.v);
      const Derivative k2 = detail::stage_rhs(spec, displace(s.x, 0.5 * h, k1.dx), s.v + 0.5 * h * k1.dv);
      const Derivative k3 = detail::stage_rhs(spec, displace(s.x, 0.5 * h, k2.dx), s.v + 0.5 * h * k2.dv);
      const Derivative k4 = detail::stage_rhs(spec, displace(s.x, h, k3.dx), s.v + h * k3.dv);
      GeodesicState next;
      next.t = t_next;
      for (int i = 0; i < kDim; ++i) {
        next.x[i] = s.x[i] + h / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
        next.v[i] = s.v[i] + h / 6.0 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
      }
      if (!next.x.all_finite() || !next.v.all_finite()) {
        tr.status = TrajectoryStatus::NonFinite;
        tr.message = "non-finite state";
        return tr;
      }
      if (!detail::admissible(spec, next.x, why)) {
        tr.status = TrajectoryStatus::SingularAbort;
        tr.message = why;
        return tr;
      }
      s = next;
      detail::record(spec, tr, s);
      ++tr.steps;
    } catch (const Error& ex) {
      tr.status = TrajectoryStatus::SingularAbort;
      tr.message = ex.what();
      return tr;
    }
  }
  return tr;
}

struct AdaptiveOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_steps = 100000;
  double initial_step = 0.0;  // 0 picks span / 100
};

/// Dormand-Prince 5(4) with safety 0.9 and growth clamp [0.2, 5]. Samples are the accepted steps.
inline Trajectory integrate_adaptive(const HSpaceSpec& spec, const GeodesicState& s0, double t_end,
                                     const AdaptiveOptions& opt = {}) {
  if (!(opt.abs_tol > 0.0) || !(opt.rel_tol > 0.0)) throw DomainError("tolerances must be positive");
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

  Trajectory tr;
  std::string why;
  if (!detail::admissible(spec, s0.x, why)) throw SingularLocusError("initial point: " + why);
  detail::record(spec, tr, s0);
  const double span = t_end - s0.t;
  if (!(span > 0.0)) return tr;

  using Y = std::array<double, 2 * kDim>;
  auto pack = [](const Point& x, const Tangent& v) {
    Y y;
    for (int i = 0; i < kDim; ++i) y[i] = x[i], y[kDim + i] = v[i];
    return y;
  };
  auto f = [&](const Y& y) {
    Point x;
    Tangent v;
    for (int i = 0; i < kDim; ++i) x[i] = y[i], v[i] = y[kDim + i];
    const Derivative d = detail::stage_rhs(spec, x, v);
    return pack(Point{d.dx.c}, d.dv);
  };
  auto comb = [](const Y& y, double h, std::initializer_list<std::pair<double, const Y*>> terms) {
    Y r = y;
    for (const auto& [w, k] : terms)
      for (int i = 0; i < 2 * kDim; ++i) r[i] += h * w * (*k)[i];
    return r;
  };

  Y y = pack(s0.x, s0.v);
  double t = s0.t;
  double h = opt.initial_step > 0.0 ? opt.initial_step : span / 100.0;
  int attempts = 0;
  while (t < t_end) {
    if (tr.steps >= opt.max_steps) {
      tr.status = TrajectoryStatus::MaxSteps;
      tr.message = "max_steps exceeded";
      return tr;
    }
    if (h < 1e-14 * span) {
      tr.status = TrajectoryStatus::StepUnderflow;
      tr.message = "step size underflow";
      return tr;
    }
    if (++attempts > 50 * opt.max_steps) {
      tr.status = TrajectoryStatus::MaxSteps;
      tr.message = "too many rejected steps";
      return tr;
    }
    const bool last = t + h >= t_end;
    const double hs = last ? t_end - t : h;
    Y k1, k2, k3, k4, k5, k6, k7, y5;
    bool stage_ok = true;
    try {
      k1 = f(y);
      k2 = f(comb(y, hs, {{a21, &k1}}));
      k3 = f(comb(y, hs, {{a31, &k1}, {a32, &k2}}));
      k4 = f(comb(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      k5 = f(comb(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      k6 = f(comb(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y5 = comb(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      k7 = f(y5);
    } catch (const Error&) {
      stage_ok = false;
    }
    double err = 0.0;
    if (stage_ok) {
      for (int i = 0; i < 2 * kDim; ++i) {
        const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / (2 * kDim));
    }
    if (!stage_ok || !std::isfinite(err)) {
      ++tr.rejected;
      h = hs * 0.2;
      continue;
    }
    const double factor = std::clamp(err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err > 1.0) {
      ++tr.rejected;
      h = hs * factor;
      continue;
    }
    GeodesicState next;
    next.t = last ? t_end : t + hs;
    for (int i = 0; i < kDim; ++i) next.x[i] = y5[i], next.v[i] = y5[kDim + i];
    if (!next.x.all_finite() || !next.v.all_finite()) {
      tr.status = TrajectoryStatus::NonFinite;
      tr.message = "non-finite state";
      return tr;
    }
    if (!detail::admissible(spec, next.x, why)) {
      tr.status = TrajectoryStatus::SingularAbort;
      tr.message = why;
      return tr;
    }
    y = y5;
    t = next.t;
    detail::record(spec, tr, next);
    ++tr.steps;
    h = hs * factor;
  }
  return tr;
}

struct ConservationReport {
  double I0 = 0.0;
  double max_dI = 0.0;
  double rel_drift_I = 0.0;
  double N0 = 0.0;
  double max_dN = 0.0;
  double rel_drift_N = 0.0;
  int steps = 0;
  int rejected = 0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
};

inline ConservationReport conservation_check(const Trajectory& tr) {
  ConservationReport r;
  r.steps = tr.steps;
  r.rejected = tr.rejected;
  r.status = tr.status;
  if (tr.samples.empty()) return r;
  r.I0 = tr.I.front();
  r.N0 = tr.N.front();
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    r.max_dI = std::max(r.max_dI, std::abs(tr.I[k] - r.I0));
    r.max_dN = std::max(r.max_dN, std::abs(tr.N[k] - r.N0));
  }
  r.rel_drift_I = r.max_dI / std::max(1.0, std::abs(r.I0));
  r.rel_drift_N = r.max_dN / std::max(1.0, std::abs(r.N0));
  return r;
}

/// Recomputes I and N with the given spec (e.g. to monitor a candidate integral on a fixed trajectory).
inline ConservationReport conservation_check(const HSpaceSpec& spec, const Trajectory& tr) {
  Trajectory copy = tr;
  for (std::size_t k = 0; k < copy.samples.size(); ++k) {
    const FieldEval fe = eval_fields(spec, copy.samples[k].x);
    copy.I[k] = quad_form(integral_tensor(fe), copy.samples[k].v, copy.samples[k].v);
    copy.N[k] = quad_form(fe.g, copy.samples[k].v, copy.samples[k].v);
  }
  return conservation_check(copy);
}

/// Initial state for a random geodesic: a direction normalized to |N0| = 1, then
/// slowed so the straight-line excursion over the unit span stays within a quarter
/// of the box width and half the distance to the nearest face in every coordinate.
inline GeodesicState random_initial_state(const HSpaceSpec& spec, const Point& x0, std::uint64_t seed) {
  SplitMix64 rng(seed);
  GeodesicState s;
  s.x = x0;
  for (int i = 0; i < kDim; ++i) s.v[i] = rng.uniform(-1.0, 1.0);
  const FieldEval fe = eval_fields(spec, x0);
  const double n = quad_form(fe.g, s.v, s.v);
  if (std::abs(n) > 1e-8) s.v *= 1.0 / std::sqrt(std::abs(n));
  double scale = 1.0;
  for (int i = 0; i < kDim; ++i) {
    const double width = spec.chart.hi[i] - spec.chart.lo[i];
    const double face = std::min(x0[i] - spec.chart.lo[i], spec.chart.hi[i] - x0[i]);
    const double room = std::min(0.25 * width, 0.5 * face);
    if (std::abs(s.v[i]) > room) scale = std::min(scale, room / std::abs(s.v[i]));
  }
  s.v *= scale;
  return s;
}

struct RandomGeodesic {
  GeodesicState start;
  Trajectory trajectory;
  int redraws = 0;
};

/// Geodesic k of a seeded family: starts are drawn from the central half of the
/// chart box; runs that abort are redrawn (up to 50 times) from the next candidate.
inline RandomGeodesic random_geodesic(const HSpaceSpec& spec, int k, std::uint64_t seed, double t_end,
                                      const AdaptiveOptions& opt = {}) {
  SplitMix64 mix(seed ^ (0xA0761D6478BD642FULL * static_cast<std::uint64_t>(k + 1)));
  const HaltonSampler sampler(mix.next());
  ChartBox inner = spec.chart;
  for (int i = 0; i < kDim; ++i) {
    const double q = 0.25 * (spec.chart.hi[i] - spec.chart.lo[i]);
    inner.lo[i] += q;
    inner.hi[i] -= q;
  }
  RandomGeodesic out;
  for (std::uint64_t draw = 0; draw < 50; ++draw) {
    const Point x0 = chart_point(inner, sampler.unit(draw));
    try {
      (void)eval_fields(spec, x0);
    } catch (const Error&) {
      ++out.redraws;
      continue;
    }
    out.start = random_initial_state(spec, x0, mix.next());
    out.trajectory = integrate_adaptive(spec, out.start, t_end, opt);
    if (out.trajectory.ok()) return out;
    ++out.redraws;
  }
  return out;  // last attempt, flagged by its status
}

/// CSV with header t,x1..x6,v1..v6,I,N and 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,x1,x2,x3,x4,x5,x6,v1,v2,v3,v4,v5,v6,I,N\n";
  char buf[32];
  auto put = [&](double v, bool last) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << (last ? '\n' : ',');
  };
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    put(s.t, false);
    for (double x : s.x) put(x, false);
    for (double v : s.v) put(v, false);
    put(tr.I[k], false);
    put(tr.N[k], true);
  }
}

}  // namespace hspace
