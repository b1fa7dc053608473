#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace hspace;

namespace {

const Point kS2Point{{1, 2, 1, 3, 0, 0}};

GeodesicState state(const Point& x, const Tangent& v) {
  GeodesicState s;
  s.x = x;
  s.v = v;
  return s;
}

double state_gap(const GeodesicState& a, const GeodesicState& b) {
  double e = 0.0;
  for (int i = 0; i < kDim; ++i) e = std::max({e, std::abs(a.x[i] - b.x[i]), std::abs(a.v[i] - b.v[i])});
  return e;
}

GeodesicState s2_start() {
  const HSpaceSpec s2 = testkit::load("S2.json");
  return random_initial_state(s2, kS2Point, 17);
}

}  // namespace

TEST(Rhs, FlatChartHasNoAcceleration) {
  const HSpaceSpec s1 = testkit::load("S1.json");
  const Derivative d = geodesic_rhs(s1, state(Point{{0.1, 0.2, 0.3, -0.1, 0, 0.2}}, Tangent{{1, -2, 3, 0.5, 1, 1}}));
  for (double a : d.dv) EXPECT_EQ(a, 0.0);
  EXPECT_EQ(d.dx[1], -2.0);
}

TEST(Rhs, ZeroVelocityIsStationary) {
  const Derivative d = geodesic_rhs(testkit::load("S2.json"), state(kS2Point, Tangent{}));
  for (int i = 0; i < kDim; ++i) {
    EXPECT_EQ(d.dx[i], 0.0);
    EXPECT_EQ(d.dv[i], 0.0);
  }
}

TEST(Rhs, MatchesNaiveContraction) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  const Gamma gm = christoffel(eval_fields(s2, kS2Point));
  for (const Tangent& v : {Tangent{{1, 0, 0, 0, 0, 0}}, Tangent{{0.3, -0.2, 0.5, 0.1, 0.7, -0.4}}}) {
    const Derivative d = geodesic_rhs(s2, state(kS2Point, v));
    for (int k = 0; k < kDim; ++k) {
      double want = 0.0;
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) want -= gm(k, i, j) * v[i] * v[j];
      EXPECT_NEAR(d.dv[k], want, 1e-13 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Rk4, StraightLineInFlatChart) {
  const HSpaceSpec s1 = testkit::load("S1.json");
  const Tangent v{{0.1, -0.2, 0.15, 0.05, -0.1, 0.2}};
  const Trajectory tr = integrate_rk4(s1, state(Point{}, v), 1.0, 0.03);
  ASSERT_TRUE(tr.ok());
  EXPECT_DOUBLE_EQ(tr.samples.back().t, 1.0);
  for (const auto& s : tr.samples)
    for (int i = 0; i < kDim; ++i) EXPECT_NEAR(s.x[i], s.t * v[i], 1e-12);
  EXPECT_LE(conservation_check(tr).rel_drift_I, 1e-12);
}

TEST(Rk4, EmptySpanGivesSingleSample) {
  const Trajectory tr = integrate_rk4(testkit::load("S2.json"), s2_start(), 0.0, 0.1);
  EXPECT_EQ(tr.samples.size(), 1u);
  EXPECT_EQ(tr.steps, 0);
}

TEST(Rk4, FourthOrderConvergence) {
  const double order = testkit::rk4_order(testkit::load("S2.json"), s2_start());
  EXPECT_GE(order, 3.8);
  EXPECT_LE(order, 4.2);
}

TEST(Adaptive, StraightLineInFlatChart) {
  const Tangent v{{0.2, 0.1, -0.1, 0.3, 0.0, -0.2}};
  const Trajectory tr = integrate_adaptive(testkit::load("S1.json"), state(Point{}, v), 1.0);
  ASSERT_TRUE(tr.ok());
  EXPECT_LE(tr.steps, 10);
  for (int i = 0; i < kDim; ++i) EXPECT_NEAR(tr.samples.back().x[i], v[i], 1e-12);
}

TEST(Adaptive, AgreesWithFineRk4) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  const Trajectory a = integrate_adaptive(s2, s2_start(), 1.0);
  const Trajectory b = integrate_rk4(s2, s2_start(), 1.0, 1e-3);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_LE(state_gap(a.samples.back(), b.samples.back()), 1e-9);
}

TEST(Adaptive, ChartExitAbortsWithPartialTrajectory) {
  const HSpaceSpec s1 = testkit::load("S1.json");
  const Trajectory tr = integrate_adaptive(s1, state(Point{}, Tangent{{2, 0, 0, 0, 0, 0}}), 1.0);
  EXPECT_EQ(tr.status, TrajectoryStatus::SingularAbort);
  EXPECT_FALSE(tr.ok());
  ASSERT_GE(tr.samples.size(), 1u);
  EXPECT_TRUE(s1.chart.contains(tr.samples.back().x));
  EXPECT_LT(tr.samples.back().t, 1.0);
}

TEST(FirstIntegral, ZeroVelocity) {
  EXPECT_EQ(first_integral(testkit::load("S2.json"), kS2Point, Tangent{}), 0.0);
}

TEST(FirstIntegral, QuadraticInVelocity) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  const Tangent v{{0.3, -0.2, 0.5, 0.1, 0.7, -0.4}};
  const double i1 = first_integral(s2, kS2Point, v);
  for (double alpha : {-1.0, 0.5, 2.0, 3.0}) {
    Tangent w = v;
    w *= alpha;
    EXPECT_NEAR(first_integral(s2, kS2Point, w), alpha * alpha * i1, 1e-12 * std::max(1.0, std::abs(i1)));
  }
}

TEST(FirstIntegral, S1HandValue) {
  // c = 0 so h - 4 phi g = a; a_11 = 0, a_12 = lambda1 e2 = 1, a_22 = lambda1 (e2 - e2 theta) = 1.
  const HSpaceSpec s1 = testkit::load("S1.json");
  EXPECT_DOUBLE_EQ(first_integral(s1, Point{{0.1, 0.2, 0, 0, 0, 0}}, Tangent{{1, 1, 0, 0, 0, 0}}), 3.0);
}

TEST(Conservation, S2WithinTolerance) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  for (int k = 0; k < 20; ++k) {
    const RandomGeodesic g = random_geodesic(s2, k, 1, 1.0);
    ASSERT_TRUE(g.trajectory.ok()) << k;
    const ConservationReport r = conservation_check(g.trajectory);
    EXPECT_LE(r.rel_drift_I, 1e-7) << k;
    EXPECT_LE(r.rel_drift_N, 1e-7) << k;
  }
}

TEST(Conservation, WrongIntegralDrifts) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  const RandomGeodesic g = random_geodesic(s2, 0, 1, 1.0);
  ASSERT_TRUE(g.trajectory.ok());
  const ConservationReport good = conservation_check(s2, g.trajectory);
  const ConservationReport bad = conservation_check(testkit::perturbed_h11(s2), g.trajectory);
  EXPECT_GE(bad.max_dI, 100.0 * std::max(good.max_dI, 1e-15));
  EXPECT_EQ(bad.max_dN, good.max_dN);
}

TEST(Conservation, TimeReversalReturnsHome) {
  const HSpaceSpec s2 = testkit::load("S2.json");
  const GeodesicState s0 = s2_start();
  const Trajectory fwd = integrate_adaptive(s2, s0, 1.0);
  ASSERT_TRUE(fwd.ok());
  GeodesicState back = fwd.samples.back();
  back.t = 0.0;
  back.v *= -1.0;
  const Trajectory rev = integrate_adaptive(s2, back, 1.0);
  ASSERT_TRUE(rev.ok());
  GeodesicState end = rev.samples.back();
  end.v *= -1.0;
  EXPECT_LE(state_gap(end, s0), 1e-6);
}

TEST(RandomGeodesic, DeterministicAndInsideChart) {
  const HSpaceSpec s3 = testkit::load("S3.json");
  const RandomGeodesic a = random_geodesic(s3, 4, 9, 1.0);
  const RandomGeodesic b = random_geodesic(s3, 4, 9, 1.0);
  ASSERT_TRUE(a.trajectory.ok());
  EXPECT_EQ(state_gap(a.trajectory.samples.back(), b.trajectory.samples.back()), 0.0);
  for (const auto& s : a.trajectory.samples) EXPECT_TRUE(s3.chart.contains(s.x));
  EXPECT_NEAR(std::abs(quad_form(eval_fields(s3, a.start.x).g, a.start.v, a.start.v)), 0.0, 1.0 + 1e-12);
}

TEST(Csv, HeaderAndRowShape) {
  const Trajectory tr = integrate_rk4(testkit::load("S2.json"), s2_start(), 0.5, 0.25);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,x3,x4,x5,x6,v1,v2,v3,v4,v5,v6,I,N");
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14);
    ++rows;
  }
  EXPECT_EQ(rows, static_cast<int>(tr.samples.size()));
  EXPECT_EQ(rows, 3);
}
