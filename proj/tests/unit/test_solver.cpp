#include "gnet/harness/cases.hpp"
#include "gnet/random.hpp"
#include "gnet/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gnet;
using harness::load_case;

namespace {

constexpr double kPi = std::numbers::pi;

double max_sample_distance(const GeodesicNet& a, const GeodesicNet& b) {
  double d = 0.0;
  for (int e = 0; e < a.edge_count(); ++e)
    for (std::size_t k = 0; k < a.samples(e).size(); ++k) d = std::max(d, (a.samples(e)[k] - b.samples(e)[k]).norm());
  return d;
}

NetField constant_field(const GeodesicNet& net, const Vec& v) {
  NetField f = NetField::zero(net);
  for (auto& edge : f.values)
    for (auto& x : edge) x = v;
  return f;
}

// Radial perturbation 1 + amp cos 2theta of the unit circle.
GeodesicNet ellipse_like(const GeodesicNet& equator, double amp) {
  const int N = equator.intervals(0);
  std::vector<Vec> pts;
  for (int k = 0; k <= N; ++k) {
    const double th = 2 * kPi * k / N;
    pts.push_back(make_vec({std::cos(th), std::sin(th)}) * (1 + amp * std::cos(2 * th)));
  }
  return equator.with_samples({pts});
}

}  // namespace

TEST(Solve, HoneycombJitteredConvergesToTranslate) {
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(11);
  const auto init = jitter_net(hc.chart, hc.net, rng, 0.05);
  SolveOptions o;
  o.tolerance = 1e-10;
  const auto r = solve_stationary(hc.chart, init, o);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LE(r.iterations(), 10);
  const Vec shift = r.net.vertex_point(0) - hc.net.vertex_point(0);
  double worst = 0.0;
  for (int e = 0; e < 3; ++e)
    for (std::size_t k = 0; k < hc.net.samples(e).size(); ++k)
      worst = std::max(worst, (r.net.samples(e)[k] - hc.net.samples(e)[k] - shift).norm());
  EXPECT_LE(worst, 1e-6);
}

TEST(Solve, EquatorFromEllipse) {
  const auto eq = load_case("sphere-equator");
  SolveOptions o;
  o.tolerance = 1e-8;
  const auto r = solve_stationary(eq.chart, ellipse_like(eq.net, 0.05), o);
  EXPECT_LE(r.residual, 1e-8);
  EXPECT_NEAR(length(eq.chart, r.net), 2 * kPi, 1e-8);
}

TEST(Solve, StationaryInitIsFixedPoint) {
  for (const char* name : {"honeycomb-torus", "flat-loop", "sphere-equator"}) {
    const auto ex = load_case(name);
    SolveOptions o;
    o.tolerance = 1e-7;
    const auto r = solve_stationary(ex.chart, ex.net, o);
    EXPECT_LE(r.iterations(), 1) << name;
    EXPECT_LE(max_sample_distance(r.net, ex.net), 1e-12) << name;
  }
}

TEST(Solve, QuadraticTail) {
  std::mt19937_64 rng(5);
  for (const char* name : {"honeycomb-torus", "sphere-theta", "flat-loop"}) {
    const auto ex = load_case(name);
    SolveOptions o;
    o.tolerance = 1e-7;  // rotations of the theta net are only near-symmetries of the discrete system
    const auto r = solve_stationary(ex.chart, jitter_net(ex.chart, ex.net, rng, 0.03), o);
    const auto C = quadratic_tail_constant(r, 1e-7);
    ASSERT_TRUE(C.has_value()) << name;
    EXPECT_LE(*C, 10.0) << name;
  }
}

TEST(Solve, FirstVariationVanishes) {
  const auto th = load_case("sphere-theta");
  std::mt19937_64 rng(3);
  SolveOptions o;
  o.tolerance = 1e-7;
  const auto r = solve_stationary(th.chart, jitter_net(th.chart, th.net, rng, 0.02), o);
  for (int i = 0; i < 10; ++i) {
    const auto X = random_smooth_field(r.net, rng);
    EXPECT_LE(std::abs(first_variation(th.chart, r.net, X)), 1e-6 * field_norm(X));
  }
}

TEST(Solve, RejectsBadInput) {
  const auto hc = load_case("honeycomb-torus");
  SolveOptions o;
  o.tolerance = 0.0;
  EXPECT_THROW(solve_stationary(hc.chart, hc.net, o), ValidationError);
  o = {};
  o.max_iterations = 0;
  EXPECT_THROW(solve_stationary(hc.chart, hc.net, o), ValidationError);
}

TEST(Solve, MaxIterationsReported) {
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(2);
  SolveOptions o;
  o.max_iterations = 1;
  try {
    solve_stationary(hc.chart, jitter_net(hc.chart, hc.net, rng, 0.05), o);
    FAIL() << "expected MaxIterations";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::MaxIterations);
  }
}

TEST(Continuation, ConstantPathGivesIdenticalNets) {
  const auto hc = load_case("honeycomb-torus");
  const auto r = continue_family({hc.chart, hc.chart, hc.chart}, hc.net);
  ASSERT_EQ(r.nets.size(), 3u);
  for (const auto& n : r.nets) EXPECT_LE(max_sample_distance(n, hc.net), 1e-12);
}

TEST(Continuation, BumpRampAndReversal) {
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(1);
  const auto h = random_bump_field(hc.chart, hc.net, rng);
  std::vector<MetricChart> path;
  for (int i = 0; i <= 5; ++i) path.push_back(conformal_family(hc.chart, h, 0.01 * i));
  const auto r = continue_family(path, hc.net);
  ASSERT_EQ(r.nets.size(), path.size());
  for (std::size_t i = 0; i < path.size(); ++i) EXPECT_LE(stationarity_residual(path[i], r.nets[i]).aggregate, 1e-8);

  // away from the flat (degenerate) end the family has no hysteresis
  const std::vector<MetricChart> back(path.rbegin(), path.rend() - 1);
  const auto rev = continue_family(back, r.nets.back());
  EXPECT_LE(max_sample_distance(rev.nets.back(), r.nets[1]), 1e-6);
}

TEST(Continuation, EmptyPathRejected) {
  const auto hc = load_case("honeycomb-torus");
  EXPECT_THROW(continue_family({}, hc.net), ValidationError);
}

TEST(ConditionCBump, HoneycombTranslationAnchorsOnE1Midpoint) {
  const auto hc = load_case("honeycomb-torus");
  const auto J = constant_field(hc.net, make_vec({0.0, 1.0}));
  const auto b = build_condition_C_bump(hc.chart, hc.net, J);
  EXPECT_EQ(hc.net.graph().edge(b.spec.edge).id, "E1");
  EXPECT_DOUBLE_EQ(b.spec.t0, 0.5);
  EXPECT_GT(b.pairing_t0, 0.0);
  EXPECT_GE(b.min_pairing, 0.0);
  EXPECT_LE(std::abs(b.spec.direction.dot(b.spec.tangent)), 1e-12);
}

TEST(ConditionCBump, VanishesOnNetAndSupportAvoidsOtherEdges) {
  for (const char* name : {"honeycomb-torus", "sphere-equator"}) {
    const auto ex = load_case(name);
    const auto v = is_nondegenerate(ex.chart, ex.net);
    for (const auto& J : v.kernel.fields) {
      const auto b = build_condition_C_bump(ex.chart, ex.net, J);
      for (int e = 0; e < ex.net.edge_count(); ++e)
        for (const auto& x : ex.net.samples(e)) {
          EXPECT_LE(std::abs(b.h.value(x)), 1e-9) << name;
          if (e != b.spec.edge) EXPECT_EQ(b.h.value(x), 0.0) << name;
        }
    }
  }
}

TEST(ConditionCBump, TangentialFieldRejected) {
  const auto hc = load_case("honeycomb-torus");
  NetField J = NetField::zero(hc.net);
  for (int e = 0; e < 3; ++e) {
    const auto d = edge_velocity(hc.net, e);
    for (std::size_t k = 0; k < d.size(); ++k) J[e][k] = std::sin(kPi * k / (d.size() - 1)) * d[k];
  }
  try {
    build_condition_C_bump(hc.chart, hc.net, J);
    FAIL() << "expected NoNormalPoint";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::NoNormalPoint);
  }
}

TEST(ConditionCBump, ClearanceFailure) {
  const auto hc = load_case("honeycomb-torus");
  BumpOptions o;
  o.radius = 2.0;
  o.max_shrinks = 1;
  try {
    build_condition_C_bump(hc.chart, hc.net, constant_field(hc.net, make_vec({0.0, 1.0})), o);
    FAIL() << "expected ClearanceFailure";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::ClearanceFailure);
  }
}

TEST(MixedDerivative, PositiveAndMatchesFiniteDifference) {
  for (const char* name : {"honeycomb-torus", "sphere-equator"}) {
    const auto ex = load_case(name);
    const auto v = is_nondegenerate(ex.chart, ex.net);
    for (const auto& J : v.kernel.fields) {
      const auto b = build_condition_C_bump(ex.chart, ex.net, J);
      const auto m = mixed_second_derivative(ex.chart, b.h, ex.net, J);
      EXPECT_GT(m.closed_form, 0.0) << name;
      EXPECT_LE(m.relative_gap(), 1e-4) << name;
    }
  }
}

TEST(MixedDerivative, TangentialFieldGivesZero) {
  const auto hc = load_case("honeycomb-torus");
  const auto b = build_condition_C_bump(hc.chart, hc.net, constant_field(hc.net, make_vec({0.0, 1.0})));
  NetField T = NetField::zero(hc.net);
  for (int e = 0; e < 3; ++e) {
    const auto d = edge_velocity(hc.net, e);
    for (std::size_t k = 0; k < d.size(); ++k) T[e][k] = std::sin(kPi * k / (d.size() - 1)) * d[k];
  }
  const auto m = mixed_second_derivative(hc.chart, b.h, hc.net, T);
  EXPECT_NEAR(m.closed_form, 0.0, 1e-8);
  EXPECT_NEAR(m.finite_difference, 0.0, 1e-8);
}

TEST(MixedDerivative, LinearInBump) {
  const auto hc = load_case("honeycomb-torus");
  const auto J = constant_field(hc.net, make_vec({0.0, 1.0}));
  const auto b = build_condition_C_bump(hc.chart, hc.net, J);
  const auto one = mixed_second_derivative(hc.chart, b.h, hc.net, J);
  const auto two = mixed_second_derivative(hc.chart, b.h.scaled(2.0), hc.net, J);
  EXPECT_NEAR(two.closed_form, 2 * one.closed_form, 1e-6 * std::abs(one.closed_form));
  EXPECT_NEAR(two.finite_difference, 2 * one.finite_difference, 1e-6 * std::abs(one.finite_difference));
}

TEST(BreakDegeneracy, HoneycombAndEquator) {
  for (const char* name : {"honeycomb-torus", "sphere-equator"}) {
    const auto ex = load_case(name);
    const auto r = break_degeneracy(ex.chart, ex.net);
    EXPECT_EQ(r.verdict.verdict, Verdict::Nondegenerate) << name;
    EXPECT_LE(r.bumps.size(), 3u) << name;
    int dim = 2;
    for (const auto& b : r.bumps) {
      EXPECT_LE(b.kernel_dimension, dim) << name;
      dim = b.kernel_dimension;
    }
    EXPECT_LE(stationarity_residual(r.chart, r.net).aggregate, 1e-8) << name;

    const auto again = break_degeneracy(r.chart, r.net);
    EXPECT_TRUE(again.bumps.empty()) << name;
    EXPECT_LE(max_sample_distance(again.net, r.net), 0.0) << name;
  }
}

TEST(BreakDegeneracy, RequiresStationaryNet) {
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(4);
  try {
    break_degeneracy(hc.chart, jitter_net(hc.chart, hc.net, rng, 0.05));
    FAIL() << "expected NotStationary";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::NotStationary);
  }
}

TEST(RandomBumpField, SeededAndVanishingOnNet) {
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 a(9), b(9);
  const auto ha = random_bump_field(hc.chart, hc.net, a);
  const auto hb = random_bump_field(hc.chart, hc.net, b);
  const Vec p = make_vec({0.31, 0.07});
  EXPECT_EQ(ha.value(p), hb.value(p));
  for (int e = 0; e < 3; ++e)
    for (const auto& x : hc.net.samples(e)) EXPECT_LE(std::abs(ha.value(x)), 1e-9);
}
