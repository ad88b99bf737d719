#include "gnet/harness/cases.hpp"
#include "gnet/jacobi.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gnet;
using harness::load_case;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(ParallelFrame, FlatIsConstant) {
  const auto hc = load_case("honeycomb-torus");
  for (int e = 0; e < 3; ++e) {
    const auto f = parallel_frame(hc.chart, hc.net, e);
    for (const auto& m : f.e) EXPECT_LE((m - f.e.front()).norm(), 1e-14);
  }
}

TEST(ParallelFrame, EquatorNormAndHolonomy) {
  const auto eq = load_case("sphere-equator");
  const auto f = parallel_frame(eq.chart, eq.net, 0);
  const auto d = edge_velocity(eq.net, 0);
  for (std::size_t k = 0; k < f.e.size(); ++k) {
    const Mat g = eq.chart.metric(eq.net.samples(0)[k]);
    EXPECT_NEAR(std::sqrt(f.e[k].col(0).dot(g * f.e[k].col(0))), 1.0, 1e-8);
    EXPECT_LE(std::abs(f.e[k].col(0).dot(g * d[k])) / d[k].norm(), 1e-8);
  }
  const auto S = assemble_jacobi_system(eq.chart, eq.net);
  EXPECT_NEAR(S.holonomy(0, 0), 1.0, 1e-6);
}

TEST(JacobiCoefficients, Examples) {
  const auto hc = load_case("honeycomb-torus");
  for (const auto& K : jacobi_ode_coefficients(hc.chart, hc.net, 0)) EXPECT_EQ(K.norm(), 0.0);
  // unit speed great circle: the equator rescaled to arc length has K = 1,
  // in the t-parameter K = l^2
  const auto eq = load_case("sphere-equator");
  const double l2 = 4 * kPi * kPi;
  for (const auto& K : jacobi_ode_coefficients(eq.chart, eq.net, 0)) EXPECT_NEAR(K(0, 0) / l2, 1.0, 1e-5);
  // speed-c parametrization multiplies K by c^2: traverse half the equator
  auto half = eq.net.all_samples();
  for (int k = 0; k <= 64; ++k) half[0][k] = make_vec({std::cos(kPi * k / 64), std::sin(kPi * k / 64)});
  const GeodesicNet arc(WeightedMultigraph({"a", "b"}, {{"E", "a", "b"}, {"F", "a", "b"}}), {half[0], half[0]});
  for (const auto& K : jacobi_ode_coefficients(eq.chart, arc, 0)) EXPECT_NEAR(K(0, 0) / (kPi * kPi), 1.0, 1e-5);
}

TEST(JacobiSystem, DimensionsAndMonodromy) {
  const auto hc = load_case("honeycomb-torus");
  const auto S = assemble_jacobi_system(hc.chart, hc.net);
  EXPECT_EQ(S.matrix.rows(), 10);
  EXPECT_EQ(S.matrix.cols(), 10);
  const auto eq = load_case("sphere-equator");
  const auto L = assemble_jacobi_system(eq.chart, eq.net);
  EXPECT_EQ(L.matrix.rows(), 2);
  EXPECT_LE((L.phi[0].back() - Mat::Identity(2, 2)).norm(), 1e-6);
}

TEST(JacobiSystem, LinearInCurvatureScale) {
  // on a sphere of radius r the chart metric is r^2 g_1: K scales with r^2 * l^2 / r^2... in t-units
  // K = <R(f', e) f', e> = |f'|^2 / r^2 = l^2 / r^2, so the monodromy block depends on l / r only;
  // the equator of radius r has l = 2 pi r and an unchanged system
  const auto eq = load_case("sphere-equator");
  const auto S1 = assemble_jacobi_system(eq.chart, eq.net);
  const auto S2 = assemble_jacobi_system(MetricChart::stereographic_sphere(2.0), eq.net);
  EXPECT_LE((S1.matrix - S2.matrix).norm(), 1e-6);
  const auto K1 = jacobi_ode_coefficients(eq.chart, eq.net, 0);
  const auto K2 = jacobi_ode_coefficients(MetricChart::stereographic_sphere(2.0), eq.net, 0);
  EXPECT_NEAR(K2[7](0, 0), K1[7](0, 0), 1e-6 * K1[7](0, 0));
}

TEST(JacobiKernel, Dimensions) {
  struct Case {
    const char* name;
    int dim;
  };
  for (const Case c : {Case{"honeycomb-torus", 2}, Case{"sphere-equator", 2}, Case{"sphere-theta", 3},
                       Case{"flat-loop", 1}}) {
    const auto ex = load_case(c.name);
    const auto K = jacobi_kernel(ex.chart, ex.net);
    EXPECT_EQ(K.dimension, c.dim) << c.name;
    EXPECT_GE(K.spectral_gap, 10.0) << c.name;
    EXPECT_FALSE(K.ill_separated) << c.name;
    for (double r : K.residuals) EXPECT_LE(r, 1e-6) << c.name;
    EXPECT_EQ(static_cast<int>(K.fields.size()), K.dimension);
  }
}

TEST(JacobiKernel, HoneycombSpansTranslations) {
  const auto hc = load_case("honeycomb-torus");
  const auto K = jacobi_kernel(hc.chart, hc.net);
  ASSERT_EQ(K.dimension, 2);
  for (const auto& J : K.fields) {
    // each field is a constant vector
    for (const auto& edge : J.values)
      for (const auto& v : edge) EXPECT_LE((v - J[0][0]).norm(), 1e-9);
  }
  Mat M(2, 2);
  M << K.fields[0][0][0], K.fields[1][0][0];
  EXPECT_GT(std::abs(M.determinant()), 1e-3);
}

TEST(JacobiKernel, KernelFieldsAreHessianNull) {
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta"}) {
    const auto ex = load_case(name);
    const auto K = jacobi_kernel(ex.chart, ex.net);
    std::mt19937_64 rng(12);
    for (const auto& J : K.fields) {
      EXPECT_LE(field_vertex_mismatch(ex.net, J), 1e-9) << name;
      for (int i = 0; i < 50; ++i) {
        const auto X = random_smooth_field(ex.net, rng);
        EXPECT_LE(std::abs(hessian_form(ex.chart, ex.net, X, J)), 1e-5 * field_norm(X)) << name;
      }
    }
  }
}

TEST(JacobiKernel, InvariantUnderScalingRefinementAndMultiplicity) {
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta"}) {
    const auto ex = load_case(name);
    const int dim = jacobi_kernel(ex.chart, ex.net).dimension;
    for (double c : {0.5, 2.0}) EXPECT_EQ(jacobi_kernel(scaled_metric(ex.chart, c), ex.net).dimension, dim) << name;
    const auto fine = load_case(name, 128);
    EXPECT_EQ(jacobi_kernel(fine.chart, fine.net).dimension, dim) << name;
  }
  const auto eq = load_case("sphere-equator");
  for (int n : {1, 2, 3})
    EXPECT_EQ(jacobi_kernel(eq.chart, eq.net.with_graph(eq.graph.with_multiplicity(n))).dimension, 2);
}

TEST(ClassifyField, Examples) {
  const auto fl = load_case("flat-loop");
  const auto T = tangential_field(fl.net, {[](double) { return 0.3; }});
  EXPECT_TRUE(classify_field(fl.chart, fl.net, T).tangential);
  const auto hc = load_case("honeycomb-torus");
  const auto K = jacobi_kernel(hc.chart, hc.net);
  for (const auto& J : K.fields) EXPECT_FALSE(classify_field(hc.chart, hc.net, J).tangential);
  const auto eq = load_case("sphere-equator");
  NetField S = NetField::zero(eq.net);
  for (int k = 0; k <= 64; ++k) S[0][k] = std::sin(2 * kPi * k / 64) * eq.net.samples(0)[k];
  const auto split = classify_field(eq.chart, eq.net, S);
  EXPECT_FALSE(split.tangential);
  EXPECT_NEAR(split.normal_ratio, 1.0, 1e-9);
}

TEST(Nondegeneracy, TestNetsAreDegenerate) {
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta"}) {
    const auto ex = load_case(name);
    const auto v = is_nondegenerate(ex.chart, ex.net);
    EXPECT_EQ(v.verdict, Verdict::Degenerate) << name;
    EXPECT_EQ(v.kernel_dimension, v.kernel.dimension);
  }
}

TEST(Nondegeneracy, RejectsNotGoodGraphs) {
  const auto hc = load_case("honeycomb-torus");
  const WeightedMultigraph two({"A", "B"}, {{"E1", "A", "B"}, {"E2", "A", "B"}});
  const GeodesicNet net(two, {hc.net.samples(0), hc.net.samples(1)});
  EXPECT_THROW(is_nondegenerate(hc.chart, net), ValidationError);
}

TEST(ReducedHessian, AgreesWithShooting) {
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta", "flat-loop"}) {
    const auto ex = load_case(name);
    const auto H = reduced_hessian_fd(ex.chart, ex.net);
    EXPECT_EQ(H.kernel_dimension, jacobi_kernel(ex.chart, ex.net).dimension) << name;
    EXPECT_GE(H.spectral_gap, 10.0) << name;
    EXPECT_LE((H.matrix - H.matrix.transpose()).norm() / H.matrix.norm(), 1e-8) << name;
  }
}

TEST(ReducedHessian, EquatorKernelIsSinCos) {
  const auto eq = load_case("sphere-equator");
  const auto H = reduced_hessian_fd(eq.chart, eq.net);
  ASSERT_EQ(H.kernel_dimension, 2);
  // basis k is the normal hat at sample k, so coefficients are profile samples
  for (auto profile : {+[](double t) { return std::sin(2 * kPi * t); }, +[](double t) { return std::cos(2 * kPi * t); }}) {
    Vec p(64);
    for (int k = 0; k < 64; ++k) p[k] = profile(k / 64.0);
    const Vec proj = H.kernel * (H.kernel.transpose() * p);
    EXPECT_GE(proj.norm() / p.norm(), 0.999);
  }
}
