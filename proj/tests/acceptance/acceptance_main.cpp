// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "gnet/harness/battery.hpp"
#include "gnet/harness/cases.hpp"
#include "gnet/random.hpp"
#include "gnet/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

using namespace gnet;
using harness::load_case;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

void stationarity(Outcome& o) {
  double worst_res = 0.0;
  for (const char* name : {"honeycomb-torus", "sphere-theta"}) {
    const auto ex = load_case(name);
    const double r = stationarity_residual(ex.chart, ex.net).aggregate;
    o.require(r <= 1e-5, std::string(name) + " residual");
    worst_res = std::max(worst_res, r);
  }
  const auto eq = load_case("sphere-equator", 256);
  const double req = stationarity_residual(eq.chart, eq.net).aggregate;
  o.require(req <= 1e-4, "equator residual at N=256");

  double worst_fv = 0.0;
  for (const char* name : {"honeycomb-torus", "sphere-theta", "sphere-equator"}) {
    const auto ex = load_case(name);
    std::mt19937_64 rng(101);
    for (int i = 0; i < 100; ++i) {
      const auto X = random_smooth_field(ex.net, rng);
      worst_fv = std::max(worst_fv, std::abs(first_variation(ex.chart, ex.net, X)) / field_norm(X));
    }
  }
  o.require(worst_fv <= 1e-6, "first variation");
  o.detail << "residual " << worst_res << ", equator(256) " << req << ", max |dL(X)|/|X| " << worst_fv;
}

void hessian_oracle(Outcome& o) {
  double worst_rel = 0.0, worst_sym = 0.0;
  for (const char* name : {"honeycomb-torus", "sphere-theta", "sphere-equator"}) {
    const auto ex = load_case(name);
    std::mt19937_64 rng(202);
    for (int i = 0; i < 50; ++i) {
      const auto X = random_smooth_field(ex.net, rng), Y = random_smooth_field(ex.net, rng);
      const double h = hessian_form(ex.chart, ex.net, X, Y), hs = hessian_form(ex.chart, ex.net, Y, X);
      const double fd = hessian_fd_oracle(ex.chart, ex.net, X, Y);
      const double diag = std::sqrt(std::abs(hessian_form(ex.chart, ex.net, X, X)) *
                                    std::abs(hessian_form(ex.chart, ex.net, Y, Y)));
      worst_rel = std::max(worst_rel, std::abs(h - fd) / std::max({std::abs(fd), diag, 1e-12}));
      worst_sym = std::max(worst_sym, std::abs(h - hs) / (field_norm(X) * field_norm(Y)));
    }
  }
  o.require(worst_rel <= 1e-5, "form vs oracle");
  o.require(worst_sym <= 1e-6, "symmetry");
  o.detail << "max relative gap " << worst_rel << ", symmetry defect " << worst_sym;
}

void kernel_dimensions(Outcome& o) {
  for (const auto& [name, dim] : {std::pair{"honeycomb-torus", 2}, {"sphere-equator", 2}, {"sphere-theta", 3}}) {
    const auto ex = load_case(name);
    const auto K = jacobi_kernel(ex.chart, ex.net);
    const auto H = reduced_hessian_fd(ex.chart, ex.net);
    o.require(K.dimension == dim && H.kernel_dimension == dim, std::string(name) + " dimension");
    o.require(K.spectral_gap >= 10.0 && H.spectral_gap >= 10.0, std::string(name) + " gap");
    if (o.detail.tellp() > 0) o.detail << "; ";
    o.detail << name << " " << K.dimension << "/" << H.kernel_dimension << " (gaps " << K.spectral_gap << ", "
             << H.spectral_gap << ")";
  }
}

void verdicts(Outcome& o) {
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta"}) {
    const auto ex = load_case(name);
    o.require(is_nondegenerate(ex.chart, ex.net).verdict == Verdict::Degenerate, std::string(name) + " Degenerate");
  }
  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(1);
  const auto h = random_bump_field(hc.chart, hc.net, rng);
  std::vector<MetricChart> path;
  for (int i = 0; i <= 5; ++i) path.push_back(conformal_family(hc.chart, h, 0.01 * i));
  const auto cont = continue_family(path, hc.net);
  const auto v = is_nondegenerate(path.back(), cont.nets.back());
  o.require(v.verdict == Verdict::Nondegenerate, "bumped honeycomb Nondegenerate");
  o.detail << "test nets Degenerate; bumped honeycomb at x=0.05: " << to_string(v.verdict) << " (gap "
           << v.kernel.spectral_gap << ")";
}

void condition_c(Outcome& o) {
  for (const char* name : {"honeycomb-torus", "sphere-equator"}) {
    const auto ex = load_case(name);
    const auto v = is_nondegenerate(ex.chart, ex.net);
    double worst_gap = 0.0, min_value = std::numeric_limits<double>::infinity();
    for (const auto& J : v.kernel.fields) {
      const auto b = build_condition_C_bump(ex.chart, ex.net, J);
      const auto m = mixed_second_derivative(ex.chart, b.h, ex.net, J);
      min_value = std::min(min_value, m.closed_form);
      worst_gap = std::max(worst_gap, m.relative_gap());
    }
    o.require(!v.kernel.fields.empty() && min_value > 0.0, std::string(name) + " positive");
    o.require(worst_gap <= 1e-4, std::string(name) + " closed form vs FD");
    const auto br = break_degeneracy(ex.chart, ex.net);
    o.require(br.verdict.kernel_dimension == 0 && br.bumps.size() <= 3, std::string(name) + " break");
    if (o.detail.tellp() > 0) o.detail << "; ";
    o.detail << name << ": min d2 " << min_value << ", gap " << worst_gap << ", " << br.bumps.size()
             << " bump(s) to dim " << br.verdict.kernel_dimension;
  }
}

void chart_machinery(Outcome& o) {
  std::mt19937_64 rng(606);
  const double xi = harness::xi_identity_error(rng, 1000, 64);
  const double rep = harness::reparam_invariance_error(rng, 20, 5, 64);
  o.require(xi <= 1e-9, "xi identity");
  o.require(rep <= 1e-7, "reparametrization");
  int checks = 0, agree = 0;
  for (const auto& name : harness::case_names()) {
    const auto ex = load_case(name);
    const auto b = harness::chart_battery(ex.chart, ex.net, rng, 5);
    o.require(b.center_stationary, name + " center stationary");
    o.require(b.net_roundtrip <= 1e-8, name + " roundtrip");
    checks += b.equivalence_checks;
    agree += b.equivalence_agree;
  }
  o.require(checks == agree, "equivalence");
  o.detail << "xi identity " << xi << ", reparam " << rep << ", equivalence " << agree << "/" << checks;
}

void convergence(Outcome& o) {
  // circle of radius 0.7 about the origin, non-uniform parameter
  const auto sphere = MetricChart::stereographic_sphere();
  const double exact = 1.1 * 0.7 * 2.0 / (1.0 + 0.49);
  auto arc = [](int n) {
    std::vector<Vec> pts;
    for (int k = 0; k <= n; ++k) {
      const double t = double(k) / n, a = 0.2 + 1.1 * (t + 0.3 * t * (1 - t));
      pts.push_back(make_vec({0.7 * std::cos(a), 0.7 * std::sin(a)}));
    }
    return GeodesicNet(WeightedMultigraph({"a", "b"}, {{"E", "a", "b"}, {"F", "a", "b"}}), {pts, pts});
  };
  double order = std::numeric_limits<double>::infinity(), prev = 0.0;
  for (int n : {10, 20, 40}) {
    const double err = std::abs(edge_length(sphere, arc(n), 0) - exact);
    if (prev > 0) order = std::min(order, std::log2(prev / err));
    prev = err;
  }
  o.require(order >= 1.9, "quadrature order");

  const auto hc = load_case("honeycomb-torus");
  std::mt19937_64 rng(5);
  SolveOptions so;
  so.tolerance = 1e-10;
  const auto r = solve_stationary(hc.chart, jitter_net(hc.chart, hc.net, rng, 0.03), so);
  const auto C = quadratic_tail_constant(r);
  o.require(C.has_value() && *C <= 10.0, "quadratic tail");

  double drift = 0.0;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 5; ++i) {
    const Vec p = make_vec({u(rng), u(rng)}), v = make_vec({u(rng), u(rng)});
    const auto path = geodesic_integrate(sphere, p, v, 1.0, 1000);
    const double s0 = sphere.norm(p, v);
    for (std::size_t k = 1; k < path.points.size(); ++k) {
      const double travelled = s0 * double(k) / 1000;
      drift = std::max(drift, std::abs(sphere.norm(path.points[k], path.velocities[k]) - s0) / s0 / travelled);
    }
  }
  o.require(drift <= 1e-8, "geodesic speed drift");
  o.detail << "quadrature order " << order << ", tail constant " << (C ? *C : -1.0) << " after " << r.iterations()
           << " iterations, speed drift " << drift << " per unit length";
}

void invariance(Outcome& o) {
  double worst_len = 0.0;
  for (const char* name : {"honeycomb-torus", "sphere-equator", "sphere-theta"}) {
    const auto ex = load_case(name);
    const int dim = jacobi_kernel(ex.chart, ex.net).dimension;
    for (double c : {0.5, 2.0}) {
      const auto g = scaled_metric(ex.chart, c);
      o.require(jacobi_kernel(g, ex.net).dimension == dim, std::string(name) + " scaling");
      const double L = length(ex.chart, ex.net);
      worst_len = std::max(worst_len, std::abs(length(g, ex.net) - c * L) / (c * L));
    }
    const auto fine = load_case(name, 128);
    o.require(jacobi_kernel(fine.chart, fine.net).dimension == dim, std::string(name) + " refinement");
  }
  const auto eq = load_case("sphere-equator");
  const double L1 = length(eq.chart, eq.net);
  for (int n : {1, 2, 3}) {
    const auto net = eq.net.with_graph(eq.graph.with_multiplicity(n));
    o.require(jacobi_kernel(eq.chart, net).dimension == 2, "multiplicity " + std::to_string(n));
    worst_len = std::max(worst_len, std::abs(length(eq.chart, net) - n * L1) / (n * L1));
  }
  o.require(worst_len <= 1e-14, "length linearity");
  o.detail << "kernel dimensions unchanged; max relative length defect " << worst_len;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Criterion>> criteria = {
      {"stationarity suite", stationarity}, {"hessian oracle", hessian_oracle},
      {"jacobi kernel dimensions", kernel_dimensions}, {"nondegeneracy verdicts", verdicts},
      {"condition (C) pipeline", condition_c}, {"chart machinery", chart_machinery},
      {"convergence orders", convergence}, {"invariance battery", invariance}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.detail.precision(3);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > 60.0) o.require(false, "time limit");
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed;
}
