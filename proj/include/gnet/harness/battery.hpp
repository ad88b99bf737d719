#pragma once

// Chart-machinery checks shared by the CLI and the acceptance run.

#include "gnet/localcoords.hpp"
#include "gnet/random.hpp"

#include <numbers>

namespace gnet::harness {

struct ChartBattery {
  double xi_identity = 0.0;     // max |xi'(xi(c)) - c| over random in-radius coordinates
  double reparam_invariance = 0.0;  // max change of xi' under reparametrization
  double net_roundtrip = 0.0;   // max |lambda(coordinates_of(f)) - f| on net samples
  int equivalence_checks = 0;
  int equivalence_agree = 0;
  bool center_stationary = false;
};

namespace detail {

// u(t) = sum_m c_m sin(m pi t + phase_m)
struct Profile {
  std::vector<Vec> coef;
  std::vector<double> phase;
  Vec operator()(double t) const {
    Vec out = Vec::Zero(coef.front().size());
    for (std::size_t m = 0; m < coef.size(); ++m) out += std::sin((m + 1) * std::numbers::pi * t + phase[m]) * coef[m];
    return out;
  }
};

inline Profile random_profile(std::mt19937_64& rng, int dim, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Profile p;
  for (int m = 1; m <= 3; ++m) {
    Vec c(dim);
    for (int i = 0; i < dim; ++i) c[i] = amplitude * u(rng) / (3.0 * m);
    p.coef.push_back(c);
    p.phase.push_back(std::numbers::pi * u(rng));
  }
  return p;
}

inline double coord_distance(const PathCoord& x, const PathCoord& y) {
  double d = std::max(std::abs(x.a - y.a), std::abs(x.b - y.b));
  for (std::size_t k = 0; k < x.u.size(); ++k) d = std::max(d, (x.u[k] - y.u[k]).lpNorm<Eigen::Infinity>());
  return d;
}

}  // namespace detail

/// xi' o xi on `count` random coordinates within the default radii (normal
/// dimension 1 and 2 alternating).
inline double xi_identity_error(std::mt19937_64& rng, int count = 1000, int N = 64) {
  const ChartRadii r;
  std::uniform_real_distribution<double> u(-0.9 * r.longitudinal, 0.9 * r.longitudinal);
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    PathCoord c{u(rng), 1.0 + u(rng), {}};
    const auto prof = detail::random_profile(rng, 1 + i % 2, 0.9 * r.normal);
    for (int k = 0; k <= N; ++k) c.u.push_back(prof(double(k) / N));
    worst = std::max(worst, detail::coord_distance(xi_prime(xi(c, r), r), c));
  }
  return worst;
}

/// Max change of xi' when `curves` random planar curves are resampled under
/// `reps` random diffeomorphisms of [0, 1] each.
inline double reparam_invariance_error(std::mt19937_64& rng, int curves = 20, int reps = 5, int N = 64) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ChartRadii r;
  double worst = 0.0;
  for (int i = 0; i < curves; ++i) {
    const double a = 0.05 * u(rng), b = 1.0 + 0.05 * u(rng);
    const auto prof = detail::random_profile(rng, 1, 0.08);
    auto at = [&](double t) {
      Vec out(2);
      out[0] = (1 - t) * a + t * b;
      out.tail(1) = prof(t);
      return out;
    };
    std::vector<Vec> base;
    for (int k = 0; k <= N; ++k) base.push_back(at(double(k) / N));
    const auto ref = xi_prime(base, r);
    for (int rep = 0; rep < reps; ++rep) {
      const double c1 = 0.3 * u(rng), c2 = 0.2 * u(rng);
      std::vector<Vec> moved;
      for (int k = 0; k <= N; ++k) {
        const double t = double(k) / N;
        const double tau = t + c1 * std::sin(std::numbers::pi * t) / std::numbers::pi +
                           c2 * std::sin(2 * std::numbers::pi * t) / (2 * std::numbers::pi);
        moved.push_back(at(tau));
      }
      worst = std::max(worst, detail::coord_distance(xi_prime(moved, r), ref));
    }
  }
  return worst;
}

/// Equivalence of chart and ambient stationarity on the center and on
/// `jittered` variants (amplitudes in [1e-3, 3e-2]), plus the net round trip.
inline ChartBattery chart_battery(const MetricChart& g, const GeodesicNet& net, std::mt19937_64& rng, int jittered,
                                  double tol = 1e-5) {
  ChartBattery out;
  const auto chart = build_chart(g, net);
  const auto center = center_coordinates(chart);
  const auto back = lambda_map(coordinates_of(chart, net));
  for (int e = 0; e < net.edge_count(); ++e)
    for (std::size_t k = 0; k < net.samples(e).size(); ++k)
      out.net_roundtrip = std::max(out.net_roundtrip, (back.samples(e)[k] - net.samples(e)[k]).norm());
  const auto c0 = stationarity_equivalence_check(g, center, tol);
  out.center_stationary = c0.chart_stationary;
  out.equivalence_checks = 1;
  out.equivalence_agree = c0.agree ? 1 : 0;
  std::uniform_real_distribution<double> amp(1e-3, 3e-2);
  for (int i = 0; i < jittered; ++i) {
    const auto s = stationarity_equivalence_check(g, coordinates_of(chart, jitter_net(g, net, rng, amp(rng))), tol);
    ++out.equivalence_checks;
    out.equivalence_agree += s.agree ? 1 : 0;
  }
  return out;
}

}  // namespace gnet::harness
