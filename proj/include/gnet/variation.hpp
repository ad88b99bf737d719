#pragma once

// First and second variation of length along a discretized net.

#include "gnet/net.hpp"

#include <sstream>

namespace gnet {

inline constexpr double kStationarityTol = 1e-5;
inline constexpr double kHessianStep = 1e-4;

/// Per-edge quantities shared by the variation operators.
struct EdgeGeometry {
  std::shared_ptr<const GridOps> ops;
  std::vector<Vec> x, dx, ddx;
  std::vector<Mat> g;
  std::vector<Christoffel> gamma;
  double length = 0.0;
  int multiplicity = 1;

  int intervals() const { return ops->intervals(); }
  double speed(int k) const { return std::sqrt(dx[k].dot(g[k] * dx[k])); }
  /// Component of y g-orthogonal to the velocity at sample k.
  Vec perp(int k, const Vec& y) const { return y - (dx[k].dot(g[k] * y) / dx[k].dot(g[k] * dx[k])) * dx[k]; }
  /// Covariant derivative D y + Gamma(f', y) of a field sampled on the edge.
  std::vector<Vec> covariant_derivative(const std::vector<Vec>& y) const {
    std::vector<Vec> d = ops->derivative<Vec>(y);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += gamma[k].contract(dx[k], y[k]);
    return d;
  }
};

inline EdgeGeometry edge_geometry(const MetricChart& chart, const GeodesicNet& net, int e) {
  EdgeGeometry eg;
  eg.ops = grid_ops(net.intervals(e));
  eg.x = net.samples(e);
  eg.dx = eg.ops->derivative<Vec>(eg.x);
  eg.ddx = eg.ops->second_derivative<Vec>(eg.x);
  std::vector<double> speed(eg.x.size());
  for (std::size_t k = 0; k < eg.x.size(); ++k) {
    const MetricJet j = chart.jet(eg.x[k]);
    eg.gamma.push_back(christoffel_from_jet(j));
    eg.g.push_back(j.g);
    speed[k] = std::sqrt(eg.dx[k].dot(j.g * eg.dx[k]));
  }
  eg.length = eg.ops->integrate(speed);
  eg.multiplicity = net.multiplicity(e);
  return eg;
}

inline std::vector<EdgeGeometry> net_geometry(const MetricChart& chart, const GeodesicNet& net) {
  std::vector<EdgeGeometry> out;
  for (int e = 0; e < net.edge_count(); ++e) out.push_back(edge_geometry(chart, net, e));
  return out;
}

// ---------------------------------------------------------------------------
// Stationarity

struct StationarityReport {
  std::vector<std::vector<Vec>> edge_residual;  // covariant acceleration in arc-length units
  std::vector<double> edge_max;                 // max g-norm per edge
  std::vector<Vec> balance;                     // V(v)
  std::vector<double> balance_norm;
  double edge_part = 0.0;
  double vertex_part = 0.0;
  double aggregate = 0.0;

  bool stationary(double tol) const { return aggregate <= tol; }
};

/// V(v) = sum over (E,i) at v of (-1)^{i+1} n(E) f'_E(i)/|f'_E(i)|.
inline Vec vertex_balance(const MetricChart& g, const GeodesicNet& net, int v) {
  Vec out = Vec::Zero(net.dim());
  for (const auto& t : vertex_unit_tangents(g, net, v)) out -= t.multiplicity * t.tangent;
  return out;
}

/// Edge part: max over interior samples of |D^2 f + Gamma(Df, Df)|_g / l(E)^2,
/// the covariant acceleration of the arc-length parametrization of a
/// constant-speed edge. The curve is stored at every sample, but the one-sided
/// endpoint stencils carry truncation error the vertex balance already covers.
/// Vertex part: max |V(v)|_g.
inline StationarityReport stationarity_residual(const MetricChart& g, const GeodesicNet& net) {
  StationarityReport r;
  for (int e = 0; e < net.edge_count(); ++e) {
    const EdgeGeometry eg = edge_geometry(g, net, e);
    const double l2 = eg.length * eg.length;
    std::vector<Vec> acc(eg.x.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < eg.x.size(); ++k) {
      acc[k] = (eg.ddx[k] + eg.gamma[k].contract(eg.dx[k], eg.dx[k])) / l2;
      if (k > 0 && k + 1 < eg.x.size()) worst = std::max(worst, std::sqrt(acc[k].dot(eg.g[k] * acc[k])));
    }
    r.edge_residual.push_back(std::move(acc));
    r.edge_max.push_back(worst);
    r.edge_part = std::max(r.edge_part, worst);
  }
  for (int v = 0; v < net.graph().vertex_count(); ++v) {
    const Vec b = vertex_balance(g, net, v);
    const double nb = g.norm(net.vertex_point(v), b);
    r.balance.push_back(b);
    r.balance_norm.push_back(nb);
    r.vertex_part = std::max(r.vertex_part, nb);
  }
  r.aggregate = std::max(r.edge_part, r.vertex_part);
  return r;
}

/// Hessian-level operators are defined at stationary nets only. Warns when the
/// residual lies in (tol, 100 tol] and throws above that.
inline void require_stationary(const MetricChart& g, const GeodesicNet& net, double tol, const char* context) {
  if (tol <= 0) return;
  const double res = stationarity_residual(g, net).aggregate;
  if (res <= tol) return;
  std::ostringstream msg;
  msg << context << ": net is not stationary (residual " << res << ", tolerance " << tol << ")";
  if (res > 100 * tol) throw SolverError(SolverError::Kind::NotStationary, msg.str());
  warn(msg.str());
}

/// sum_E n(E) int g(X', f')/|f'| dt with X' the covariant derivative. This is
/// the exact derivative of the discrete length along net (+) sX.
inline double first_variation(const MetricChart& g, const GeodesicNet& net, const NetField& X) {
  check_shape(net, X);
  double total = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const EdgeGeometry eg = edge_geometry(g, net, e);
    const auto dX = eg.covariant_derivative(X[e]);
    std::vector<double> integrand(eg.x.size());
    for (std::size_t k = 0; k < eg.x.size(); ++k) integrand[k] = dX[k].dot(eg.g[k] * eg.dx[k]) / eg.speed(int(k));
    total += eg.multiplicity * eg.ops->integrate(integrand);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Second variation

/// A_E(Y) = -(n/l)[ (Y'')^perp + R(f', Y^perp) f' ] on the samples of edge e.
inline std::vector<Vec> apply_A_E(const EdgeGeometry& eg, const MetricChart& g, const std::vector<Vec>& Y) {
  const auto dY = eg.covariant_derivative(Y);
  const auto ddY = eg.covariant_derivative(dY);
  std::vector<Vec> out(Y.size());
  const double c = -eg.multiplicity / eg.length;
  for (std::size_t k = 0; k < Y.size(); ++k) {
    const int kk = static_cast<int>(k);
    const RiemannTensor R = riemann(g, eg.x[k]);
    out[k] = c * eg.perp(kk, ddY[k] + R(eg.dx[k], eg.perp(kk, Y[k]), eg.dx[k]));
  }
  return out;
}

inline std::vector<Vec> apply_A_E(const MetricChart& g, const GeodesicNet& net, int e, const NetField& Y,
                                  double stationarity_tol = kStationarityTol) {
  check_shape(net, Y);
  require_stationary(g, net, stationarity_tol, "apply_A_E");
  return apply_A_E(edge_geometry(g, net, e), g, Y[e]);
}

/// B_v(Y) = sum over (E,i) at v of (-1)^{i+1} (n/l) (Y'_E(i))^perp.
inline Vec apply_B_v(const std::vector<EdgeGeometry>& geo, const GeodesicNet& net, int v, const NetField& Y) {
  Vec out = Vec::Zero(net.dim());
  for (const auto& p : star(net.graph(), v).pairs) {
    const EdgeGeometry& eg = geo[p.edge];
    const int k = p.end == 0 ? 0 : eg.intervals();
    const Vec dY = eg.ops->apply<Vec>(eg.ops->d1(k), Y[p.edge]) + eg.gamma[k].contract(eg.dx[k], Y[p.edge][k]);
    const double sign = p.end == 0 ? -1.0 : 1.0;
    out += sign * (eg.multiplicity / eg.length) * eg.perp(k, dY);
  }
  return out;
}

inline Vec apply_B_v(const MetricChart& g, const GeodesicNet& net, int v, const NetField& Y,
                     double stationarity_tol = kStationarityTol) {
  check_shape(net, Y);
  require_stationary(g, net, stationarity_tol, "apply_B_v");
  return apply_B_v(net_geometry(g, net), net, v, Y);
}

/// Hess(X, Y) = sum_E int g(A_E(Y), X) dt + sum_v g(B_v(Y), X(v)).
inline double hessian_form(const MetricChart& g, const GeodesicNet& net, const NetField& X, const NetField& Y,
                           double stationarity_tol = kStationarityTol) {
  check_shape(net, X);
  check_shape(net, Y);
  require_stationary(g, net, stationarity_tol, "hessian_form");
  const auto geo = net_geometry(g, net);
  double total = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto A = apply_A_E(geo[e], g, Y[e]);
    std::vector<double> integrand(A.size());
    for (std::size_t k = 0; k < A.size(); ++k) integrand[k] = A[k].dot(geo[e].g[k] * X[e][k]);
    total += geo[e].ops->integrate(integrand);
  }
  for (int v = 0; v < net.graph().vertex_count(); ++v) {
    const auto p = star(net.graph(), v).preferred;
    const EdgeGeometry& eg = geo[p.edge];
    const int k = p.end == 0 ? 0 : eg.intervals();
    total += apply_B_v(geo, net, v, Y).dot(eg.g[k] * X[p.edge][k]);
  }
  return total;
}

/// Mixed central difference of l_g(net (+) (sX + xY)) at (0, 0).
inline double hessian_fd_oracle(const MetricChart& g, const GeodesicNet& net, const NetField& X, const NetField& Y,
                                double step = kHessianStep) {
  if (!(step >= 1e-8)) throw ValidationError("hessian_fd_oracle: step below 1e-8 underflows the difference");
  check_shape(net, X);
  check_shape(net, Y);
  auto L = [&](double s, double x) { return length(g, displaced(g, net, s * X + x * Y, 1.0)); };
  return (L(step, step) - L(step, -step) - L(-step, step) + L(-step, -step)) / (4.0 * step * step);
}

}  // namespace gnet
