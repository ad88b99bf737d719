#pragma once

// Per-edge (a, b, u) coordinates around a smooth reference net.
//
// Each edge of the chart center f1 is extended past both ends by geodesic
// integration to c : [-eta, 1 + eta] -> R^n, and its normal bundle is
// trivialized by a Euclidean parallel frame e_1..e_{n-1}. A point (s, u) of
// G = (-eta, 1 + eta) x R^{n-1} maps to c(s) + sum_k u_k e_k(s).

#include "gnet/multigraph.hpp"
#include "gnet/net.hpp"
#include "gnet/variation.hpp"

#include <memory>

namespace gnet {

inline constexpr double kChartExtension = 0.2;
inline constexpr double kChartRadius = 0.1;
inline constexpr double kCoordinateStep = 1e-6;

/// Chart radii: |a|, |b - 1| < longitudinal (parameter units) and
/// |u|_inf < normal (chart length units).
struct ChartRadii {
  double longitudinal = kChartRadius;
  double normal = kChartRadius;
};

struct PathCoord {
  double a = 0.0;
  double b = 1.0;
  std::vector<Vec> u;  // normal displacement at the edge grid nodes

  int intervals() const { return static_cast<int>(u.size()) - 1; }
  /// (c_i, u(i)): the endpoint coordinates in G.
  Vec end(int i) const {
    Vec out(u.front().size() + 1);
    out[0] = i == 0 ? a : b;
    out.tail(u.front().size()) = i == 0 ? u.front() : u.back();
    return out;
  }
};

inline void check_radii(const PathCoord& c, const ChartRadii& r) {
  if (!(std::abs(c.a) < r.longitudinal) || !(std::abs(c.b - 1.0) < r.longitudinal))
    throw DomainError("path coordinate (a, b) outside the chart radius " + std::to_string(r.longitudinal));
  for (const auto& v : c.u)
    if (!(v.lpNorm<Eigen::Infinity>() < r.normal))
      throw DomainError("normal displacement exceeds the chart radius " + std::to_string(r.normal));
}

/// v(t) = ((1 - t) a + t b, u(t)) on the edge grid.
inline std::vector<Vec> xi(const PathCoord& c, const ChartRadii& r) {
  check_radii(c, r);
  const int N = c.intervals();
  const Eigen::Index m = c.u.front().size();
  std::vector<Vec> out(N + 1, Vec(m + 1));
  for (int k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / N;
    out[k][0] = (1.0 - t) * c.a + t * c.b;
    out[k].tail(m) = c.u[k];
  }
  return out;
}

/// Inverse of xi modulo reparametrization: a, b are the longitudinal ends and
/// u is resampled at the affinely spaced longitudinal values.
inline PathCoord xi_prime(const std::vector<Vec>& curve, const ChartRadii& r) {
  const int N = static_cast<int>(curve.size()) - 1;
  if (N < 1) throw ValidationError("xi_prime: curve needs at least two samples");
  const Eigen::Index m = curve.front().size() - 1;
  std::vector<double> s(N + 1);
  std::vector<Vec> u(N + 1);
  for (int k = 0; k <= N; ++k) {
    s[k] = curve[k][0];
    u[k] = curve[k].tail(m);
    if (k > 0 && !(s[k] > s[k - 1]))
      throw DomainError("xi_prime: longitudinal coordinate is not strictly increasing at sample " + std::to_string(k));
  }
  const double h = 1.0 / N;
  const LocalInterpolant<double> S(s, 0.0, h);
  const LocalInterpolant<Vec> U(u, 0.0, h);
  PathCoord out;
  out.a = s.front();
  out.b = s.back();
  out.u.resize(N + 1);
  out.u.front() = u.front();
  out.u.back() = u.back();
  int k = 0;
  for (int j = 1; j < N; ++j) {
    const double target = out.a + (out.b - out.a) * j / N;
    while (k < N - 1 && s[k + 1] <= target) ++k;
    double t = (k + (target - s[k]) / (s[k + 1] - s[k])) * h;
    for (int it = 0; it < 30; ++it) {
      const double dt = (S.value(t) - target) / S.derivative(t);
      t = std::clamp(t - dt, k * h, (k + 1) * h);
      if (std::abs(dt) < 1e-15) break;
    }
    out.u[j] = U.value(t);
  }
  check_radii(out, r);
  return out;
}

// ---------------------------------------------------------------------------
// Edge charts

class EdgeChart {
 public:
  /// Extends edge e of a (smooth, near-geodesic) net by `extension` in the
  /// parameter on both sides.
  EdgeChart(const MetricChart& g, const GeodesicNet& net, int e, double extension = kChartExtension) {
    const auto& x = net.samples(e);
    N_ = net.intervals(e);
    h_ = 1.0 / N_;
    ext_ = static_cast<int>(std::ceil(extension * N_ - 1e-9));
    eta_ = ext_ * h_;
    const auto d = edge_velocity(net, e);
    constexpr int sub = 8;
    const auto fwd = geodesic_integrate(g, x.back(), d.back(), eta_, ext_ * sub);
    const auto bwd = geodesic_integrate(g, x.front(), -d.front(), eta_, ext_ * sub);
    std::vector<Vec> c;
    for (int j = ext_; j >= 1; --j) c.push_back(bwd.points[j * sub]);
    c.insert(c.end(), x.begin(), x.end());
    for (int j = 1; j <= ext_; ++j) c.push_back(fwd.points[j * sub]);
    c_ = std::make_shared<LocalInterpolant<Vec>>(c, -eta_, h_);
    n_ = static_cast<int>(x.front().size());
    if (n_ < 2) throw ValidationError("edge charts need dimension >= 2");
    if (n_ > 2) build_rotation_minimizing_frame(c);

    double kappa = 0.0, len = 0.0;
    const int M = static_cast<int>(c.size()) - 1;
    for (int j = 0; j <= M; ++j) {
      const double s = -eta_ + j * h_;
      const Vec c1 = c_->derivative(s), c2 = c_->second_derivative(s);
      const double sp = c1.norm();
      kappa = std::max(kappa, (c2 - c2.dot(c1) / (sp * sp) * c1).norm() / (sp * sp));
      if (j >= ext_ && j <= ext_ + N_) len += sp * h_;
    }
    max_curvature_ = kappa;
    euclidean_length_ = len;
  }

  int dim() const { return n_; }
  int intervals() const { return N_; }
  double extension() const { return eta_; }
  double max_curvature() const { return max_curvature_; }
  double euclidean_length() const { return euclidean_length_; }

  Vec center(double s) const { return c_->value(checked(s)); }

  /// Columns e_1..e_{n-1} at s.
  Mat frame(double s) const {
    const Vec c1 = c_->derivative(checked(s));
    Mat E(n_, n_ - 1);
    if (n_ == 2) {
      E.col(0) = make_vec({-c1[1], c1[0]}) / c1.norm();
      return E;
    }
    const Mat raw = frame_->value(s);
    const Vec t = c1.normalized();
    for (int k = 0; k < n_ - 1; ++k) {
      Vec v = raw.col(k) - raw.col(k).dot(t) * t;
      for (int j = 0; j < k; ++j) v -= v.dot(E.col(j)) * E.col(j);
      E.col(k) = v.normalized();
    }
    return E;
  }

  Vec point(double s, const Vec& u) const { return center(s) + frame(s) * u; }
  Vec point(const Vec& su) const { return point(su[0], su.tail(n_ - 1)); }

  /// d(point)/d(s, u): [c' + E' u | E] with E' = -c' (c''^T E)/|c'|^2.
  Mat jacobian(double s, const Vec& u) const {
    s = checked(s);
    const Vec c1 = c_->derivative(s), c2 = c_->second_derivative(s);
    const Mat E = frame(s);
    const Mat dE = -c1 * (c2.transpose() * E) / c1.squaredNorm();
    Mat J(n_, n_);
    J.col(0) = c1 + dE * u;
    J.rightCols(n_ - 1) = E;
    return J;
  }
  Mat jacobian(const Vec& su) const { return jacobian(su[0], su.tail(n_ - 1)); }

  /// Newton inversion of point(), started from `guess` in G.
  Vec pullback(const Vec& p, Vec guess) const {
    const double scale = std::max(1.0, p.norm());
    for (int it = 0; it < 50; ++it) {
      const Vec r = point(guess) - p;
      if (r.norm() <= 1e-14 * scale) return guess;
      guess -= jacobian(guess).partialPivLu().solve(r);
      if (!std::isfinite(guess[0])) break;
    }
    if ((point(guess) - p).norm() <= 1e-11 * scale) return guess;
    throw DomainError("pullback into the edge tube did not converge");
  }
  /// Pullback started at the nearest extended grid node.
  Vec pullback(const Vec& p) const {
    const auto& c = c_->values();
    std::size_t best = 0;
    for (std::size_t j = 1; j < c.size(); ++j)
      if ((c[j] - p).squaredNorm() < (c[best] - p).squaredNorm()) best = j;
    Vec guess = Vec::Zero(n_);
    guess[0] = -eta_ + static_cast<double>(best) * h_;
    return pullback(p, guess);
  }

 private:
  double checked(double s) const {
    if (!(s >= -eta_ - 1e-12 && s <= 1.0 + eta_ + 1e-12))
      throw DomainError("longitudinal coordinate " + std::to_string(s) + " leaves the extended edge");
    return s;
  }

  // Double reflection on the extended nodes; interpolated and re-orthonormalized
  // by frame().
  void build_rotation_minimizing_frame(const std::vector<Vec>& c) {
    const int M = static_cast<int>(c.size()) - 1;
    std::vector<Vec> t(M + 1);
    for (int j = 0; j <= M; ++j) t[j] = c_->derivative(-eta_ + j * h_).normalized();
    Mat E0(n_, n_ - 1);
    {
      std::vector<Vec> basis{t[0]};
      for (int i = 0; i < n_ && static_cast<int>(basis.size()) < n_; ++i) {
        Vec v = Vec::Unit(n_, i);
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() > 1e-8) basis.push_back(v.normalized());
      }
      for (int k = 1; k < n_; ++k) E0.col(k - 1) = basis[k];
    }
    std::vector<Mat> frames{E0};
    for (int j = 0; j < M; ++j) {
      const Vec v1 = c[j + 1] - c[j];
      const double c1 = v1.squaredNorm();
      const Mat EL = frames.back() - (2.0 / c1) * v1 * (v1.transpose() * frames.back());
      const Vec tL = t[j] - (2.0 / c1) * v1.dot(t[j]) * v1;
      const Vec v2 = t[j + 1] - tL;
      const double c2 = v2.squaredNorm();
      frames.push_back(c2 > 0 ? Mat(EL - (2.0 / c2) * v2 * (v2.transpose() * EL)) : EL);
    }
    frame_ = std::make_shared<LocalInterpolant<Mat>>(frames, -eta_, h_);
  }

  int N_ = 0, n_ = 0, ext_ = 0;
  double h_ = 0.0, eta_ = 0.0, max_curvature_ = 0.0, euclidean_length_ = 0.0;
  std::shared_ptr<LocalInterpolant<Vec>> c_;
  std::shared_ptr<LocalInterpolant<Mat>> frame_;
};

// ---------------------------------------------------------------------------
// Net charts and coordinates

struct NetChart {
  GeodesicNet center;
  std::vector<EdgeChart> edges;
  std::vector<ChartRadii> radii;
  std::vector<std::array<Vec, 2>> offsets;  // lattice offset of each edge end
};

/// Chart centered at a smooth net. Radii default to 0.1 l(E) in both
/// directions (0.1 in the parameter, 0.1 l(E) normally), the normal radius
/// capped at half the tube radius 1/kappa.
inline std::shared_ptr<const NetChart> build_chart(const MetricChart& g, const GeodesicNet& center,
                                                   double extension = kChartExtension,
                                                   double radius = kChartRadius) {
  if (!(radius > 0 && radius < extension))
    throw ValidationError("chart radius must lie in (0, extension)");
  auto chart = std::make_shared<NetChart>();
  chart->center = center;
  for (int e = 0; e < center.edge_count(); ++e) {
    chart->edges.emplace_back(g, center, e, extension);
    const auto& ec = chart->edges.back();
    ChartRadii r{radius, radius * ec.euclidean_length()};
    if (ec.max_curvature() > 0) r.normal = std::min(r.normal, 0.5 / ec.max_curvature());
    chart->radii.push_back(r);
    chart->offsets.push_back({endpoint_offset(g, center, e, 0), endpoint_offset(g, center, e, 1)});
  }
  return chart;
}

struct NetCoord {
  std::shared_ptr<const NetChart> chart;
  std::vector<PathCoord> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  const WeightedMultigraph& graph() const { return chart->center.graph(); }

  /// Coordinate-space update this + s * d (d read as a tangent vector).
  NetCoord plus(const NetCoord& d, double s) const {
    NetCoord out = *this;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out.edges[e].a += s * d.edges[e].a;
      out.edges[e].b += s * d.edges[e].b;
      for (std::size_t k = 0; k < edges[e].u.size(); ++k) out.edges[e].u[k] += s * d.edges[e].u[k];
    }
    return out;
  }
};

/// (0, 1, 0) on every edge.
inline NetCoord center_coordinates(std::shared_ptr<const NetChart> chart) {
  NetCoord out{chart, {}};
  for (int e = 0; e < chart->center.edge_count(); ++e) {
    const auto& ec = chart->edges[e];
    out.edges.push_back({0.0, 1.0, std::vector<Vec>(ec.intervals() + 1, Vec::Zero(ec.dim() - 1))});
  }
  return out;
}

/// Zero tangent vector with the shape of `c`.
inline NetCoord zero_tangent(const NetCoord& c) {
  NetCoord out = c;
  for (auto& p : out.edges) {
    p.a = p.b = 0.0;
    for (auto& v : p.u) v.setZero();
  }
  return out;
}

/// Per edge: samples of point((1 - t) a + t b, u(t)). Continuity at vertices
/// holds when constraint_C vanishes; the result is not validated.
inline GeodesicNet lambda_map(const NetCoord& c) {
  std::vector<std::vector<Vec>> samples;
  for (int e = 0; e < c.edge_count(); ++e) {
    const auto v = xi(c.edges[e], c.chart->radii[e]);
    std::vector<Vec> pts;
    pts.reserve(v.size());
    for (const auto& su : v) pts.push_back(c.chart->edges[e].point(su));
    samples.push_back(std::move(pts));
  }
  return GeodesicNet(c.graph(), std::move(samples));
}

/// Coordinates of a net lying in the chart's tubes (same lattice images as
/// the center).
inline NetCoord coordinates_of(std::shared_ptr<const NetChart> chart, const GeodesicNet& net) {
  NetCoord out{chart, {}};
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto& ec = chart->edges[e];
    const auto& x = net.samples(e);
    std::vector<Vec> curve;
    Vec guess = Vec::Zero(ec.dim());
    for (const auto& p : x) {
      guess = ec.pullback(p, guess);
      curve.push_back(guess);
    }
    out.edges.push_back(xi_prime(curve, chart->radii[e]));
  }
  return out;
}

/// Differential of lambda_map at c applied to the coordinate tangent d.
inline NetField push_forward(const NetCoord& c, const NetCoord& d) {
  NetField out;
  for (int e = 0; e < c.edge_count(); ++e) {
    const auto& p = c.edges[e];
    const auto& q = d.edges[e];
    const int N = p.intervals();
    const Eigen::Index m = p.u.front().size();
    std::vector<Vec> vals;
    for (int k = 0; k <= N; ++k) {
      const double t = static_cast<double>(k) / N;
      Vec dv(m + 1);
      dv[0] = (1.0 - t) * q.a + t * q.b;
      dv.tail(m) = q.u[k];
      vals.push_back(c.chart->edges[e].jacobian((1.0 - t) * p.a + t * p.b, p.u[k]) * dv);
    }
    out.values.push_back(std::move(vals));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vertex constraint

struct ConstraintResidual {
  struct Entry {
    int vertex;
    IncidentPair pair;
    Vec value;
  };
  std::vector<Entry> entries;

  Vec stacked() const {
    Eigen::Index n = 0;
    for (const auto& e : entries) n += e.value.size();
    Vec out(n);
    Eigen::Index k = 0;
    for (const auto& e : entries) {
      out.segment(k, e.value.size()) = e.value;
      k += e.value.size();
    }
    return out;
  }
  double norm() const { return stacked().norm(); }
};

/// Endpoint `from` expressed in the coordinates of the tube of `to`.
inline Vec transfer(const NetCoord& c, const IncidentPair& from, const IncidentPair& to) {
  const auto& ch = *c.chart;
  const Vec x = ch.edges[from.edge].point(c.edges[from.edge].end(from.end)) - ch.offsets[from.edge][from.end] +
                ch.offsets[to.edge][to.end];
  return ch.edges[to.edge].pullback(x, c.edges[to.edge].end(to.end));
}

inline Vec transfer_to_preferred(const NetCoord& c, int v, const IncidentPair& p) {
  return transfer(c, p, star(c.graph(), v).preferred);
}

inline ConstraintResidual constraint_C(const NetCoord& c) {
  ConstraintResidual out;
  for (int v = 0; v < c.graph().vertex_count(); ++v) {
    const auto s = star(c.graph(), v);
    const Vec ref = c.edges[s.preferred.edge].end(s.preferred.end);
    for (const auto& p : s.pairs) {
      if (p.edge == s.preferred.edge && p.end == s.preferred.end) continue;
      out.entries.push_back({v, p, transfer_to_preferred(c, v, p) - ref});
    }
  }
  return out;
}

/// Moves every non-preferred endpoint onto its preferred partner, spreading
/// the normal correction linearly along the edge, so that C = 0 afterwards.
inline NetCoord project_to_constraint(NetCoord c) {
  for (int v = 0; v < c.graph().vertex_count(); ++v) {
    const auto s = star(c.graph(), v);
    for (const auto& p : s.pairs) {
      if (p.edge == s.preferred.edge && p.end == s.preferred.end) continue;
      auto& pc = c.edges[p.edge];
      const Vec d = transfer(c, s.preferred, p) - pc.end(p.end);
      (p.end == 0 ? pc.a : pc.b) += d[0];
      const int N = pc.intervals();
      for (int k = 0; k <= N; ++k) {
        const double t = double(k) / N;
        pc.u[k] += (p.end == 0 ? 1.0 - t : t) * d.tail(d.size() - 1);
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Lagrangian and mean curvature

/// L(t, a, b, u, w) = |d(point)(b - a, w)|_g at point((1 - t) a + t b, u).
inline double lagrangian(const MetricChart& g, const EdgeChart& ec, double t, double a, double b, const Vec& u,
                         const Vec& w) {
  const double s = (1.0 - t) * a + t * b;
  Vec dv(w.size() + 1);
  dv[0] = b - a;
  dv.tail(w.size()) = w;
  return g.norm(ec.point(s, u), ec.jacobian(s, u) * dv);
}

inline double lagrangian_L(const MetricChart& g, const NetCoord& c, int e, double t) {
  const auto& p = c.edges.at(e);
  const LocalInterpolant<Vec> U(p.u, 0.0, 1.0 / p.intervals());
  return lagrangian(g, c.chart->edges[e], t, p.a, p.b, U.value(t), U.derivative(t));
}

inline std::vector<Vec> coordinate_velocity(const PathCoord& p) {
  return grid_ops(p.intervals())->derivative(std::span<const Vec>(p.u));
}

/// sum_E n(E) int_E L dt on the edge grid.
inline double length_in_coordinates(const MetricChart& g, const NetCoord& c) {
  double total = 0.0;
  for (int e = 0; e < c.edge_count(); ++e) {
    const auto& p = c.edges[e];
    const int N = p.intervals();
    const auto w = coordinate_velocity(p);
    std::vector<double> L(N + 1);
    for (int k = 0; k <= N; ++k) L[k] = lagrangian(g, c.chart->edges[e], double(k) / N, p.a, p.b, p.u[k], w[k]);
    total += c.graph().edge(e).multiplicity * grid_ops(N)->integrate(L);
  }
  return total;
}

struct MeanCurvature {
  std::vector<std::vector<Vec>> h1;  // per edge, per sample, in R^{n-1}
  std::vector<Vec> h2;               // per vertex, in R^n
  double h1_norm = 0.0;              // max |H1|
  double h2_norm = 0.0;              // max |H2_v|
};

namespace detail {

inline double coordinate_step(double x) { return kCoordinateStep * std::max(1.0, std::abs(x)); }

struct LagrangianPartials {
  double da = 0.0, db = 0.0;
  Vec du, dw;
};

inline LagrangianPartials lagrangian_partials(const MetricChart& g, const EdgeChart& ec, double t, double a, double b,
                                              const Vec& u, const Vec& w) {
  auto L = [&](double aa, double bb, const Vec& uu, const Vec& ww) { return lagrangian(g, ec, t, aa, bb, uu, ww); };
  LagrangianPartials out;
  const double ha = coordinate_step(a), hb = coordinate_step(b);
  out.da = (L(a + ha, b, u, w) - L(a - ha, b, u, w)) / (2 * ha);
  out.db = (L(a, b + hb, u, w) - L(a, b - hb, u, w)) / (2 * hb);
  out.du.resize(u.size());
  out.dw.resize(w.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double hu = coordinate_step(u[k]), hw = coordinate_step(w[k]);
    Vec up = u, um = u, wp = w, wm = w;
    up[k] += hu;
    um[k] -= hu;
    wp[k] += hw;
    wm[k] -= hw;
    out.du[k] = (L(a, b, up, w) - L(a, b, um, w)) / (2 * hu);
    out.dw[k] = (L(a, b, u, wp) - L(a, b, u, wm)) / (2 * hw);
  }
  return out;
}

}  // namespace detail

/// H1 = n (grad_u L - d/dt grad_w L) per sample. H2_v = sum over (E,i) at v of
/// T^T A^{i,E}, where A^{0,E} = n (int dL/da, -grad_w L(0)),
/// A^{1,E} = n (int dL/db, grad_w L(1)) and T is the Jacobian of the transfer
/// from the preferred pair's coordinates to (E, i).
inline MeanCurvature mean_curvature_H(const MetricChart& g, const NetCoord& c) {
  MeanCurvature out;
  const int E = c.edge_count();
  std::vector<std::array<Vec, 2>> A(E);
  for (int e = 0; e < E; ++e) {
    const auto& p = c.edges[e];
    const auto& ec = c.chart->edges[e];
    const int N = p.intervals();
    const auto ops = grid_ops(N);
    const double n = c.graph().edge(e).multiplicity;
    const auto w = coordinate_velocity(p);
    std::vector<Vec> gu(N + 1), gw(N + 1);
    std::vector<double> La(N + 1), Lb(N + 1);
    for (int k = 0; k <= N; ++k) {
      const auto d = detail::lagrangian_partials(g, ec, double(k) / N, p.a, p.b, p.u[k], w[k]);
      gu[k] = d.du;
      gw[k] = d.dw;
      La[k] = d.da;
      Lb[k] = d.db;
    }
    const auto dgw = ops->derivative(std::span<const Vec>(gw));
    std::vector<Vec> h1(N + 1);
    for (int k = 0; k <= N; ++k) {
      h1[k] = n * (gu[k] - dgw[k]);
      out.h1_norm = std::max(out.h1_norm, h1[k].norm());
    }
    out.h1.push_back(std::move(h1));
    const Eigen::Index m = gw.front().size();
    A[e][0].resize(m + 1);
    A[e][1].resize(m + 1);
    A[e][0][0] = n * ops->integrate(La);
    A[e][0].tail(m) = -n * gw.front();
    A[e][1][0] = n * ops->integrate(Lb);
    A[e][1].tail(m) = n * gw.back();
  }
  for (int v = 0; v < c.graph().vertex_count(); ++v) {
    const auto s = star(c.graph(), v);
    const auto& pe = c.chart->edges[s.preferred.edge];
    const Mat Dv = pe.jacobian(c.edges[s.preferred.edge].end(s.preferred.end));
    Vec h2 = Vec::Zero(Dv.rows());
    for (const auto& p : s.pairs) {
      const Mat DE = c.chart->edges[p.edge].jacobian(c.edges[p.edge].end(p.end));
      const Mat T = DE.partialPivLu().solve(Dv);
      h2 += T.transpose() * A[p.edge][p.end];
    }
    out.h2_norm = std::max(out.h2_norm, h2.norm());
    out.h2.push_back(std::move(h2));
  }
  return out;
}

struct StationarityEquivalence {
  double h1 = 0.0, h2 = 0.0, constraint = 0.0, ambient = 0.0;
  double tol = 0.0;
  bool chart_stationary = false;
  bool ambient_stationary = false;
  bool agree = false;
};

/// Compares (|H1|, |H2|, |C| <= tol) with (stationarity residual of
/// lambda_map(c) <= tol).
inline StationarityEquivalence stationarity_equivalence_check(const MetricChart& g, const NetCoord& c,
                                                              double tol = kStationarityTol) {
  StationarityEquivalence r;
  r.tol = tol;
  const auto H = mean_curvature_H(g, c);
  r.h1 = H.h1_norm;
  r.h2 = H.h2_norm;
  r.constraint = constraint_C(c).norm();
  r.ambient = stationarity_residual(g, lambda_map(c)).aggregate;
  r.chart_stationary = std::max({r.h1, r.h2, r.constraint}) <= tol;
  r.ambient_stationary = r.ambient <= tol;
  r.agree = r.chart_stationary == r.ambient_stationary;
  return r;
}

/// Mixed central difference of length_in_coordinates along X and Y (tangent
/// to C = 0), each evaluation projected back onto C = 0.
inline double coordinate_hessian_fd(const MetricChart& g, const NetCoord& c, const NetCoord& X, const NetCoord& Y,
                                    double step = kHessianStep) {
  auto L = [&](double s, double r) {
    return length_in_coordinates(g, project_to_constraint(c.plus(X, s).plus(Y, r)));
  };
  return (L(step, step) - L(step, -step) - L(-step, step) + L(-step, -step)) / (4 * step * step);
}

}  // namespace gnet
