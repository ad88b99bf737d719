#pragma once

// Discretized nets: one uniformly parametrized sample array per edge.

#include "gnet/geometry.hpp"
#include "gnet/multigraph.hpp"
#include "gnet/stencil.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace gnet {

inline constexpr int kDefaultSamples = 64;
inline constexpr double kVertexTolerance = 1e-9;
inline constexpr double kImmersionThreshold = 1e-8;

/// A map Gamma -> M sampled at t_k = k/N_E on every edge. On a torus each edge
/// is stored as a continuous lift; shared endpoints agree modulo the lattice.
class GeodesicNet {
 public:
  GeodesicNet() = default;
  GeodesicNet(WeightedMultigraph graph, std::vector<std::vector<Vec>> samples, bool constant_speed = false)
      : graph_(std::move(graph)), samples_(std::move(samples)), constant_speed_(constant_speed) {
    if (static_cast<int>(samples_.size()) != graph_.edge_count())
      throw ValidationError("net has " + std::to_string(samples_.size()) + " sample arrays for " +
                            std::to_string(graph_.edge_count()) + " edges");
  }

  const WeightedMultigraph& graph() const { return graph_; }
  int edge_count() const { return graph_.edge_count(); }
  int dim() const { return samples_.empty() || samples_[0].empty() ? 0 : static_cast<int>(samples_[0][0].size()); }
  const std::vector<Vec>& samples(int e) const { return samples_.at(e); }
  const std::vector<std::vector<Vec>>& all_samples() const { return samples_; }
  int intervals(int e) const { return static_cast<int>(samples_.at(e).size()) - 1; }
  int multiplicity(int e) const { return graph_.edge(e).multiplicity; }
  bool constant_speed() const { return constant_speed_; }

  const Vec& endpoint(int e, int i) const { return i == 0 ? samples_.at(e).front() : samples_.at(e).back(); }
  /// Position of v, read from its preferred pair.
  const Vec& vertex_point(int v) const {
    const auto p = star(graph_, v).preferred;
    return endpoint(p.edge, p.end);
  }

  GeodesicNet with_samples(std::vector<std::vector<Vec>> samples, bool constant_speed = false) const {
    return GeodesicNet(graph_, std::move(samples), constant_speed);
  }
  GeodesicNet with_graph(WeightedMultigraph graph) const { return GeodesicNet(std::move(graph), samples_, constant_speed_); }

 private:
  WeightedMultigraph graph_;
  std::vector<std::vector<Vec>> samples_;
  bool constant_speed_ = false;
};

/// A vector field along a net: one vector per sample.
struct NetField {
  std::vector<std::vector<Vec>> values;

  static NetField zero(const GeodesicNet& net) {
    NetField f;
    for (int e = 0; e < net.edge_count(); ++e) f.values.emplace_back(net.samples(e).size(), Vec::Zero(net.dim()));
    return f;
  }
  const std::vector<Vec>& operator[](int e) const { return values.at(e); }
  std::vector<Vec>& operator[](int e) { return values.at(e); }

  NetField& operator+=(const NetField& o) {
    for (std::size_t e = 0; e < values.size(); ++e)
      for (std::size_t k = 0; k < values[e].size(); ++k) values[e][k] += o.values[e][k];
    return *this;
  }
  NetField& operator*=(double s) {
    for (auto& edge : values)
      for (auto& v : edge) v *= s;
    return *this;
  }
  friend NetField operator+(NetField a, const NetField& b) { return a += b; }
  friend NetField operator*(double s, NetField a) { return a *= s; }
  friend NetField operator-(NetField a, const NetField& b) { return a += -1.0 * b; }
};

inline void check_shape(const GeodesicNet& net, const NetField& f) {
  if (static_cast<int>(f.values.size()) != net.edge_count()) throw ValidationError("field/net edge count mismatch");
  for (int e = 0; e < net.edge_count(); ++e) {
    if (f.values[e].size() != net.samples(e).size())
      throw ValidationError("field/net sample count mismatch on edge '" + net.graph().edge(e).id + "'");
  }
}

/// Invariant violations of a net on a chart; empty when valid.
inline std::vector<std::string> validate_net(const MetricChart& chart, const GeodesicNet& net) {
  auto out = validate(net.graph());
  if (!out.empty()) return out;
  const int width = kDefaultStencilOrder + 1;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto& id = net.graph().edge(e).id;
    if (net.intervals(e) < width) {
      out.push_back("edge '" + id + "' has " + std::to_string(net.intervals(e)) + " intervals; at least " +
                    std::to_string(width) + " required");
      continue;
    }
    for (const auto& p : net.samples(e)) {
      if (p.size() != chart.dim()) {
        out.push_back("edge '" + id + "' has samples of dimension " + std::to_string(p.size()));
        break;
      }
      try {
        chart.check_domain(p);
      } catch (const DomainError& err) {
        out.push_back("edge '" + id + "': " + err.what());
        break;
      }
    }
  }
  if (!out.empty()) return out;
  for (int v = 0; v < net.graph().vertex_count(); ++v) {
    const auto s = star(net.graph(), v);
    const Vec& ref = net.endpoint(s.preferred.edge, s.preferred.end);
    for (const auto& p : s.pairs) {
      if (!chart.same_point(net.endpoint(p.edge, p.end), ref, kVertexTolerance)) {
        out.push_back("vertex '" + net.graph().vertex_id(v) + "': endpoint of edge '" +
                      net.graph().edge(p.edge).id + "' does not match");
      }
    }
  }
  return out;
}

inline GeodesicNet checked(const MetricChart& chart, GeodesicNet net) {
  if (auto errs = validate_net(chart, net); !errs.empty()) throw ValidationError("invalid net: " + errs.front());
  return net;
}

/// Lattice vector endpoint(E,i) - vertex_point(v); zero off tori.
inline Vec endpoint_offset(const MetricChart& chart, const GeodesicNet& net, int e, int i) {
  const int v = net.graph().edge(e).endpoint(i);
  const Vec d = net.endpoint(e, i) - net.vertex_point(v);
  const auto L = chart.lattice();
  if (!L) return Vec::Zero(d.size());
  Vec k = L->colPivHouseholderQr().solve(d);
  for (Eigen::Index j = 0; j < k.size(); ++j) k[j] = std::round(k[j]);
  return *L * k;
}

// ---------------------------------------------------------------------------
// Derivatives and length

inline std::vector<Vec> edge_velocity(const GeodesicNet& net, int e) {
  return grid_ops(net.intervals(e))->derivative<Vec>(net.samples(e));
}

inline std::vector<double> edge_speed(const MetricChart& g, const GeodesicNet& net, int e) {
  const auto d = edge_velocity(net, e);
  std::vector<double> s(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) s[k] = g.norm(net.samples(e)[k], d[k]);
  return s;
}

/// l_g(f|E) without the multiplicity.
inline double edge_length(const MetricChart& g, const GeodesicNet& net, int e) {
  return grid_ops(net.intervals(e))->integrate(edge_speed(g, net, e));
}

/// Sum over edges of n(E) l_g(f|E).
inline double length(const MetricChart& g, const GeodesicNet& net) {
  double total = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) total += net.multiplicity(e) * edge_length(g, net, e);
  return total;
}

/// Largest relative deviation of the sample speeds from their mean, per net.
inline double speed_variation(const MetricChart& g, const GeodesicNet& net) {
  double worst = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto s = edge_speed(g, net, e);
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    for (double x : s) worst = std::max(worst, std::abs(x - mean) / mean);
  }
  return worst;
}

namespace detail {

// 5-point Gauss-Legendre on [a, b].
inline double gauss5(const std::function<double(double)>& f, double a, double b) {
  static constexpr std::array<double, 5> x = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                              0.9061798459386640};
  static constexpr std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                              0.2369268850561891, 0.2369268850561891};
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * f(m + r * x[i]);
  return s * r;
}

}  // namespace detail

/// Arc-length resampling of every edge; same sample counts.
inline GeodesicNet reparametrize_constant_speed(const MetricChart& g, const GeodesicNet& net) {
  std::vector<std::vector<Vec>> out;
  for (int e = 0; e < net.edge_count(); ++e) {
    const int N = net.intervals(e);
    const auto speeds = edge_speed(g, net, e);
    double mean = 0.0;
    for (double s : speeds) mean += s;
    mean /= (N + 1);
    if (!(mean > 1e-12)) throw ValidationError("edge '" + net.graph().edge(e).id + "' has zero speed");
    for (int k = 0; k <= N; ++k) {
      if (!(speeds[k] > kImmersionThreshold * mean))
        throw ValidationError("edge '" + net.graph().edge(e).id + "' has a zero-speed sample at k=" +
                              std::to_string(k) + "; cannot reparametrize");
    }
    const LocalInterpolant<Vec> c(net.samples(e), 0.0, 1.0 / N);
    auto speed = [&](double t) { return g.norm(c.value(t), c.derivative(t)); };
    std::vector<double> cum(N + 1, 0.0);
    for (int k = 0; k < N; ++k) cum[k + 1] = cum[k] + detail::gauss5(speed, double(k) / N, double(k + 1) / N);
    const double total = cum[N];
    std::vector<Vec> pts(N + 1);
    pts.front() = net.samples(e).front();
    pts.back() = net.samples(e).back();
    int seg = 0;
    for (int j = 1; j < N; ++j) {
      const double target = total * j / N;
      while (seg < N - 1 && cum[seg + 1] < target) ++seg;
      const double a = double(seg) / N, b = double(seg + 1) / N;
      double t = a + (target - cum[seg]) / (cum[seg + 1] - cum[seg]) * (b - a);
      for (int it = 0; it < 50; ++it) {
        const double f = cum[seg] + detail::gauss5(speed, a, t) - target;
        const double step = f / speed(t);
        t = std::clamp(t - step, a, b);
        if (std::abs(step) < 1e-15) break;
      }
      pts[j] = c.value(t);
    }
    out.push_back(std::move(pts));
  }
  return net.with_samples(std::move(out), true);
}

struct VertexTangent {
  int edge = 0;
  int end = 0;
  Vec tangent;  // g-unit, pointing from the vertex into the edge
  int multiplicity = 1;
};

/// Unit tangents at v pointing into each incident edge: (-1)^i f'_E(i)/|f'_E(i)|.
inline std::vector<VertexTangent> vertex_unit_tangents(const MetricChart& g, const GeodesicNet& net, int v) {
  std::vector<VertexTangent> out;
  for (const auto& p : star(net.graph(), v).pairs) {
    const auto ops = grid_ops(net.intervals(p.edge));
    const int k = p.end == 0 ? 0 : net.intervals(p.edge);
    const Vec d = ops->apply<Vec>(ops->d1(k), net.samples(p.edge));
    const Vec x = net.samples(p.edge)[k];
    const double sign = p.end == 0 ? 1.0 : -1.0;
    out.push_back({p.edge, p.end, sign * d / g.norm(x, d), net.multiplicity(p.edge)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fields

/// The field h_E(t) f'_E(t).
inline NetField tangential_field(const GeodesicNet& net, const std::vector<std::function<double(double)>>& profiles) {
  if (static_cast<int>(profiles.size()) != net.edge_count()) throw ValidationError("one profile per edge required");
  NetField f;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto d = edge_velocity(net, e);
    const int N = net.intervals(e);
    std::vector<Vec> vals(N + 1);
    for (int k = 0; k <= N; ++k) vals[k] = profiles[e](double(k) / N) * d[k];
    f.values.push_back(std::move(vals));
  }
  return f;
}

/// Largest mismatch between field values at shared endpoints.
inline double field_vertex_mismatch(const GeodesicNet& net, const NetField& f) {
  double worst = 0.0;
  for (int v = 0; v < net.graph().vertex_count(); ++v) {
    const auto s = star(net.graph(), v);
    const auto end_value = [&](IncidentPair p) -> const Vec& {
      return p.end == 0 ? f[p.edge].front() : f[p.edge].back();
    };
    for (const auto& p : s.pairs) worst = std::max(worst, (end_value(p) - end_value(s.preferred)).norm());
  }
  return worst;
}

/// net (+) sX: each sample p moved to exp_background(p, s X(p)).
inline GeodesicNet displaced(const MetricChart& chart, const GeodesicNet& net, const NetField& X, double s) {
  check_shape(net, X);
  std::vector<std::vector<Vec>> out;
  for (int e = 0; e < net.edge_count(); ++e) {
    std::vector<Vec> pts;
    for (std::size_t k = 0; k < X[e].size(); ++k) pts.push_back(exp_background(chart, net.samples(e)[k], s * X[e][k]));
    out.push_back(std::move(pts));
  }
  return net.with_samples(std::move(out));
}

/// Minimum chart distance between samples on distinct branches, ignoring
/// samples within `clearance` of a vertex. On tori all lattice images count.
/// A positive value well above the sample spacing indicates an embedded net;
/// this is a sampled check, not a certified intersection test.
inline double embeddedness_gap(const MetricChart& chart, const GeodesicNet& net, double clearance) {
  std::vector<Vec> vertices;
  for (int v = 0; v < net.graph().vertex_count(); ++v) vertices.push_back(net.vertex_point(v));
  const auto L = chart.lattice();
  auto dist = [&](const Vec& a, const Vec& b) {
    if (!L) return (a - b).norm();
    const Vec k = L->colPivHouseholderQr().solve(a - b);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) {
        Vec r(k.size());
        for (Eigen::Index q = 0; q < k.size(); ++q) r[q] = std::round(k[q]);
        r[0] += i;
        if (r.size() > 1) r[1] += j;
        best = std::min(best, (a - b - *L * r).norm());
      }
    return best;
  };
  auto near_vertex = [&](const Vec& p) {
    for (const auto& q : vertices)
      if (dist(p, q) < clearance) return true;
    return false;
  };
  struct Sample {
    int e, k;
    const Vec* p;
  };
  std::vector<Sample> pts;
  for (int e = 0; e < net.edge_count(); ++e)
    for (int k = 0; k <= net.intervals(e); ++k)
      if (!near_vertex(net.samples(e)[k])) pts.push_back({e, k, &net.samples(e)[k]});
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      if (pts[a].e == pts[b].e) {
        // same edge: only far-apart parameters can indicate self-intersection
        const int N = net.intervals(pts[a].e);
        const int gap = std::abs(pts[a].k - pts[b].k);
        if (std::min(gap, N - gap) < N / 4) continue;
      }
      best = std::min(best, dist(*pts[a].p, *pts[b].p));
    }
  return best;
}

}  // namespace gnet
