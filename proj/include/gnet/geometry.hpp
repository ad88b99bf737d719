#pragma once

// Riemannian metrics on single coordinate charts.
//
// Every built-in metric is conformal to the Euclidean chart metric, which is
// also the fixed background metric gamma_0: exp_background(p, w) = p + w.

#include "gnet/common.hpp"
#include "gnet/stencil.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <variant>

namespace gnet {

// ---------------------------------------------------------------------------
// Scalar fields

/// C^2 compactly supported profile (1 - r^2)^3 on r < 1.
inline double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  const double a = 1.0 - r * r;
  return a * a * a;
}

/// d/dr of bump_profile divided by r (finite at r = 0).
inline double bump_profile_dr_over_r(double r) {
  if (r >= 1.0) return 0.0;
  const double a = 1.0 - r * r;
  return -6.0 * a * a;
}

struct ConstantTerm {
  double value = 0.0;
};

/// amplitude * (|z - center|^2 - rho^2)^2
struct RadialQuarticTerm {
  Vec center;
  double rho = 1.0;
  double amplitude = 1.0;
};

/// amplitude * chi(|z-c|/radius) * (s + beta s^2 / radius), where s(z) is a
/// signed offset along `normal` that vanishes on an anchor curve through c.
/// The anchor is the curve sigma -> c + offset(sigma), sigma = <z - c, tangent>,
/// interpolated through sampled nodes.
struct NormalBumpTerm {
  Vec center;
  double radius = 0.1;
  double amplitude = 1.0;
  double beta = 0.0;
  Vec tangent;  // Euclidean unit
  Vec normal;   // Euclidean unit, orthogonal to tangent
  std::vector<double> sigma_nodes;
  std::vector<Vec> offset_nodes;  // relative to center

  /// s(z) and its gradient.
  std::pair<double, Vec> offset(const Vec& z) const {
    const Vec d = z - center;
    const double sigma = d.dot(tangent);
    if (sigma_nodes.size() < 2) return {d.dot(normal), normal};
    const Mat w = fornberg_weights(sigma, sigma_nodes, 1);
    Vec q = Vec::Zero(d.size()), dq = Vec::Zero(d.size());
    for (std::size_t j = 0; j < sigma_nodes.size(); ++j) {
      q += w(0, j) * offset_nodes[j];
      dq += w(1, j) * offset_nodes[j];
    }
    const double s = (d - q).dot(normal);
    Vec grad = normal - dq.dot(normal) * tangent;
    return {s, grad};
  }
};

using FieldTerm = std::variant<ConstantTerm, RadialQuarticTerm, NormalBumpTerm>;

/// Sum of terms; with a lattice, each localized term is evaluated at the
/// periodic image of the point closest to its center.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::vector<FieldTerm> terms, std::optional<Mat> lattice = std::nullopt)
      : terms_(std::move(terms)), lattice_(std::move(lattice)) {}

  static ScalarField constant(double c) { return ScalarField({ConstantTerm{c}}); }

  const std::vector<FieldTerm>& terms() const { return terms_; }
  const std::optional<Mat>& lattice() const { return lattice_; }
  ScalarField with_lattice(std::optional<Mat> lattice) const { return ScalarField(terms_, std::move(lattice)); }

  double value(const Vec& z) const { return eval(z).first; }
  Vec gradient(const Vec& z) const { return eval(z).second; }

  std::pair<double, Vec> eval(const Vec& z) const {
    double h = 0.0;
    Vec grad = Vec::Zero(z.size());
    for (const auto& term : terms_) {
      std::visit(
          [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ConstantTerm>) {
              h += t.value;
            } else if constexpr (std::is_same_v<T, RadialQuarticTerm>) {
              const Vec d = image_near(z, t.center) - t.center;
              const double a = d.squaredNorm() - t.rho * t.rho;
              h += t.amplitude * a * a;
              grad += t.amplitude * 4.0 * a * d;
            } else {
              const Vec zz = image_near(z, t.center);
              const Vec d = zz - t.center;
              const double r = d.norm() / t.radius;
              if (r >= 1.0) return;
              const auto [s, ds] = t.offset(zz);
              const double shape = s + t.beta * s * s / t.radius;
              const Vec dshape = (1.0 + 2.0 * t.beta * s / t.radius) * ds;
              const double chi = bump_profile(r);
              h += t.amplitude * chi * shape;
              grad += t.amplitude * (bump_profile_dr_over_r(r) / (t.radius * t.radius) * shape * d + chi * dshape);
            }
          },
          term);
    }
    return {h, grad};
  }

  /// Center and radius of the first compactly supported term.
  std::optional<std::pair<Vec, double>> support() const {
    for (const auto& term : terms_)
      if (const auto* b = std::get_if<NormalBumpTerm>(&term)) return std::make_pair(b->center, b->radius);
    return std::nullopt;
  }

  ScalarField scaled(double factor) const {
    ScalarField out = *this;
    for (auto& term : out.terms_) {
      std::visit(
          [&](auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ConstantTerm>) t.value *= factor;
            else t.amplitude *= factor;
          },
          term);
    }
    return out;
  }

 private:
  Vec image_near(const Vec& z, const Vec& center) const {
    if (!lattice_) return z;
    const Mat& L = *lattice_;
    const Vec k = L.colPivHouseholderQr().solve(z - center);
    Vec best = z;
    double best_d = std::numeric_limits<double>::infinity();
    const Eigen::Index n = k.size();
    // search the 3^n neighbourhood of the rounded lattice coordinates
    std::vector<int> off(n, -1);
    while (true) {
      Vec shift(n);
      for (Eigen::Index i = 0; i < n; ++i) shift[i] = std::round(k[i]) + off[i];
      const Vec cand = z - L * shift;
      const double dist = (cand - center).norm();
      if (dist < best_d) {
        best_d = dist;
        best = cand;
      }
      Eigen::Index i = 0;
      while (i < n && off[i] == 1) off[i++] = -1;
      if (i == n) break;
      ++off[i];
    }
    return best;
  }

  std::vector<FieldTerm> terms_;
  std::optional<Mat> lattice_;
};

// ---------------------------------------------------------------------------
// Metric charts

struct MetricJet {
  Mat g;
  std::vector<Mat> dg;  // dg[k] = d g / d x_k
};

/// Gamma[k](i, j) = Gamma^k_ij.
struct Christoffel {
  std::vector<Mat> gamma;

  /// Gamma^k_ij a^i b^j
  Vec contract(const Vec& a, const Vec& b) const {
    Vec out(static_cast<Eigen::Index>(gamma.size()));
    for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = a.dot(gamma[k] * b);
    return out;
  }
};

/// Riemann tensor R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
/// (so that R_std(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z).
struct RiemannTensor {
  int n = 0;
  std::vector<double> data;  // index ((l*n + i)*n + j)*n + k

  double& at(int l, int i, int j, int k) { return data[((l * n + i) * n + j) * n + k]; }
  double at(int l, int i, int j, int k) const { return data[((l * n + i) * n + j) * n + k]; }

  Vec standard(const Vec& x, const Vec& y, const Vec& z) const {
    Vec out = Vec::Zero(n);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) out[l] += at(l, i, j, k) * x[i] * y[j] * z[k];
    return out;
  }

  /// Sign convention of the second variation formula: R(X,Y)Z = R_std(Y,X)Z,
  /// so that <R(X,Y)X, Y> is the sectional curvature times |X^Y|^2 and the
  /// Jacobi equation reads J'' + R(f', J) f' = 0.
  Vec operator()(const Vec& x, const Vec& y, const Vec& z) const { return standard(y, x, z); }
};

class MetricChart;
using MetricChartPtr = std::shared_ptr<const MetricChart>;

class MetricChart {
 public:
  struct Euclidean {};
  struct FlatTorus {
    Mat lattice;  // columns are the lattice basis vectors
  };
  struct StereographicSphere {
    double radius = 1.0;
  };
  struct Conformal {
    MetricChartPtr base;
    ScalarField h;
    double amplitude = 0.0;
  };
  struct Blend {
    MetricChartPtr a, b;
    double lambda = 0.0;
  };
  using Kind = std::variant<Euclidean, FlatTorus, StereographicSphere, Conformal, Blend>;

  static MetricChart euclidean(int n) { return MetricChart(n, Euclidean{}); }
  static MetricChart flat_torus(const Mat& lattice) {
    if (lattice.rows() != lattice.cols() || lattice.rows() < 2)
      throw ValidationError("flat torus lattice must be a square n x n matrix, n >= 2");
    if (std::abs(lattice.determinant()) < 1e-12) throw ValidationError("flat torus lattice is degenerate");
    MetricChart c(static_cast<int>(lattice.rows()), FlatTorus{lattice});
    c.injectivity_bound_ = 0.5 * shortest_lattice_vector(lattice);
    return c;
  }
  static MetricChart stereographic_sphere(double radius = 1.0) {
    if (!(radius > 0)) throw ValidationError("sphere radius must be positive");
    return MetricChart(2, StereographicSphere{radius});
  }

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  std::string kind_name() const {
    static constexpr const char* names[] = {"euclidean", "flat-torus", "stereographic-sphere", "conformal",
                                            "blend"};
    return names[kind_.index()];
  }

  /// Optional box domain; points outside raise DomainError.
  MetricChart with_domain(Vec lo, Vec hi) const {
    MetricChart c = *this;
    c.lo_ = std::move(lo);
    c.hi_ = std::move(hi);
    return c;
  }
  double injectivity_bound() const { return injectivity_bound_; }

  /// Lattice of periodic identifications, inherited through conformal/blend.
  std::optional<Mat> lattice() const {
    return std::visit(
        [](const auto& k) -> std::optional<Mat> {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, FlatTorus>) return k.lattice;
          else if constexpr (std::is_same_v<T, Conformal>) return k.base->lattice();
          else if constexpr (std::is_same_v<T, Blend>) return k.a->lattice();
          else return std::nullopt;
        },
        kind_);
  }

  /// True when p and q agree modulo the lattice (plain equality otherwise).
  bool same_point(const Vec& p, const Vec& q, double tol = 1e-9) const {
    const Vec d = p - q;
    const auto L = lattice();
    if (!L) return d.norm() <= tol;
    const Vec k = L->colPivHouseholderQr().solve(d);
    Vec r(k.size());
    for (Eigen::Index i = 0; i < k.size(); ++i) r[i] = std::round(k[i]);
    return (d - *L * r).norm() <= tol;
  }

  void check_domain(const Vec& p) const {
    if (p.size() != dim_) throw DomainError("point has dimension " + std::to_string(p.size()) +
                                            ", chart has " + std::to_string(dim_));
    if (!p.allFinite()) throw DomainError("non-finite point");
    if (lo_ && ((p - *lo_).minCoeff() < 0 || (*hi_ - p).minCoeff() < 0))
      throw DomainError("point outside chart domain");
  }

  Mat metric(const Vec& p) const { return jet(p, false).g; }

  /// Metric and its first coordinate derivatives (closed form for all kinds).
  MetricJet jet(const Vec& p, bool with_derivatives = true) const {
    check_domain(p);
    return std::visit(
        [&](const auto& k) -> MetricJet {
          using T = std::decay_t<decltype(k)>;
          MetricJet j;
          const int n = dim_;
          if constexpr (std::is_same_v<T, Euclidean> || std::is_same_v<T, FlatTorus>) {
            j.g = Mat::Identity(n, n);
            if (with_derivatives) j.dg.assign(n, Mat::Zero(n, n));
          } else if constexpr (std::is_same_v<T, StereographicSphere>) {
            const double lam = 2.0 / (1.0 + p.squaredNorm());
            const double r2 = k.radius * k.radius;
            j.g = r2 * lam * lam * Mat::Identity(n, n);
            if (with_derivatives) {
              j.dg.resize(n);
              for (int a = 0; a < n; ++a) {
                const double dlam = -lam * lam * p[a];
                j.dg[a] = r2 * 2.0 * lam * dlam * Mat::Identity(n, n);
              }
            }
          } else if constexpr (std::is_same_v<T, Conformal>) {
            MetricJet b = k.base->jet(p, with_derivatives);
            const auto [hv, hg] = k.h.eval(p);
            const double f = 1.0 + k.amplitude * hv;
            if (!(f > 0.0)) throw DomainError("conformal factor 1 + x h is not positive; metric degenerate");
            j.g = f * b.g;
            if (with_derivatives) {
              j.dg.resize(n);
              for (int a = 0; a < n; ++a) j.dg[a] = k.amplitude * hg[a] * b.g + f * b.dg[a];
            }
          } else {
            MetricJet ja = k.a->jet(p, with_derivatives), jb = k.b->jet(p, with_derivatives);
            j.g = (1.0 - k.lambda) * ja.g + k.lambda * jb.g;
            if (with_derivatives) {
              j.dg.resize(n);
              for (int a = 0; a < n; ++a) j.dg[a] = (1.0 - k.lambda) * ja.dg[a] + k.lambda * jb.dg[a];
            }
          }
          return j;
        },
        kind_);
  }

  double inner(const Vec& p, const Vec& a, const Vec& b) const { return a.dot(metric(p) * b); }
  double norm(const Vec& p, const Vec& a) const { return std::sqrt(inner(p, a, a)); }

 private:
  template <class K>
  MetricChart(int n, K kind) : dim_(n), kind_(std::move(kind)) {}

  static double shortest_lattice_vector(const Mat& L) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        if (a == 0 && b == 0) continue;
        Vec c = Vec::Zero(L.rows());
        c[0] = a;
        c[1] = b;
        if (L.rows() > 2) {
          // higher dimensions: basis vectors only
          for (Eigen::Index i = 0; i < L.cols(); ++i) best = std::min(best, L.col(i).norm());
          return best;
        }
        best = std::min(best, (L * c).norm());
      }
    return best;
  }

  friend MetricChart conformal_family(const MetricChart&, const ScalarField&, double);
  friend MetricChart blend(const MetricChart&, const MetricChart&, double);

  int dim_ = 2;
  Kind kind_;
  std::optional<Vec> lo_, hi_;
  double injectivity_bound_ = std::numeric_limits<double>::infinity();
};

/// The chart whose metric is (1 + x h(p)) g0(p). Periodic base charts make h
/// periodic. Positivity of 1 + x h is enforced at every evaluation.
inline MetricChart conformal_family(const MetricChart& base, const ScalarField& h, double x) {
  MetricChart c(base.dim(), MetricChart::Conformal{std::make_shared<const MetricChart>(base),
                                                   h.with_lattice(base.lattice()), x});
  c.lo_ = base.lo_;
  c.hi_ = base.hi_;
  c.injectivity_bound_ = base.injectivity_bound_;
  return c;
}

/// c^2 g as a conformal family with constant factor.
inline MetricChart scaled_metric(const MetricChart& base, double c) {
  return conformal_family(base, ScalarField::constant(1.0), c * c - 1.0);
}

/// (1 - lambda) a + lambda b; used to subdivide continuation steps.
inline MetricChart blend(const MetricChart& a, const MetricChart& b, double lambda) {
  if (a.dim() != b.dim()) throw ValidationError("blend: dimension mismatch");
  MetricChart c(a.dim(), MetricChart::Blend{std::make_shared<const MetricChart>(a),
                                            std::make_shared<const MetricChart>(b), lambda});
  c.lo_ = a.lo_;
  c.hi_ = a.hi_;
  c.injectivity_bound_ = a.injectivity_bound_;
  return c;
}

// ---------------------------------------------------------------------------
// Connection and curvature

inline Christoffel christoffel_from_jet(const MetricJet& j) {
  const Eigen::Index n = j.g.rows();
  const Mat ginv = j.g.inverse();
  // first kind: G_lij = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Mat> first(n, Mat(n, n));
  for (Eigen::Index l = 0; l < n; ++l)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index jj = i; jj < n; ++jj) {
        const double v = 0.5 * (j.dg[i](jj, l) + j.dg[jj](i, l) - j.dg[l](i, jj));
        first[l](i, jj) = first[l](jj, i) = v;
      }
  Christoffel c;
  c.gamma.assign(n, Mat::Zero(n, n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) c.gamma[k] += ginv(k, l) * first[l];
  return c;
}

inline Christoffel christoffel(const MetricChart& chart, const Vec& p) {
  return christoffel_from_jet(chart.jet(p));
}

/// Central-difference metric derivatives; an oracle for the closed forms.
inline std::vector<Mat> metric_derivatives_fd(const MetricChart& chart, const Vec& p, double step = 1e-5) {
  std::vector<Mat> dg;
  for (int k = 0; k < chart.dim(); ++k) {
    Vec e = Vec::Zero(chart.dim());
    e[k] = step;
    dg.push_back((chart.metric(p + e) - chart.metric(p - e)) / (2.0 * step));
  }
  return dg;
}

inline constexpr double kCurvatureStep = 1e-4;

inline RiemannTensor riemann(const MetricChart& chart, const Vec& p, double step = kCurvatureStep) {
  const int n = chart.dim();
  const Christoffel c0 = christoffel(chart, p);
  std::vector<Christoffel> dG;  // dG[i].gamma[l](j,k) = d_i Gamma^l_jk
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = step;
    const Christoffel cp = christoffel(chart, p + e), cm = christoffel(chart, p - e);
    Christoffel d;
    for (int l = 0; l < n; ++l) d.gamma.push_back((cp.gamma[l] - cm.gamma[l]) / (2.0 * step));
    dG.push_back(std::move(d));
  }
  RiemannTensor R;
  R.n = n;
  R.data.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = dG[i].gamma[l](j, k) - dG[j].gamma[l](i, k);
          for (int m = 0; m < n; ++m)
            v += c0.gamma[l](i, m) * c0.gamma[m](j, k) - c0.gamma[l](j, m) * c0.gamma[m](i, k);
          R.at(l, i, j, k) = v;
        }
  return R;
}

/// R(X,Y)Z in the second-variation sign convention (see RiemannTensor).
inline Vec curvature(const MetricChart& chart, const Vec& p, const Vec& x, const Vec& y, const Vec& z) {
  return riemann(chart, p)(x, y, z);
}

// ---------------------------------------------------------------------------
// Curves

struct GeodesicPath {
  std::vector<Vec> points;
  std::vector<Vec> velocities;
};

/// RK4 integration of x'' + Gamma(x', x') = 0 over [0, T] in `steps` steps.
inline GeodesicPath geodesic_integrate(const MetricChart& chart, const Vec& p, const Vec& v, double T, int steps) {
  if (steps < 1) throw ValidationError("geodesic_integrate: steps must be >= 1");
  const double dt = T / steps;
  auto accel = [&](const Vec& x, const Vec& u) -> Vec { return -christoffel(chart, x).contract(u, u); };
  GeodesicPath out;
  Vec x = p, u = v;
  out.points.push_back(x);
  out.velocities.push_back(u);
  for (int s = 0; s < steps; ++s) {
    const Vec k1x = u, k1v = accel(x, u);
    const Vec k2x = u + 0.5 * dt * k1v, k2v = accel(x + 0.5 * dt * k1x, k2x);
    const Vec k3x = u + 0.5 * dt * k2v, k3v = accel(x + 0.5 * dt * k2x, k3x);
    const Vec k4x = u + dt * k3v, k4v = accel(x + dt * k3x, k4x);
    x += dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    u += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    chart.check_domain(x);
    out.points.push_back(x);
    out.velocities.push_back(u);
  }
  return out;
}

inline constexpr int kTransportSubsteps = 8;

/// Parallel transport W' + Gamma(c', W) = 0 along a curve sampled uniformly
/// on [0, 1]; returns W at the samples.
inline std::vector<Vec> parallel_transport(const MetricChart& chart, const std::vector<Vec>& curve, const Vec& w0,
                                           int substeps = kTransportSubsteps) {
  const int N = static_cast<int>(curve.size()) - 1;
  if (N < 1) throw ValidationError("parallel_transport: curve needs at least two samples");
  const LocalInterpolant<Vec> c(curve, 0.0, 1.0 / N);
  auto rhs = [&](double t, const Vec& w) -> Vec {
    return -christoffel(chart, c.value(t)).contract(c.derivative(t), w);
  };
  std::vector<Vec> out{w0};
  Vec w = w0;
  const double dt = 1.0 / (N * substeps);
  double t = 0.0;
  for (int k = 0; k < N; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const Vec k1 = rhs(t, w), k2 = rhs(t + 0.5 * dt, w + 0.5 * dt * k1);
      const Vec k3 = rhs(t + 0.5 * dt, w + 0.5 * dt * k2), k4 = rhs(t + dt, w + dt * k3);
      w += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      t = (k * substeps + s + 1) * dt;
    }
    out.push_back(w);
  }
  return out;
}

/// Exponential map of the Euclidean background metric.
inline Vec exp_background(const MetricChart& chart, const Vec& p, const Vec& w) {
  if (w.norm() > chart.injectivity_bound())
    throw DomainError("exp_background: displacement exceeds the chart's injectivity bound");
  return p + w;
}

inline Vec log_background(const MetricChart& chart, const Vec& p, const Vec& q) {
  const Vec w = q - p;
  if (w.norm() > chart.injectivity_bound())
    throw DomainError("log_background: points farther apart than the injectivity bound");
  return w;
}

}  // namespace gnet
