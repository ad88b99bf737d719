#pragma once

// Jacobi fields of a stationary net by shooting, and a brute-force
// finite-difference oracle on the reduced (vertex + normal) coordinates.

#include "gnet/variation.hpp"

#include <limits>
#include <map>
#include <sstream>

namespace gnet {

inline constexpr double kSvdTol = 1e-6;
inline constexpr int kJacobiSubsteps = 8;

// ---------------------------------------------------------------------------
// Frames and coefficients

/// Per sample, an n x (n-1) matrix whose columns are a g-orthonormal frame
/// of the normal space, parallel along the edge.
struct EdgeFrame {
  std::vector<Mat> e;
  int normal_dim() const { return e.empty() ? 0 : static_cast<int>(e.front().cols()); }
};

/// g-orthonormal basis of the g-orthogonal complement of `t` at p. In
/// dimension 2 the single vector is oriented so that det[t, e] > 0.
inline Mat normal_basis(const Mat& g, const Vec& t) {
  const Eigen::Index n = t.size();
  std::vector<Vec> basis{t / std::sqrt(t.dot(g * t))};
  for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(basis.size()) < n; ++i) {
    Vec v = Vec::Unit(n, i);
    for (const auto& b : basis) v -= v.dot(g * b) * b;
    const double nv = std::sqrt(v.dot(g * v));
    if (nv > 1e-8) basis.push_back(v / nv);
  }
  Mat out(n, n - 1);
  for (Eigen::Index a = 1; a < n; ++a) out.col(a - 1) = basis[a];
  if (n == 2 && t[0] * out(1, 0) - t[1] * out(0, 0) < 0) out *= -1.0;
  return out;
}

inline EdgeFrame parallel_frame(const MetricChart& g, const GeodesicNet& net, int e) {
  const auto& x = net.samples(e);
  const auto d = edge_velocity(net, e);
  const Mat e0 = normal_basis(g.metric(x[0]), d[0]);
  EdgeFrame f;
  f.e.assign(x.size(), Mat(e0.rows(), e0.cols()));
  for (Eigen::Index a = 0; a < e0.cols(); ++a) {
    const auto w = parallel_transport(g, x, e0.col(a));
    for (std::size_t k = 0; k < x.size(); ++k) f.e[k].col(a) = w[k];
  }
  return f;
}

/// K(t)_ab = <R(f', e_a) f', e_b>_g at every sample.
inline std::vector<Mat> jacobi_ode_coefficients(const MetricChart& g, const GeodesicNet& net, int e,
                                                const EdgeFrame& frame) {
  const auto& x = net.samples(e);
  const auto d = edge_velocity(net, e);
  const int m = frame.normal_dim();
  std::vector<Mat> K(x.size(), Mat(m, m));
  for (std::size_t k = 0; k < x.size(); ++k) {
    const RiemannTensor R = riemann(g, x[k]);
    const Mat gk = g.metric(x[k]);
    for (int a = 0; a < m; ++a) {
      const Vec ra = R(d[k], frame.e[k].col(a), d[k]);
      for (int b = 0; b < m; ++b) K[k](a, b) = ra.dot(gk * frame.e[k].col(b));
    }
  }
  return K;
}

inline std::vector<Mat> jacobi_ode_coefficients(const MetricChart& g, const GeodesicNet& net, int e) {
  return jacobi_ode_coefficients(g, net, e, parallel_frame(g, net, e));
}

/// Fundamental matrix Phi(t_k) of (u, u')' = [[0, I], [-K, 0]] (u, u') with
/// Phi(0) = I, by RK4 on an interpolant of K.
inline std::vector<Mat> fundamental_matrices(const std::vector<Mat>& K, int substeps = kJacobiSubsteps) {
  const int N = static_cast<int>(K.size()) - 1;
  const int m = static_cast<int>(K.front().rows());
  const LocalInterpolant<Mat> Kt(K, 0.0, 1.0 / N);
  auto rhs = [&](double t, const Mat& P) -> Mat {
    Mat out(2 * m, 2 * m);
    out.topRows(m) = P.bottomRows(m);
    out.bottomRows(m) = -Kt.value(t) * P.topRows(m);
    return out;
  };
  std::vector<Mat> out{Mat::Identity(2 * m, 2 * m)};
  Mat P = out.front();
  const double dt = 1.0 / (N * substeps);
  for (int k = 0; k < N; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const double t = (k * substeps + s) * dt;
      const Mat k1 = rhs(t, P), k2 = rhs(t + 0.5 * dt, P + 0.5 * dt * k1);
      const Mat k3 = rhs(t + 0.5 * dt, P + 0.5 * dt * k2), k4 = rhs(t + dt, P + dt * k3);
      P += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    out.push_back(P);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shooting system

struct JacobiSystem {
  Mat matrix;
  bool loop = false;
  int n = 0;          // ambient dimension
  int m = 0;          // normal dimension
  int vertex_unknowns = 0;  // n |V| (zero for loops)
  std::vector<EdgeFrame> frames;
  std::vector<std::vector<Mat>> phi;  // per edge, fundamental matrix at every sample
  std::vector<double> lengths;
  Mat holonomy;  // loops: M_ab = <e_a(1), e_b(0)>_g

  int edge_offset(int e) const { return vertex_unknowns + 2 * m * e; }
  int unknowns() const { return static_cast<int>(matrix.cols()); }
};

/// Square system for (z_v, u_E(0), u_E'(0)): boundary coupling per edge and
/// B_v(J) = 0 per vertex. A single loop is closed up through its monodromy
/// and frame holonomy instead.
inline JacobiSystem assemble_jacobi_system(const MetricChart& g, const GeodesicNet& net,
                                           double stationarity_tol = kStationarityTol) {
  require_stationary(g, net, stationarity_tol, "assemble_jacobi_system");
  const auto cls = classify(net.graph());
  JacobiSystem S;
  S.n = net.dim();
  S.m = S.n - 1;
  S.loop = cls == GraphClass::LoopWithMultiplicity;
  const int m = S.m;
  const int E = net.edge_count(), V = net.graph().vertex_count();
  for (int e = 0; e < E; ++e) {
    S.frames.push_back(parallel_frame(g, net, e));
    S.phi.push_back(fundamental_matrices(jacobi_ode_coefficients(g, net, e, S.frames.back())));
    S.lengths.push_back(edge_length(g, net, e));
  }
  if (S.loop) {
    const auto& fr = S.frames[0].e;
    const Mat gv = g.metric(net.samples(0).front());
    S.holonomy = fr.back().transpose() * gv * fr.front();
    const Mat& P = S.phi[0].back();
    S.matrix = Mat::Zero(2 * m, 2 * m);
    S.matrix.topRows(m) = S.holonomy.transpose() * P.topRows(m);
    S.matrix.bottomRows(m) = S.holonomy.transpose() * P.bottomRows(m);
    S.matrix -= Mat::Identity(2 * m, 2 * m);
    return S;
  }
  S.vertex_unknowns = S.n * V;
  const int size = S.vertex_unknowns + 2 * m * E;
  S.matrix = Mat::Zero(size, size);
  for (int e = 0; e < E; ++e) {
    const auto& edge = net.graph().edge(e);
    const int col = S.edge_offset(e);
    const int row = 2 * m * e;
    const Mat& P = S.phi[e].back();
    const Mat g0 = g.metric(net.samples(e).front()), g1 = g.metric(net.samples(e).back());
    // u(0) = <z_{v0}, e(0)>
    S.matrix.block(row, col, m, m) = Mat::Identity(m, m);
    S.matrix.block(row, S.n * edge.v0, m, S.n) -= S.frames[e].e.front().transpose() * g0;
    // u(1) = <z_{v1}, e(1)>
    S.matrix.block(row + m, col, m, 2 * m) = P.topRows(m);
    S.matrix.block(row + m, S.n * edge.v1, m, S.n) -= S.frames[e].e.back().transpose() * g1;
  }
  for (int v = 0; v < V; ++v) {
    const int row = 2 * m * E + S.n * v;
    for (const auto& p : star(net.graph(), v).pairs) {
      const int col = S.edge_offset(p.edge);
      const double c = (p.end == 0 ? -1.0 : 1.0) * net.multiplicity(p.edge) / S.lengths[p.edge];
      const Mat& frame = p.end == 0 ? S.frames[p.edge].e.front() : S.frames[p.edge].e.back();
      // u'(i) as a linear map of (u(0), u'(0))
      Mat du(m, 2 * m);
      if (p.end == 0) {
        du.setZero();
        du.rightCols(m) = Mat::Identity(m, m);
      } else {
        du = S.phi[p.edge].back().bottomRows(m);
      }
      S.matrix.block(row, col, S.n, 2 * m) += c * frame * du;
    }
  }
  return S;
}

struct JacobiKernel {
  int dimension = 0;
  Mat basis;  // columns: orthonormal kernel vectors in system coordinates
  std::vector<NetField> fields;
  std::vector<double> residuals;  // |S x| / sigma_max per basis element
  Vec singular_values;            // descending
  double spectral_gap = std::numeric_limits<double>::infinity();
  bool ill_separated = false;
};

/// Ambient field J = sum u_a e_a + h f' with h linear in the endpoint
/// tangential components; J equals z_v at the vertices.
inline NetField reconstruct_field(const MetricChart& g, const GeodesicNet& net, const JacobiSystem& S,
                                  const Vec& coeffs) {
  NetField J;
  const int m = S.m;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto& edge = net.graph().edge(e);
    const auto d = edge_velocity(net, e);
    const Vec state0 = coeffs.segment(S.edge_offset(e), 2 * m);
    const int N = net.intervals(e);
    std::vector<Vec> vals(N + 1);
    double h0 = 0.0, h1 = 0.0;
    Vec z0, z1;
    if (!S.loop) {
      z0 = coeffs.segment(S.n * edge.v0, S.n);
      z1 = coeffs.segment(S.n * edge.v1, S.n);
      const Mat g0 = g.metric(net.samples(e).front()), g1 = g.metric(net.samples(e).back());
      h0 = z0.dot(g0 * d.front()) / d.front().dot(g0 * d.front());
      h1 = z1.dot(g1 * d.back()) / d.back().dot(g1 * d.back());
    }
    for (int k = 0; k <= N; ++k) {
      const double t = double(k) / N;
      const Vec u = S.phi[e][k].topRows(m) * state0;
      vals[k] = S.frames[e].e[k] * u + ((1.0 - t) * h0 + t * h1) * d[k];
    }
    if (!S.loop) {
      vals.front() = z0;
      vals.back() = z1;
    } else {
      vals.back() = vals.front();
    }
    J.values.push_back(std::move(vals));
  }
  return J;
}

namespace detail {

struct KernelSplit {
  int dimension = 0;
  double gap = std::numeric_limits<double>::infinity();
  bool ill_separated = false;
};

/// Singular values at most svd_tol * scale count as zero, scale being
/// max(sigma_max, floor). The shooting system has identity blocks, so its
/// natural floor is 1; without it a system that is entirely kernel (the
/// equator) would be measured against its own rounding noise.
inline KernelSplit split_spectrum(const Vec& sigma, double svd_tol, double floor = 0.0) {
  KernelSplit k;
  const double smax = std::max(sigma.size() ? sigma[0] : 0.0, floor);
  if (smax <= 0) {
    k.dimension = static_cast<int>(sigma.size());
    return k;
  }
  double min_kept = std::numeric_limits<double>::infinity(), max_dropped = 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    const double r = sigma[i] / smax;
    if (r <= svd_tol) {
      ++k.dimension;
      max_dropped = std::max(max_dropped, sigma[i]);
    } else {
      min_kept = std::min(min_kept, sigma[i]);
      if (r < 10 * svd_tol) k.ill_separated = true;
    }
  }
  if (k.dimension == static_cast<int>(sigma.size())) min_kept = smax;  // only the floor is retained
  k.gap = k.dimension ? min_kept / std::max(max_dropped, std::numeric_limits<double>::min())
                      : min_kept / (svd_tol * smax);
  return k;
}

}  // namespace detail

inline JacobiKernel jacobi_kernel(const MetricChart& g, const GeodesicNet& net, double svd_tol = kSvdTol,
                                  double stationarity_tol = kStationarityTol) {
  const JacobiSystem S = assemble_jacobi_system(g, net, stationarity_tol);
  Eigen::JacobiSVD<Mat> svd(S.matrix, Eigen::ComputeFullV);
  JacobiKernel K;
  K.singular_values = svd.singularValues();
  const auto split = detail::split_spectrum(K.singular_values, svd_tol, 1.0);
  K.dimension = split.dimension;
  K.spectral_gap = split.gap;
  K.ill_separated = split.ill_separated;
  if (K.ill_separated) {
    std::ostringstream msg;
    msg << "jacobi_kernel: singular value within a factor 10 of the threshold " << svd_tol
        << "; kernel dimension is ill-separated";
    warn(msg.str());
  }
  K.basis = svd.matrixV().rightCols(K.dimension);
  const double smax = std::max(K.singular_values.size() ? K.singular_values[0] : 0.0, 1.0);
  for (int i = 0; i < K.dimension; ++i) {
    const Vec x = K.basis.col(i);
    K.fields.push_back(reconstruct_field(g, net, S, x));
    K.residuals.push_back((S.matrix * x).norm() / smax);
  }
  return K;
}

// ---------------------------------------------------------------------------
// Classification and verdict

struct FieldSplit {
  bool tangential = false;
  NetField tangential_part;
  NetField normal_part;
  double normal_ratio = 0.0;  // max |J^perp| / max |J|
};

inline FieldSplit classify_field(const MetricChart& g, const GeodesicNet& net, const NetField& J) {
  check_shape(net, J);
  FieldSplit s;
  double max_all = 0.0, max_perp = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto d = edge_velocity(net, e);
    std::vector<Vec> tan(d.size()), nor(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const Mat gk = g.metric(net.samples(e)[k]);
      const double h = J[e][k].dot(gk * d[k]) / d[k].dot(gk * d[k]);
      tan[k] = h * d[k];
      nor[k] = J[e][k] - tan[k];
      max_all = std::max(max_all, std::sqrt(J[e][k].dot(gk * J[e][k])));
      max_perp = std::max(max_perp, std::sqrt(nor[k].dot(gk * nor[k])));
    }
    s.tangential_part.values.push_back(std::move(tan));
    s.normal_part.values.push_back(std::move(nor));
  }
  s.normal_ratio = max_all > 0 ? max_perp / max_all : 0.0;
  s.tangential = max_perp <= 1e-7 * max_all;
  return s;
}

enum class Verdict { Nondegenerate, Degenerate };

inline const char* to_string(Verdict v) { return v == Verdict::Nondegenerate ? "Nondegenerate" : "Degenerate"; }

struct NondegeneracyVerdict {
  Verdict verdict = Verdict::Degenerate;
  int kernel_dimension = 0;
  JacobiKernel kernel;
};

/// Sampled embeddedness threshold: half the largest chart sample spacing,
/// with vertex neighbourhoods of a tenth of the shortest edge excluded.
inline bool approximately_embedded(const MetricChart& g, const GeodesicNet& net) {
  double spacing = 0.0, shortest = std::numeric_limits<double>::infinity();
  for (int e = 0; e < net.edge_count(); ++e) {
    double chord = 0.0;
    const auto& x = net.samples(e);
    for (std::size_t k = 1; k < x.size(); ++k) {
      spacing = std::max(spacing, (x[k] - x[k - 1]).norm());
      chord += (x[k] - x[k - 1]).norm();
    }
    shortest = std::min(shortest, chord);
  }
  return embeddedness_gap(g, net, 0.1 * shortest) > 0.5 * spacing;
}

inline NondegeneracyVerdict is_nondegenerate(const MetricChart& g, const GeodesicNet& net, double svd_tol = kSvdTol,
                                             double stationarity_tol = kStationarityTol) {
  const auto cls = classify(net.graph());
  if (cls == GraphClass::NotGood) throw ValidationError("is_nondegenerate: graph is not good");
  if (cls == GraphClass::GoodStar && !approximately_embedded(g, net))
    throw ValidationError("is_nondegenerate: net fails the approximate embeddedness check");
  NondegeneracyVerdict v;
  v.kernel = jacobi_kernel(g, net, svd_tol, stationarity_tol);
  v.kernel_dimension = v.kernel.dimension;
  v.verdict = v.kernel_dimension == 0 ? Verdict::Nondegenerate : Verdict::Degenerate;
  return v;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle

/// A displacement direction touching few samples.
struct SparseDirection {
  std::vector<std::tuple<int, int, Vec>> entries;  // (edge, sample, vector)
  std::vector<int> edges;                          // sorted, unique

  void add(int e, int k, const Vec& v) {
    entries.emplace_back(e, k, v);
    if (std::find(edges.begin(), edges.end(), e) == edges.end()) {
      edges.push_back(e);
      std::sort(edges.begin(), edges.end());
    }
  }
  NetField dense(const GeodesicNet& net) const {
    NetField f = NetField::zero(net);
    for (const auto& [e, k, v] : entries) f[e][k] += v;
    return f;
  }
};

/// Reduced coordinates: per vertex n displacement directions (normal value at
/// the end sample plus linear tangential interpolation along each incident
/// edge), and per edge the normal hat functions at interior samples. A single
/// loop uses normal hats at every sample, the vertex sample shared by both ends.
inline std::vector<SparseDirection> reduced_basis(const MetricChart& g, const GeodesicNet& net) {
  std::vector<SparseDirection> basis;
  const bool loop = classify(net.graph()) == GraphClass::LoopWithMultiplicity;
  std::vector<EdgeFrame> frames;
  std::vector<std::vector<Vec>> vel;
  for (int e = 0; e < net.edge_count(); ++e) {
    frames.push_back(parallel_frame(g, net, e));
    vel.push_back(edge_velocity(net, e));
  }
  const int n = net.dim();
  if (loop) {
    const int N = net.intervals(0);
    for (int k = 0; k < N; ++k)
      for (int a = 0; a < n - 1; ++a) {
        SparseDirection d;
        d.add(0, k, frames[0].e[k].col(a));
        if (k == 0) d.add(0, N, frames[0].e[k].col(a));
        basis.push_back(std::move(d));
      }
    return basis;
  }
  for (int v = 0; v < net.graph().vertex_count(); ++v) {
    for (int c = 0; c < n; ++c) {
      const Vec z = Vec::Unit(n, c);
      SparseDirection d;
      for (const auto& p : star(net.graph(), v).pairs) {
        const int N = net.intervals(p.edge);
        const int k0 = p.end == 0 ? 0 : N;
        const Mat gk = g.metric(net.samples(p.edge)[k0]);
        const Vec& T = vel[p.edge][k0];
        const double h = z.dot(gk * T) / T.dot(gk * T);
        d.add(p.edge, k0, z);
        for (int k = 1; k < N; ++k) {
          const double w = p.end == 0 ? 1.0 - double(k) / N : double(k) / N;
          d.add(p.edge, k, (w * h) * vel[p.edge][k]);
        }
      }
      basis.push_back(std::move(d));
    }
  }
  for (int e = 0; e < net.edge_count(); ++e)
    for (int k = 1; k < net.intervals(e); ++k)
      for (int a = 0; a < n - 1; ++a) {
        SparseDirection d;
        d.add(e, k, frames[e].e[k].col(a));
        basis.push_back(std::move(d));
      }
  return basis;
}

struct ReducedHessian {
  Mat matrix;
  std::vector<SparseDirection> basis;
  Vec singular_values;
  int kernel_dimension = 0;
  double spectral_gap = 0.0;
  Mat kernel;  // columns in basis coordinates
};

/// Second central differences of the discrete length over reduced_basis().
inline ReducedHessian reduced_hessian_fd(const MetricChart& g, const GeodesicNet& net, double svd_tol = kSvdTol,
                                         double step = kHessianStep, double stationarity_tol = kStationarityTol) {
  if (!(step >= 1e-7 && step <= 1e-2)) throw ValidationError("reduced_hessian_fd: step must lie in [1e-7, 1e-2]");
  require_stationary(g, net, stationarity_tol, "reduced_hessian_fd");
  ReducedHessian H;
  H.basis = reduced_basis(g, net);
  const int D = static_cast<int>(H.basis.size());
  // stencil reach: samples further apart than this do not interact
  const int reach = kDefaultStencilOrder + 1;

  auto edges_length = [&](const std::vector<int>& edges, const SparseDirection& a, double sa, const SparseDirection* b,
                          double sb) {
    double total = 0.0;
    for (int e : edges) {
      std::vector<Vec> pts = net.samples(e);
      for (const auto& [ee, k, v] : a.entries)
        if (ee == e) pts[k] += sa * v;
      if (b)
        for (const auto& [ee, k, v] : b->entries)
          if (ee == e) pts[k] += sb * v;
      const auto ops = grid_ops(static_cast<int>(pts.size()) - 1);
      const auto d = ops->derivative<Vec>(pts);
      std::vector<double> s(pts.size());
      for (std::size_t k = 0; k < pts.size(); ++k) s[k] = g.norm(pts[k], d[k]);
      total += net.multiplicity(e) * ops->integrate(s);
    }
    return total;
  };
  auto interacts = [&](const SparseDirection& a, const SparseDirection& b) {
    for (const auto& [ea, ka, va] : a.entries)
      for (const auto& [eb, kb, vb] : b.entries)
        if (ea == eb && std::abs(ka - kb) <= reach) return true;
    return false;
  };

  // Hat directions have stencil derivatives of order N, so the quartic term
  // of the length grows like (step N)^2; displacements are taken in units of
  // the sample spacing.
  int max_intervals = 1;
  for (int e = 0; e < net.edge_count(); ++e) max_intervals = std::max(max_intervals, net.intervals(e));
  step /= max_intervals;
  H.matrix = Mat::Zero(D, D);
  const double h2 = step * step;
  for (int i = 0; i < D; ++i) {
    const auto& a = H.basis[i];
    const double l0 = edges_length(a.edges, a, 0.0, nullptr, 0.0);
    H.matrix(i, i) = (edges_length(a.edges, a, step, nullptr, 0.0) - 2.0 * l0 +
                      edges_length(a.edges, a, -step, nullptr, 0.0)) /
                     h2;
    for (int j = i + 1; j < D; ++j) {
      const auto& b = H.basis[j];
      if (!interacts(a, b)) continue;
      std::vector<int> edges = a.edges;
      for (int e : b.edges)
        if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
      const double v = (edges_length(edges, a, step, &b, step) - edges_length(edges, a, step, &b, -step) -
                        edges_length(edges, a, -step, &b, step) + edges_length(edges, a, -step, &b, -step)) /
                       (4.0 * h2);
      H.matrix(i, j) = H.matrix(j, i) = v;
    }
  }
  Eigen::JacobiSVD<Mat> svd(H.matrix, Eigen::ComputeFullV);
  H.singular_values = svd.singularValues();
  const auto split = detail::split_spectrum(H.singular_values, svd_tol);
  H.kernel_dimension = split.dimension;
  H.spectral_gap = split.gap;
  H.kernel = svd.matrixV().rightCols(split.dimension);
  return H;
}

}  // namespace gnet
