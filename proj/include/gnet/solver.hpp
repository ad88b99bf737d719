#pragma once

// Stationary nets: Newton on the normal residual, metric continuation, and
// conformal bumps that break degeneracy.

#include "gnet/jacobi.hpp"
#include "gnet/net.hpp"
#include "gnet/variation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

namespace gnet {

struct SolveOptions {
  int max_iterations = 30;
  double tolerance = 1e-9;         // on the aggregate stationarity residual
  double armijo = 1e-4;            // sufficient decrease of |r|
  double min_step = 1.0 / 64;      // smallest line-search fraction
  double regularization = 1e-8;    // relative singular value floor of the Newton system
  double fd_step = 1e-6;           // Jacobian column step (chart units)
};

struct SolveIteration {
  int iteration = 0;
  double residual = 0.0;  // aggregate after the step
  double merit = 0.0;     // |r|_2 of the Newton residual
  double step = 0.0;      // accepted line-search fraction
  int rank_deficiency = 0;
};

struct SolveResult {
  GeodesicNet net;
  std::vector<SolveIteration> trace;
  double initial_residual = 0.0;
  double initial_merit = 0.0;
  double residual = 0.0;
  int iterations() const { return static_cast<int>(trace.size()); }
};

/// r_{k+1} / r_k^2 on the Newton merit for the last pair with r_{k+1} above
/// `floor` (below it rounding dominates); nullopt without such a pair.
inline std::optional<double> quadratic_tail_constant(const SolveResult& r, double floor = 1e-9) {
  std::vector<double> m{r.initial_merit};
  for (const auto& it : r.trace) m.push_back(it.merit);
  for (std::size_t k = m.size() - 1; k >= 1; --k)
    if (m[k] > floor && m[k - 1] > 0) return m[k] / (m[k - 1] * m[k - 1]);
  return std::nullopt;
}

namespace detail {

// Newton residual: per vertex the balance V(v), per edge and interior sample
// the arc-length acceleration. Tangential rows keep the discrete speed constant.
struct NewtonEdge {
  Vec rows;
  std::array<Vec, 2> inward;  // g-unit inward tangents at t = 0, 1
};

inline NewtonEdge newton_edge(const MetricChart& g, const std::vector<Vec>& x) {
  const int N = static_cast<int>(x.size()) - 1;
  const auto ops = grid_ops(N);
  const auto dx = ops->derivative(std::span<const Vec>(x));
  const auto ddx = ops->second_derivative(std::span<const Vec>(x));
  std::vector<double> speed(N + 1);
  for (int k = 0; k <= N; ++k) speed[k] = g.norm(x[k], dx[k]);
  const double l = ops->integrate(speed);
  const Eigen::Index n = x.front().size();
  NewtonEdge out;
  out.rows.resize((N - 1) * n);
  for (int k = 1; k < N; ++k)
    out.rows.segment((k - 1) * n, n) = (ddx[k] + christoffel(g, x[k]).contract(dx[k], dx[k])) / (l * l);
  out.inward[0] = dx.front() / speed.front();
  out.inward[1] = -dx.back() / speed.back();
  return out;
}

class NewtonSystem {
 public:
  NewtonSystem(const MetricChart& g, const GeodesicNet& net) : g_(g), net_(net), n_(net.dim()) {
    offset_.resize(net.edge_count());
    size_ = n_ * net.graph().vertex_count();
    for (int e = 0; e < net.edge_count(); ++e) {
      offset_[e] = size_;
      size_ += (net.intervals(e) - 1) * n_;
    }
  }

  int size() const { return size_; }

  Vec residual(const std::vector<std::vector<Vec>>& x) const {
    std::vector<NewtonEdge> edges;
    for (int e = 0; e < net_.edge_count(); ++e) edges.push_back(newton_edge(g_, x[e]));
    return assemble(edges);
  }

  std::vector<std::vector<Vec>> apply(const Vec& delta) const {
    auto x = net_.all_samples();
    for (int e = 0; e < net_.edge_count(); ++e) add_to_edge(x[e], e, delta);
    return x;
  }

  Mat jacobian(double step) const {
    const int E = net_.edge_count();
    std::vector<NewtonEdge> base;
    for (int e = 0; e < E; ++e) base.push_back(newton_edge(g_, net_.samples(e)));
    Mat J(size_, size_);
    Vec unit = Vec::Zero(size_);
    for (int col = 0; col < size_; ++col) {
      unit.setZero();
      unit[col] = step;
      std::vector<int> touched;
      if (col < n_ * net_.graph().vertex_count()) {
        const int v = col / n_;
        for (int e = 0; e < E; ++e)
          if (net_.graph().edge(e).v0 == v || net_.graph().edge(e).v1 == v) touched.push_back(e);
      } else {
        int e = E - 1;
        while (offset_[e] > col) --e;
        touched.push_back(e);
      }
      auto plus = base, minus = base;
      for (int e : touched) {
        auto xp = net_.samples(e), xm = net_.samples(e);
        add_to_edge(xp, e, unit);
        add_to_edge(xm, e, -unit);
        plus[e] = newton_edge(g_, xp);
        minus[e] = newton_edge(g_, xm);
      }
      J.col(col) = (assemble(plus) - assemble(minus)) / (2 * step);
    }
    return J;
  }

 private:
  void add_to_edge(std::vector<Vec>& x, int e, const Vec& delta) const {
    const auto& edge = net_.graph().edge(e);
    const int N = static_cast<int>(x.size()) - 1;
    const Vec d0 = delta.segment(edge.v0 * n_, n_), d1 = delta.segment(edge.v1 * n_, n_);
    for (int k = 0; k <= N; ++k) {
      const double t = double(k) / N;
      x[k] += (1 - t) * d0 + t * d1;
      if (k > 0 && k < N) x[k] += delta.segment(offset_[e] + (k - 1) * n_, n_);
    }
  }

  Vec assemble(const std::vector<NewtonEdge>& edges) const {
    Vec r(size_);
    r.head(n_ * net_.graph().vertex_count()).setZero();
    for (int e = 0; e < net_.edge_count(); ++e) {
      const auto& edge = net_.graph().edge(e);
      r.segment(edge.v0 * n_, n_) -= edge.multiplicity * edges[e].inward[0];
      r.segment(edge.v1 * n_, n_) -= edge.multiplicity * edges[e].inward[1];
      r.segment(offset_[e], edges[e].rows.size()) = edges[e].rows;
    }
    return r;
  }

  const MetricChart& g_;
  const GeodesicNet& net_;
  int n_;
  int size_ = 0;
  std::vector<int> offset_;
};

inline double newton_merit(const MetricChart& g, const GeodesicNet& net) {
  return NewtonSystem(g, net).residual(net.all_samples()).norm();
}

}  // namespace detail

/// Newton iteration on vertex positions and interior sample displacements, with
/// a backtracking line search on |r|. Kernel directions (e.g. torus translations) are handled by the
/// minimum-norm solution of the rank-revealed system.
inline SolveResult solve_stationary(const MetricChart& g, const GeodesicNet& init, const SolveOptions& opts = {}) {
  if (!(opts.tolerance > 0)) throw ValidationError("solve_stationary: tolerance must be positive");
  if (opts.max_iterations < 1) throw ValidationError("solve_stationary: max_iterations must be >= 1");
  checked(g, init);
  if (classify(init.graph()) == GraphClass::NotGood) throw ValidationError("solve_stationary: graph is not good");

  SolveResult out;
  out.net = init;
  out.initial_residual = out.residual = stationarity_residual(g, init).aggregate;
  out.initial_merit = detail::newton_merit(g, init);
  if (out.residual <= opts.tolerance) return out;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const detail::NewtonSystem sys(g, out.net);
    const Vec r = sys.residual(out.net.all_samples());
    const double merit = r.norm();
    const Mat J = sys.jacobian(opts.fd_step);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod;
    cod.setThreshold(opts.regularization);
    cod.compute(J);
    const Vec delta = -cod.solve(r);
    const int deficiency = static_cast<int>(J.cols() - cod.rank());

    double alpha = 1.0;
    bool accepted = false;
    GeodesicNet trial;
    double trial_merit = 0.0;
    while (alpha >= opts.min_step) {
      try {
        trial = init.with_samples(sys.apply(alpha * delta));
        if (validate_net(g, trial).empty()) {
          trial_merit = detail::newton_merit(g, trial);
          if (trial_merit <= (1 - opts.armijo * alpha) * merit) {
            accepted = true;
            break;
          }
        }
      } catch (const DomainError&) {
      } catch (const ValidationError&) {
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "solve_stationary: no descent step at iteration " << it << " (residual " << out.residual
          << ", rank deficiency " << deficiency << ")";
      throw SolverError(deficiency > 0 ? SolverError::Kind::SingularSystem : SolverError::Kind::NoProgress,
                        msg.str());
    }
    out.net = trial;
    out.residual = stationarity_residual(g, trial).aggregate;
    out.trace.push_back({it, out.residual, trial_merit, alpha, deficiency});
    if (out.residual <= opts.tolerance) return out;
  }
  std::ostringstream msg;
  msg << "solve_stationary: residual " << out.residual << " after " << opts.max_iterations << " iterations";
  throw SolverError(SolverError::Kind::MaxIterations, msg.str());
}

// ---------------------------------------------------------------------------
// Continuation

struct ContinuationOptions {
  SolveOptions solve;
  double min_fraction = 1.0 / 64;  // smallest sub-step of a metric step
  bool verify_nondegeneracy = true;
};

struct ContinuationStep {
  int index = 0;          // metric path index being approached
  double fraction = 0.0;  // position between path[index - 1] and path[index]
  int iterations = 0;
  double residual = 0.0;
};

struct ContinuationResult {
  std::vector<GeodesicNet> nets;                    // one per path metric
  std::vector<NondegeneracyVerdict> verdicts;       // filled when f0 is nondegenerate
  std::vector<ContinuationStep> trace;
};

/// Warm-started solves along the path; a failed step is subdivided through
/// blends of consecutive metrics, halving down to min_fraction.
inline ContinuationResult continue_family(const std::vector<MetricChart>& path, const GeodesicNet& f0,
                                          const ContinuationOptions& opts = {}) {
  if (path.empty()) throw ValidationError("continue_family: empty metric path");
  ContinuationResult out;
  auto first = solve_stationary(path[0], f0, opts.solve);
  out.trace.push_back({0, 1.0, first.iterations(), first.residual});
  out.nets.push_back(first.net);
  bool verify = false;
  if (opts.verify_nondegeneracy) {
    try {
      auto v = is_nondegenerate(path[0], first.net);
      verify = v.verdict == Verdict::Nondegenerate;
      if (verify) out.verdicts.push_back(std::move(v));
    } catch (const Error&) {
    }
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    GeodesicNet current = out.nets.back();
    double at = 0.0, step = 1.0;
    while (at < 1.0) {
      const double to = std::min(1.0, at + step);
      const MetricChart gm = to >= 1.0 ? path[i] : blend(path[i - 1], path[i], to);
      try {
        auto r = solve_stationary(gm, current, opts.solve);
        current = r.net;
        at = to;
        out.trace.push_back({static_cast<int>(i), to, r.iterations(), r.residual});
        step = std::min(1.0, 2 * step);
      } catch (const SolverError&) {
        step *= 0.5;
      } catch (const DomainError&) {
        step *= 0.5;
      }
      if (step < opts.min_fraction) {
        std::ostringstream msg;
        msg << "continue_family: stalled between path metrics " << i - 1 << " and " << i << " at fraction " << at;
        throw SolverError(SolverError::Kind::ContinuationStall, msg.str());
      }
    }
    out.nets.push_back(current);
    if (verify) out.verdicts.push_back(is_nondegenerate(path[i], current));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Condition (C) bumps

struct BumpOptions {
  double radius = 0.25;     // chart units
  double shrink = 0.8;      // radius factor per retry
  int max_shrinks = 12;
  double amplitude = 1.0;
  double beta = 4.0;        // quadratic coefficient of the normal profile
  int anchor_nodes = 13;    // nodes of the anchor polyline
};

struct BumpSpec {
  int edge = 0;
  int sample = 0;
  double t0 = 0.0;
  Vec center;
  Vec direction;  // w: unit normal part of J at t0
  Vec tangent;
  double radius = 0.0;
  double amplitude = 1.0;
  double beta = 0.0;
};

struct ConditionCBump {
  BumpSpec spec;
  ScalarField h;
  double max_on_net = 0.0;  // max |h| over net samples
  double min_pairing = 0.0; // min <grad h, J> over net samples
  double pairing_t0 = 0.0;  // <grad h, J> at t0
};

namespace detail {

// Shortest periodic representative of d.
inline Vec min_image(const std::optional<Mat>& L, const Vec& d) {
  if (!L) return d;
  const Vec k = L->colPivHouseholderQr().solve(d);
  const Eigen::Index n = d.size();
  Vec base(n);
  for (Eigen::Index i = 0; i < n; ++i) base[i] = std::round(k[i]);
  Vec best = d;
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<int> off(n, -1);
  while (true) {
    Vec m = base;
    for (Eigen::Index i = 0; i < n; ++i) m[i] += off[i];
    const Vec r = d - *L * m;
    if (r.norm() < best_norm) {
      best_norm = r.norm();
      best = r;
    }
    Eigen::Index i = 0;
    while (i < n && off[i] == 1) off[i++] = -1;
    if (i == n) break;
    ++off[i];
  }
  return best;
}

inline double max_sample_spacing(const GeodesicNet& net) {
  double h = 0.0;
  for (int e = 0; e < net.edge_count(); ++e)
    for (std::size_t k = 1; k < net.samples(e).size(); ++k)
      h = std::max(h, (net.samples(e)[k] - net.samples(e)[k - 1]).norm());
  return h;
}

// Anchor edge samples within reach of the ball, or nullopt when another edge,
// a vertex, or a second pass of the anchor edge comes within reach.
inline std::optional<std::pair<int, int>> clear_run(const MetricChart& g, const GeodesicNet& net, int e, int k,
                                                    double radius) {
  const auto L = g.lattice();
  const Vec c = net.samples(e)[k];
  const double reach = radius + max_sample_spacing(net);
  int lo = k, hi = k;
  for (int f = 0; f < net.edge_count(); ++f) {
    const auto& x = net.samples(f);
    for (int j = 0; j < static_cast<int>(x.size()); ++j) {
      if (min_image(L, x[j] - c).norm() >= reach) continue;
      if (f != e || j == 0 || j + 1 == static_cast<int>(x.size())) return std::nullopt;
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
  }
  for (int j = lo; j <= hi; ++j)
    if (min_image(L, net.samples(e)[j] - c).norm() >= reach) return std::nullopt;  // two passes
  return std::make_pair(lo, hi);
}

inline std::optional<ConditionCBump> try_bump(const MetricChart& g, const GeodesicNet& net, const NetField& J, int e,
                                              int k, const Vec& w, double radius, const BumpOptions& opts) {
  const auto run = clear_run(g, net, e, k, radius);
  if (!run) return std::nullopt;
  const auto L = g.lattice();
  const auto& x = net.samples(e);
  const Vec c = x[k];
  const Vec tangent = edge_velocity(net, e)[k].normalized();
  const auto [lo, hi] = *run;
  const int count = std::min(opts.anchor_nodes, hi - lo + 1);
  NormalBumpTerm term{c, radius, opts.amplitude, opts.beta, tangent, w, {}, {}};
  for (int i = 0; i < count; ++i) {
    const int j = count == 1 ? k : lo + static_cast<int>(std::lround(double(i) * (hi - lo) / (count - 1)));
    const Vec d = min_image(L, x[j] - c);
    const double sigma = d.dot(tangent);
    if (!term.sigma_nodes.empty() && !(sigma > term.sigma_nodes.back())) return std::nullopt;  // not a graph over the tangent
    term.sigma_nodes.push_back(sigma);
    term.offset_nodes.push_back(d);
  }
  ConditionCBump out;
  out.h = ScalarField({term}, L);
  out.spec = {e, k, double(k) / net.intervals(e), c, w, tangent, radius, opts.amplitude, opts.beta};
  out.min_pairing = std::numeric_limits<double>::infinity();
  for (int f = 0; f < net.edge_count(); ++f) {
    for (std::size_t j = 0; j < net.samples(f).size(); ++j) {
      const auto [hv, grad] = out.h.eval(net.samples(f)[j]);
      if (f != e && (hv != 0.0 || grad.norm() != 0.0)) return std::nullopt;
      const double pairing = grad.dot(J[f][j]);
      out.max_on_net = std::max(out.max_on_net, std::abs(hv));
      out.min_pairing = std::min(out.min_pairing, pairing);
      if (f == e && static_cast<int>(j) == k) out.pairing_t0 = pairing;
    }
  }
  const double scale = opts.amplitude * std::sqrt(J[e][k].squaredNorm());
  if (out.max_on_net > 1e-9 || out.min_pairing < -1e-12 * scale || !(out.pairing_t0 > 0)) return std::nullopt;
  return out;
}

}  // namespace detail

/// A bump h vanishing along the net, supported in a ball around f0(t0) that
/// meets no other edge, with <grad h, J> >= 0 on the net and > 0 at t0. t0
/// maximizes the normal part of J over interior samples; ties go to the
/// sample nearest mid-edge, then to the lowest edge index.
inline ConditionCBump build_condition_C_bump(const MetricChart& g, const GeodesicNet& net, const NetField& J,
                                             const BumpOptions& opts = {}) {
  checked(g, net);
  check_shape(net, J);
  if (!(opts.radius > 0) || !(opts.shrink > 0 && opts.shrink < 1))
    throw ValidationError("build_condition_C_bump: invalid radius options");
  const FieldSplit split = classify_field(g, net, J);
  if (split.tangential)
    throw SolverError(SolverError::Kind::NoNormalPoint, "build_condition_C_bump: J is tangential along the net");

  struct Candidate {
    int e, k;
    double score, quantized, mid;
  };
  std::vector<Candidate> cands;
  double best = 0.0;
  for (int e = 0; e < net.edge_count(); ++e) {
    const int N = net.intervals(e);
    for (int k = 1; k < N; ++k) {
      const double s = split.normal_part[e][k].norm();
      cands.push_back({e, k, s, 0.0, std::abs(double(k) / N - 0.5)});
      best = std::max(best, s);
    }
  }
  for (auto& c : cands) c.quantized = std::round(c.score / (1e-6 * best));
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.quantized != b.quantized) return a.quantized > b.quantized;
    if (a.mid != b.mid) return a.mid < b.mid;
    if (a.e != b.e) return a.e < b.e;
    return a.k < b.k;
  });

  double radius = opts.radius;
  for (int attempt = 0; attempt <= opts.max_shrinks; ++attempt, radius *= opts.shrink) {
    for (const auto& c : cands) {
      if (c.score < 1e-3 * best) break;
      const Vec w = split.normal_part[c.e][c.k] / c.score;
      if (auto bump = detail::try_bump(g, net, J, c.e, c.k, w, radius, opts)) return *bump;
    }
  }
  throw SolverError(SolverError::Kind::ClearanceFailure,
                    "build_condition_C_bump: no clear anchor point down to radius " + std::to_string(radius));
}

struct MixedDerivative {
  double closed_form = 0.0;
  double finite_difference = 0.0;
  double relative_gap() const {
    return std::abs(closed_form - finite_difference) / std::max(std::abs(closed_form), 1e-300);
  }
};

/// d^2/dx ds of the length of f0 + sJ in (1 + x h) g0 at x = s = 0: the
/// quadrature of 1/2 sum n(E) int <grad h, J> |f0'|_g0 dt, and a central
/// mixed difference with steps (x_step, s_step).
inline MixedDerivative mixed_second_derivative(const MetricChart& g0, const ScalarField& h, const GeodesicNet& net,
                                               const NetField& J, double x_step = 1e-3, double s_step = 1e-4) {
  checked(g0, net);
  check_shape(net, J);
  if (!(x_step > 0) || !(s_step > 0)) throw ValidationError("mixed_second_derivative: steps must be positive");
  const ScalarField hh = h.with_lattice(g0.lattice());
  MixedDerivative out;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto speed = edge_speed(g0, net, e);
    std::vector<double> f(speed.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = hh.gradient(net.samples(e)[k]).dot(J[e][k]) * speed[k];
    out.closed_form += 0.5 * net.multiplicity(e) * grid_ops(net.intervals(e))->integrate(f);
  }
  auto L = [&](double x, double s) {
    try {
      return length(conformal_family(g0, h, x), displaced(g0, net, J, s));
    } catch (const Error& err) {
      throw SolverError(SolverError::Kind::NoProgress, std::string("mixed_second_derivative: FD step failed: ") +
                                                           err.what());
    }
  };
  out.finite_difference = (L(x_step, s_step) - L(x_step, -s_step) - L(-x_step, s_step) + L(-x_step, -s_step)) /
                          (4 * x_step * s_step);
  return out;
}

// ---------------------------------------------------------------------------
// Degeneracy breaking

struct BreakOptions {
  double amplitude = 0.02;  // conformal amplitude x per bump
  int max_bumps = 3;
  int max_halvings = 4;
  BumpOptions bump;
  ContinuationOptions continuation;
  double svd_tol = kSvdTol;
};

struct BumpRecord {
  ConditionCBump bump;
  double amplitude = 0.0;
  int kernel_dimension = 0;  // after the bump
};

struct BreakResult {
  MetricChart chart;
  GeodesicNet net;
  NondegeneracyVerdict verdict;
  std::vector<BumpRecord> bumps;
};

/// Repeatedly: take the kernel field with the largest normal part, build its
/// bump, move to (1 + x h) g, continue the net and recompute the kernel. A bump
/// that raises the kernel dimension is retried at half the amplitude.
inline BreakResult break_degeneracy(const MetricChart& g, const GeodesicNet& net, const BreakOptions& opts = {}) {
  if (opts.max_bumps < 1 || !(opts.amplitude > 0))
    throw ValidationError("break_degeneracy: need max_bumps >= 1 and a positive amplitude");
  const double res = stationarity_residual(g, net).aggregate;
  if (res > kStationarityTol) {
    std::ostringstream msg;
    msg << "break_degeneracy: net is not stationary (residual " << res << ")";
    throw SolverError(SolverError::Kind::NotStationary, msg.str());
  }
  BreakResult out{g, net, is_nondegenerate(g, net, opts.svd_tol), {}};
  ContinuationOptions copts = opts.continuation;
  copts.verify_nondegeneracy = false;

  for (int b = 0; b < opts.max_bumps && out.verdict.verdict == Verdict::Degenerate; ++b) {
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < out.verdict.kernel_dimension; ++i)
      order.push_back({-classify_field(out.chart, out.net, out.verdict.kernel.fields[i]).normal_ratio, i});
    std::sort(order.begin(), order.end());
    std::optional<ConditionCBump> bump;
    for (const auto& [ratio, i] : order) {
      try {
        bump = build_condition_C_bump(out.chart, out.net, out.verdict.kernel.fields[i], opts.bump);
        break;
      } catch (const SolverError&) {
      }
    }
    if (!bump) break;
    bool accepted = false;
    double x = opts.amplitude;
    for (int attempt = 0; attempt <= opts.max_halvings && !accepted; ++attempt, x *= 0.5) {
      try {
        MetricChart next = conformal_family(out.chart, bump->h, x);
        auto cont = continue_family({out.chart, next}, out.net, copts);
        auto verdict = is_nondegenerate(next, cont.nets.back(), opts.svd_tol);
        if (verdict.kernel_dimension > out.verdict.kernel_dimension) continue;
        out.bumps.push_back({*bump, x, verdict.kernel_dimension});
        out.chart = std::move(next);
        out.net = cont.nets.back();
        out.verdict = std::move(verdict);
        accepted = true;
      } catch (const SolverError&) {
      }
    }
    if (!accepted) break;
  }
  if (out.verdict.verdict == Verdict::Degenerate) {
    std::ostringstream msg;
    msg << "break_degeneracy: kernel dimension " << out.verdict.kernel_dimension << " after " << out.bumps.size()
        << " accepted bumps";
    throw SolverError(SolverError::Kind::NoProgress, msg.str());
  }
  return out;
}

/// Seeded generic bump metric around a net: `count` normal bumps anchored at
/// random interior points of distinct edges (cycling when count exceeds the
/// edge count), random normal direction, radius and quadratic coefficient.
/// Every bump vanishes along the net, so the net stays close to stationary.
inline ScalarField random_bump_field(const MetricChart& g, const GeodesicNet& net, std::mt19937_64& rng,
                                     int count = 3) {
  checked(g, net);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FieldTerm> terms;
  for (int i = 0; i < count; ++i) {
    const int e = i % net.edge_count();
    const int N = net.intervals(e);
    for (int attempt = 0; attempt < 50; ++attempt) {
      const int k = std::clamp(static_cast<int>(std::lround((0.3 + 0.4 * u(rng)) * N)), 1, N - 1);
      const Vec t = edge_velocity(net, e)[k].normalized();
      Vec w(net.dim());
      for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = normal(rng);
      w -= w.dot(t) * t;
      if (w.norm() < 1e-3) continue;
      BumpOptions o;
      o.radius = 0.1 + 0.1 * u(rng);
      o.beta = 2.0 + 4.0 * u(rng);
      o.amplitude = 0.5 + u(rng);
      NetField J = NetField::zero(net);
      J[e][k] = w.normalized();
      if (auto b = detail::try_bump(g, net, J, e, k, w.normalized(), o.radius, o)) {
        terms.push_back(b->h.terms().front());
        break;
      }
    }
  }
  if (terms.empty()) throw SolverError(SolverError::Kind::ClearanceFailure, "random_bump_field: no clear anchor");
  return ScalarField(std::move(terms), g.lattice());
}

}  // namespace gnet
