#pragma once

// Finite-difference stencils, endpoint-corrected trapezoid quadrature and
// local Lagrange interpolation on the uniform edge grid t_k = k/N.

#include "gnet/common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>

namespace gnet {

/// Fornberg's recursion. Returns a (max_deriv+1) x nodes.size() matrix whose
/// row d holds the weights of the d-th derivative at x0.
inline Mat fornberg_weights(double x0, std::span<const double> nodes, int max_deriv) {
  const int n = static_cast<int>(nodes.size());
  Mat c = Mat::Zero(max_deriv + 1, n);
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

/// One stencil row: weights applied to samples [start, start + weights.size()).
struct StencilRow {
  int start = 0;
  std::vector<double> weights;
};

/// Differentiation and quadrature operators for a uniform grid on [0,1]
/// with N intervals. Immutable; obtain shared instances through grid_ops().
class GridOps {
 public:
  GridOps(int intervals, int order) : n_(intervals), order_(order) {
    if (order < 2 || order % 2 != 0) throw ValidationError("stencil order must be even and >= 2");
    const int width = order + 1;
    if (intervals < width) {
      throw ValidationError("edge needs at least " + std::to_string(width) +
                            " intervals for stencil order " + std::to_string(order));
    }
    const double h = 1.0 / intervals;
    std::vector<double> nodes(width);
    d1_.resize(intervals + 1);
    d2_.resize(intervals + 1);
    for (int k = 0; k <= intervals; ++k) {
      int start = std::clamp(k - order / 2, 0, intervals + 1 - width);
      for (int j = 0; j < width; ++j) nodes[j] = (start + j) * h;
      const Mat w = fornberg_weights(k * h, nodes, 2);
      d1_[k].start = d2_[k].start = start;
      d1_[k].weights.resize(width);
      d2_[k].weights.resize(width);
      for (int j = 0; j < width; ++j) {
        d1_[k].weights[j] = w(1, j);
        d2_[k].weights[j] = w(2, j);
      }
    }
    build_quadrature();
  }

  int intervals() const { return n_; }
  int order() const { return order_; }
  double spacing() const { return 1.0 / n_; }
  double node(int k) const { return static_cast<double>(k) / n_; }

  const StencilRow& d1(int k) const { return d1_[k]; }
  const StencilRow& d2(int k) const { return d2_[k]; }
  const std::vector<double>& quadrature() const { return quad_; }

  template <class T>
  T apply(const StencilRow& row, std::span<const T> values) const {
    T acc = row.weights[0] * values[row.start];
    for (std::size_t j = 1; j < row.weights.size(); ++j) acc += row.weights[j] * values[row.start + j];
    return acc;
  }

  template <class T>
  std::vector<T> derivative(std::span<const T> values) const {
    std::vector<T> out(values.size());
    for (int k = 0; k <= n_; ++k) out[k] = apply(d1_[k], values);
    return out;
  }

  template <class T>
  std::vector<T> second_derivative(std::span<const T> values) const {
    std::vector<T> out(values.size());
    for (int k = 0; k <= n_; ++k) out[k] = apply(d2_[k], values);
    return out;
  }

  double integrate(std::span<const double> values) const {
    double s = 0.0;
    for (int k = 0; k <= n_; ++k) s += quad_[k] * values[k];
    return s;
  }

 private:
  // Trapezoid rule plus Gregory endpoint corrections: the left correction
  // c_0..c_{m-1} reproduces the Euler-Maclaurin endpoint terms for every
  // polynomial of degree < m, so the rule has order m = order_.
  void build_quadrature() {
    const int m = order_;
    const double h = 1.0 / n_;
    quad_.assign(n_ + 1, h);
    quad_.front() = quad_.back() = 0.5 * h;
    static constexpr double bernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                           5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
    Mat vander(m, m);
    Vec rhs = Vec::Zero(m);
    for (int r = 0; r < m; ++r) {
      for (int k = 0; k < m; ++k) vander(r, k) = (r == 0) ? 1.0 : std::pow(static_cast<double>(k), r);
      if (r % 2 == 1) rhs[r] = bernoulli[(r - 1) / 2] / (r + 1);
    }
    const Vec corr = vander.colPivHouseholderQr().solve(rhs);
    for (int k = 0; k < m; ++k) {
      quad_[k] += h * corr[k];
      quad_[n_ - k] += h * corr[k];
    }
  }

  int n_;
  int order_;
  std::vector<StencilRow> d1_, d2_;
  std::vector<double> quad_;
};

inline constexpr int kDefaultStencilOrder = 8;

/// Shared, cached operator set for (intervals, order).
inline std::shared_ptr<const GridOps> grid_ops(int intervals, int order = kDefaultStencilOrder) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const GridOps>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{intervals, order}];
  if (!slot) slot = std::make_shared<const GridOps>(intervals, order);
  return slot;
}

/// Local Lagrange interpolation of uniformly sampled data on [t0, t0 + N*h].
/// Evaluation outside the sampled range extrapolates from the end window.
template <class T>
class LocalInterpolant {
 public:
  LocalInterpolant(std::vector<T> values, double t0, double h, int width = 9)
      : values_(std::move(values)), t0_(t0), h_(h),
        width_(std::min<int>(width, static_cast<int>(values_.size()))) {}

  std::size_t size() const { return values_.size(); }
  const std::vector<T>& values() const { return values_; }

  T value(double t) const { return eval(t, 0); }
  T derivative(double t) const { return eval(t, 1); }
  T second_derivative(double t) const { return eval(t, 2); }

 private:
  T eval(double t, int deriv) const {
    const int count = static_cast<int>(values_.size());
    const double x = (t - t0_) / h_;
    const double nearest = std::round(x);
    if (deriv == 0 && std::abs(x - nearest) < 1e-13 && nearest >= 0 && nearest < count)
      return values_[static_cast<int>(nearest)];
    // odd widths center on the nearest node, so the stencil is fixed within
    // half a cell of every node
    int start = width_ % 2 ? static_cast<int>(nearest) - width_ / 2
                           : static_cast<int>(std::floor(x)) - (width_ - 1) / 2;
    start = std::clamp(start, 0, count - width_);
    double nodes[32];
    for (int j = 0; j < width_; ++j) nodes[j] = start + j;
    const Mat w = fornberg_weights(x, std::span<const double>(nodes, width_), deriv);
    const double scale = std::pow(h_, -deriv);
    T acc = (w(deriv, 0) * scale) * values_[start];
    for (int j = 1; j < width_; ++j) acc += (w(deriv, j) * scale) * values_[start + j];
    return acc;
  }

  std::vector<T> values_;
  double t0_, h_;
  int width_;
};

}  // namespace gnet
