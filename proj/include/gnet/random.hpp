#pragma once

// Seeded smooth random fields and jittered nets.

#include "gnet/net.hpp"

#include <numbers>
#include <random>

namespace gnet {

/// Continuous field: random vertex values interpolated linearly along each
/// edge plus sum_{m <= modes} c_m sin(m pi t) with |c_m| ~ amplitude / m.
inline NetField random_smooth_field(const GeodesicNet& net, std::mt19937_64& rng, double amplitude = 1.0,
                                    int modes = 3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = net.dim();
  auto rand_vec = [&](double scale) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * u(rng);
    return v;
  };
  std::vector<Vec> at_vertex;
  for (int v = 0; v < net.graph().vertex_count(); ++v) at_vertex.push_back(rand_vec(amplitude));
  NetField f;
  for (int e = 0; e < net.edge_count(); ++e) {
    const auto& edge = net.graph().edge(e);
    std::vector<Vec> coef;
    for (int m = 1; m <= modes; ++m) coef.push_back(rand_vec(amplitude / m));
    const int N = net.intervals(e);
    std::vector<Vec> vals(N + 1);
    for (int k = 0; k <= N; ++k) {
      const double t = double(k) / N;
      vals[k] = (1.0 - t) * at_vertex[edge.v0] + t * at_vertex[edge.v1];
      if (k == 0 || k == N) continue;
      for (int m = 1; m <= modes; ++m) vals[k] += std::sin(m * std::numbers::pi * t) * coef[m - 1];
    }
    f.values.push_back(std::move(vals));
  }
  return f;
}

/// net (+) X for a random smooth X of the given amplitude (chart units).
inline GeodesicNet jitter_net(const MetricChart& chart, const GeodesicNet& net, std::mt19937_64& rng,
                              double amplitude, int modes = 2) {
  return displaced(chart, net, random_smooth_field(net, rng, amplitude, modes), 1.0);
}

/// Root-mean-square chart norm of a field over all samples.
inline double field_norm(const NetField& f) {
  double s = 0.0;
  std::size_t count = 0;
  for (const auto& edge : f.values)
    for (const auto& v : edge) {
      s += v.squaredNorm();
      ++count;
    }
  return count ? std::sqrt(s / count) : 0.0;
}

}  // namespace gnet
