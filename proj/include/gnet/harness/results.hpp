#pragma once

// Results documents and per-sample CSV.
//
// CSV columns, in order: edge, t, x1..xn, then for each named field f the
// columns f_1..f_n. Numbers use 17 significant digits.

#include "gnet/harness/spec_io.hpp"
#include "gnet/jacobi.hpp"
#include "gnet/solver.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace gnet::harness {

#ifdef GNET_VERSION
inline constexpr const char* kVersion = GNET_VERSION;
#else
inline constexpr const char* kVersion = "0.1.0";
#endif

inline json stationarity_json(const WeightedMultigraph& graph, const StationarityReport& r, double tol) {
  json edges = json::array(), vertices = json::array();
  for (std::size_t e = 0; e < r.edge_max.size(); ++e)
    edges.push_back({{"id", graph.edge(static_cast<int>(e)).id}, {"max_residual", r.edge_max[e]}});
  for (std::size_t v = 0; v < r.balance_norm.size(); ++v)
    vertices.push_back({{"id", graph.vertex_id(static_cast<int>(v))}, {"balance", r.balance_norm[v]}});
  return {{"aggregate", r.aggregate}, {"edge_part", r.edge_part}, {"vertex_part", r.vertex_part},
          {"edges", edges},           {"vertices", vertices},     {"tol", tol},
          {"stationary", r.stationary(tol)}};
}

inline json kernel_json(const NondegeneracyVerdict& v, double svd_tol) {
  json basis = json::array();
  for (Eigen::Index i = 0; i < v.kernel.basis.cols(); ++i) basis.push_back(detail::from_vec(v.kernel.basis.col(i)));
  return {{"dimension", v.kernel_dimension},
          {"verdict", to_string(v.verdict)},
          {"singular_values", detail::from_vec(v.kernel.singular_values)},
          {"spectral_gap", v.kernel.spectral_gap},
          {"ill_separated", v.kernel.ill_separated},
          {"residuals", v.kernel.residuals},
          {"basis", basis},
          {"basis_note", "columns of the right singular vectors of the shooting system; CSV field columns k<i>_*"},
          {"svd_tol", svd_tol}};
}

inline json trace_json(const SolveResult& r, double tol) {
  json trace = json::array();
  for (const auto& it : r.trace)
    trace.push_back({{"iteration", it.iteration},
                     {"residual", it.residual},
                     {"merit", it.merit},
                     {"step", it.step},
                     {"rank_deficiency", it.rank_deficiency}});
  json out = {{"initial_residual", r.initial_residual}, {"initial_merit", r.initial_merit},
              {"residual", r.residual},                 {"iterations", r.iterations()},
              {"trace", trace},                         {"tol", tol}};
  if (const auto c = quadratic_tail_constant(r)) out["quadratic_tail_constant"] = *c;
  return out;
}

struct NamedField {
  std::string name;
  NetField field;
};

inline void write_plot_csv(std::ostream& os, const GeodesicNet& net, const std::vector<NamedField>& fields = {}) {
  const int n = net.dim();
  os << "edge,t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (const auto& f : fields) {
    check_shape(net, f.field);
    for (int i = 1; i <= n; ++i) os << ',' << f.name << '_' << i;
  }
  os << '\n' << std::setprecision(17);
  for (int e = 0; e < net.edge_count(); ++e) {
    const int N = net.intervals(e);
    for (int k = 0; k <= N; ++k) {
      os << net.graph().edge(e).id << ',' << double(k) / N;
      for (int i = 0; i < n; ++i) os << ',' << net.samples(e)[k][i];
      for (const auto& f : fields)
        for (int i = 0; i < n; ++i) os << ',' << f.field[e][k][i];
      os << '\n';
    }
  }
}

/// Samples from a plot CSV (field columns ignored), in the graph's edge order.
inline GeodesicNet read_plot_csv(std::istream& is, const WeightedMultigraph& graph) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("plot csv: empty input");
  int n = 0;
  {
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ','))
      if (col.size() > 1 && col[0] == 'x' && col.find_first_not_of("0123456789", 1) == std::string::npos) ++n;
  }
  if (n < 2) throw ValidationError("plot csv: no coordinate columns");
  std::vector<std::vector<Vec>> samples(graph.edge_count());
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, cell;
    std::getline(ss, id, ',');
    std::getline(ss, cell, ',');  // t
    const auto e = graph.find_edge(id);
    if (!e) throw ValidationError("plot csv row " + std::to_string(row) + ": unknown edge '" + id + "'");
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      if (!std::getline(ss, cell, ',')) throw ValidationError("plot csv row " + std::to_string(row) + ": too few columns");
      x[i] = std::stod(cell);
    }
    samples[*e].push_back(x);
  }
  return GeodesicNet(graph, std::move(samples));
}

}  // namespace gnet::harness
