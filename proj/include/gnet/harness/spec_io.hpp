#pragma once

// Net-spec files: JSON documents with graph, metric, net and options sections.

#include "gnet/net.hpp"
#include "gnet/random.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <set>

namespace gnet::harness {

using json = nlohmann::json;

struct Options {
  int samples = kDefaultSamples;
  double tol = 1e-5;        // stationarity threshold for reports
  double solve_tol = 1e-9;  // Newton target
  double svd_tol = 1e-6;
  int max_iterations = 30;
  int max_bumps = 3;
  double bump_amplitude = 0.02;
  double bump_radius = 0.0;  // 0: choose automatically
  std::vector<double> schedule;  // amplitude multipliers for `continue`
  std::uint64_t seed = 1;
  double jitter = 0.0;

  json to_json() const {
    return json{{"N_E", samples},       {"tol", tol},  {"solve_tol", solve_tol},
                {"svd_tol", svd_tol},   {"max_iterations", max_iterations},
                {"max_bumps", max_bumps}, {"bump_amplitude", bump_amplitude},
                {"bump_radius", bump_radius}, {"schedule", schedule},
                {"seed", seed},         {"jitter", jitter}};
  }
};

/// One conformal layer g -> (1 + x h) g.
struct MetricLayer {
  ScalarField field;
  double amplitude = 0.0;
};

/// A base chart plus conformal layers; `scale` multiplies every amplitude.
struct MetricDescription {
  MetricChart base = MetricChart::euclidean(2);
  std::vector<MetricLayer> layers;

  MetricChart build(double scale = 1.0) const {
    MetricChart g = base;
    for (const auto& l : layers) g = conformal_family(g, l.field, scale * l.amplitude);
    return g;
  }
};

struct Experiment {
  WeightedMultigraph graph;
  MetricDescription metric;
  MetricChart chart = MetricChart::euclidean(2);
  GeodesicNet net;
  Options options;
};

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

inline Vec to_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected a number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(where + ": expected a number array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline json from_vec(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline double number(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? obj.at(key).get<double>() : fallback;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Sections

inline WeightedMultigraph parse_graph(const json& j) {
  detail::reject_unknown(j, {"vertices", "edges"}, "graph");
  const auto vertices = detail::require(j, "vertices", "graph").get<std::vector<std::string>>();
  std::vector<EdgeSpec> edges;
  for (const auto& e : detail::require(j, "edges", "graph")) {
    detail::reject_unknown(e, {"id", "v0", "v1", "multiplicity"}, "graph.edges");
    edges.push_back({detail::require(e, "id", "graph.edges").get<std::string>(),
                     detail::require(e, "v0", "graph.edges").get<std::string>(),
                     detail::require(e, "v1", "graph.edges").get<std::string>(), e.value("multiplicity", 1)});
  }
  return WeightedMultigraph(vertices, edges);
}

inline json graph_to_json(const WeightedMultigraph& g) {
  json edges = json::array();
  for (const auto& e : g.edges())
    edges.push_back({{"id", e.id}, {"v0", g.vertex_id(e.v0)}, {"v1", g.vertex_id(e.v1)}, {"multiplicity", e.multiplicity}});
  return {{"vertices", g.vertex_ids()}, {"edges", edges}};
}

inline FieldTerm parse_term(const json& b) {
  const std::string where = "metric.bumps";
  const auto type = detail::require(b, "type", where).get<std::string>();
  if (type == "constant") {
    detail::reject_unknown(b, {"type", "amplitude", "value"}, where);
    return ConstantTerm{detail::number(b, "value", 1.0)};
  }
  if (type == "radial") {
    detail::reject_unknown(b, {"type", "amplitude", "center", "rho", "scale"}, where);
    return RadialQuarticTerm{detail::to_vec(detail::require(b, "center", where), where), detail::number(b, "rho", 1.0),
                             detail::number(b, "scale", 1.0)};
  }
  if (type == "normal") {
    detail::reject_unknown(b, {"type", "amplitude", "center", "radius", "scale", "beta", "tangent", "normal",
                               "anchor_sigma", "anchor_offset"},
                           where);
    NormalBumpTerm t;
    t.center = detail::to_vec(detail::require(b, "center", where), where);
    t.radius = detail::require(b, "radius", where).get<double>();
    if (!(t.radius > 0)) throw ValidationError(where + ": radius must be positive");
    t.amplitude = detail::number(b, "scale", 1.0);
    t.beta = detail::number(b, "beta", 0.0);
    t.tangent = detail::to_vec(detail::require(b, "tangent", where), where);
    t.normal = detail::to_vec(detail::require(b, "normal", where), where);
    if (b.contains("anchor_sigma")) {
      t.sigma_nodes = b.at("anchor_sigma").get<std::vector<double>>();
      for (const auto& o : detail::require(b, "anchor_offset", where)) t.offset_nodes.push_back(detail::to_vec(o, where));
      if (t.sigma_nodes.size() != t.offset_nodes.size())
        throw ValidationError(where + ": anchor_sigma and anchor_offset lengths differ");
    }
    return t;
  }
  throw ValidationError(where + ": unknown bump type '" + type + "'");
}

inline json term_to_json(const FieldTerm& term, double amplitude) {
  return std::visit(
      [&](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ConstantTerm>) {
          return {{"type", "constant"}, {"amplitude", amplitude}, {"value", t.value}};
        } else if constexpr (std::is_same_v<T, RadialQuarticTerm>) {
          return {{"type", "radial"}, {"amplitude", amplitude}, {"center", detail::from_vec(t.center)},
                  {"rho", t.rho}, {"scale", t.amplitude}};
        } else {
          json offsets = json::array();
          for (const auto& o : t.offset_nodes) offsets.push_back(detail::from_vec(o));
          return {{"type", "normal"},         {"amplitude", amplitude},
                  {"center", detail::from_vec(t.center)}, {"radius", t.radius},
                  {"scale", t.amplitude},     {"beta", t.beta},
                  {"tangent", detail::from_vec(t.tangent)}, {"normal", detail::from_vec(t.normal)},
                  {"anchor_sigma", t.sigma_nodes}, {"anchor_offset", offsets}};
        }
      },
      term);
}

inline MetricDescription parse_metric(const json& j) {
  detail::reject_unknown(j, {"kind", "params", "bumps"}, "metric");
  const auto kind = detail::require(j, "kind", "metric").get<std::string>();
  const json params = j.value("params", json::object());
  MetricDescription d;
  if (kind == "euclidean") {
    detail::reject_unknown(params, {"dim"}, "metric.params");
    const int n = params.value("dim", 2);
    if (n < 2) throw ValidationError("metric.params: dim must be >= 2");
    d.base = MetricChart::euclidean(n);
  } else if (kind == "flat-torus") {
    detail::reject_unknown(params, {"lattice"}, "metric.params");
    const auto& rows = detail::require(params, "lattice", "metric.params");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Mat L(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const Vec v = detail::to_vec(rows[c], "metric.params.lattice");
      if (v.size() != n) throw ValidationError("metric.params.lattice: expected " + std::to_string(n) + " components");
      L.col(c) = v;
    }
    d.base = MetricChart::flat_torus(L);
  } else if (kind == "stereographic-sphere") {
    detail::reject_unknown(params, {"radius"}, "metric.params");
    d.base = MetricChart::stereographic_sphere(detail::number(params, "radius", 1.0));
  } else {
    throw ValidationError("metric: unknown kind '" + kind + "'");
  }
  for (const auto& b : j.value("bumps", json::array()))
    d.layers.push_back({ScalarField({parse_term(b)}), detail::number(b, "amplitude", 0.0)});
  return d;
}

inline json metric_to_json(const MetricDescription& d) {
  json j;
  j["kind"] = d.base.kind_name();
  if (const auto* t = std::get_if<MetricChart::FlatTorus>(&d.base.kind())) {
    json rows = json::array();
    for (Eigen::Index c = 0; c < t->lattice.cols(); ++c) rows.push_back(detail::from_vec(t->lattice.col(c)));
    j["params"] = {{"lattice", rows}};
  } else if (const auto* s = std::get_if<MetricChart::StereographicSphere>(&d.base.kind())) {
    j["params"] = {{"radius", s->radius}};
  } else {
    j["params"] = {{"dim", d.base.dim()}};
  }
  json bumps = json::array();
  for (const auto& l : d.layers)
    for (const auto& t : l.field.terms()) bumps.push_back(term_to_json(t, l.amplitude));
  j["bumps"] = bumps;
  return j;
}

// ---------------------------------------------------------------------------
// Generators

/// Image of q in R^3 under stereographic projection from the equatorial
/// point at longitude `pole_deg`, onto the plane spanned by (z-axis, east).
inline Vec stereographic_project(const Eigen::Vector3d& q, double pole_deg) {
  const double a = pole_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d P(std::cos(a), std::sin(a), 0.0), e1(0, 0, 1), e2(-std::sin(a), std::cos(a), 0.0);
  const double denom = 1.0 - q.dot(P);
  if (denom < 1e-12) throw DomainError("meridian passes through the projection point");
  return make_vec({q.dot(e1) / denom, q.dot(e2) / denom});
}

inline std::vector<Vec> generate_edge(const json& j, int samples, const std::string& where) {
  const auto gen = detail::require(j, "generator", where).get<std::string>();
  std::vector<Vec> pts(samples + 1);
  if (gen == "straight") {
    detail::reject_unknown(j, {"generator", "from", "to"}, where);
    const Vec a = detail::to_vec(detail::require(j, "from", where), where);
    const Vec b = detail::to_vec(detail::require(j, "to", where), where);
    for (int k = 0; k <= samples; ++k) pts[k] = a + (double(k) / samples) * (b - a);
  } else if (gen == "circle-arc") {
    detail::reject_unknown(j, {"generator", "center", "radius", "angle0", "angle1"}, where);
    const Vec c = detail::to_vec(detail::require(j, "center", where), where);
    const double r = detail::require(j, "radius", where).get<double>();
    const double a0 = detail::require(j, "angle0", where).get<double>();
    const double a1 = detail::require(j, "angle1", where).get<double>();
    for (int k = 0; k <= samples; ++k) {
      const double a = a0 + (a1 - a0) * k / samples;
      pts[k] = c + r * make_vec({std::cos(a), std::sin(a)});
    }
  } else if (gen == "meridian") {
    detail::reject_unknown(j, {"generator", "longitude_deg", "projection_longitude_deg"}, where);
    const double phi = detail::require(j, "longitude_deg", where).get<double>() * std::numbers::pi / 180.0;
    const double pole = detail::number(j, "projection_longitude_deg", 60.0);
    for (int k = 0; k <= samples; ++k) {
      const double th = std::numbers::pi * k / samples;
      pts[k] = stereographic_project({std::sin(th) * std::cos(phi), std::sin(th) * std::sin(phi), std::cos(th)}, pole);
    }
    // the poles are shared by every meridian; pin them exactly
    pts.front() = stereographic_project({0, 0, 1}, pole);
    pts.back() = stereographic_project({0, 0, -1}, pole);
  } else {
    throw ValidationError(where + ": unknown generator '" + gen + "'");
  }
  return pts;
}

inline Options parse_options(const json& j) {
  detail::reject_unknown(j, {"N_E", "tol", "solve_tol", "svd_tol", "max_iterations", "max_bumps", "bump_amplitude", "bump_radius",
                             "schedule", "seed", "jitter"},
                         "options");
  Options o;
  o.samples = j.value("N_E", o.samples);
  o.tol = j.value("tol", o.tol);
  o.solve_tol = j.value("solve_tol", o.solve_tol);
  o.svd_tol = j.value("svd_tol", o.svd_tol);
  o.max_iterations = j.value("max_iterations", o.max_iterations);
  o.max_bumps = j.value("max_bumps", o.max_bumps);
  o.bump_amplitude = j.value("bump_amplitude", o.bump_amplitude);
  o.bump_radius = j.value("bump_radius", o.bump_radius);
  o.schedule = j.value("schedule", o.schedule);
  o.seed = j.value("seed", o.seed);
  o.jitter = j.value("jitter", o.jitter);
  if (!(o.tol > 0)) throw ValidationError("options: tol must be positive");
  if (!(o.solve_tol > 0)) throw ValidationError("options: solve_tol must be positive");
  if (!(o.svd_tol > 0)) throw ValidationError("options: svd_tol must be positive");
  if (o.max_iterations < 1) throw ValidationError("options: max_iterations must be >= 1");
  if (o.samples < kDefaultStencilOrder + 1)
    throw ValidationError("options: N_E must be at least " + std::to_string(kDefaultStencilOrder + 1));
  return o;
}

inline Experiment parse_experiment_unchecked(const json& j) {
  detail::reject_unknown(j, {"graph", "metric", "net", "options"}, "spec");
  Experiment ex;
  ex.options = parse_options(j.value("options", json::object()));
  ex.graph = parse_graph(detail::require(j, "graph", "spec"));
  if (auto errs = validate(ex.graph); !errs.empty()) {
    std::string msg = "graph invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  ex.metric = parse_metric(detail::require(j, "metric", "spec"));
  ex.chart = ex.metric.build();

  const json& net = detail::require(j, "net", "spec");
  detail::reject_unknown(net, {"edges"}, "net");
  const json& edges = detail::require(net, "edges", "net");
  if (!edges.is_object()) throw ValidationError("net.edges: expected an object keyed by edge id");
  for (const auto& [key, _] : edges.items())
    if (!ex.graph.find_edge(key)) throw ValidationError("net.edges: unknown edge '" + key + "'");
  std::vector<std::vector<Vec>> samples;
  for (const auto& e : ex.graph.edges()) {
    const std::string where = "net.edges." + e.id;
    if (!edges.contains(e.id)) throw ValidationError("net: no samples or generator for edge '" + e.id + "'");
    const json& d = edges.at(e.id);
    if (d.contains("samples")) {
      detail::reject_unknown(d, {"samples"}, where);
      std::vector<Vec> pts;
      for (const auto& p : d.at("samples")) pts.push_back(detail::to_vec(p, where));
      samples.push_back(std::move(pts));
    } else {
      samples.push_back(generate_edge(d, ex.options.samples, where));
    }
  }
  ex.net = GeodesicNet(ex.graph, std::move(samples));
  if (auto errs = validate_net(ex.chart, ex.net); !errs.empty()) {
    std::string msg = "net invalid:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  if (ex.options.jitter > 0) {
    std::mt19937_64 rng(ex.options.seed);
    ex.net = jitter_net(ex.chart, ex.net, rng, ex.options.jitter);
  }
  return ex;
}

/// Parses and validates a whole spec. Validation failures throw ValidationError.
inline Experiment parse_experiment(const json& j) {
  try {
    return parse_experiment_unchecked(j);
  } catch (const json::exception& err) {
    throw ValidationError(std::string("spec: ") + err.what());
  }
}

inline Experiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ValidationError("spec file '" + path + "' is not valid JSON: " + err.what());
  }
  return parse_experiment(j);
}

/// Spec document with explicit samples for every edge.
inline json experiment_to_json(const WeightedMultigraph& graph, const MetricDescription& metric, const GeodesicNet& net,
                               const Options& options) {
  json edges = json::object();
  for (int e = 0; e < net.edge_count(); ++e) {
    json pts = json::array();
    for (const auto& p : net.samples(e)) pts.push_back(detail::from_vec(p));
    edges[graph.edge(e).id] = {{"samples", pts}};
  }
  json opts = options.to_json();
  opts.erase("jitter");
  return {{"graph", graph_to_json(graph)}, {"metric", metric_to_json(metric)}, {"net", {{"edges", edges}}},
          {"options", opts}};
}

}  // namespace gnet::harness
