#pragma once

// Command runner behind the CLI: one spec file, one command, one results
// document. Exit codes: 0 success, 2 validation failure, 3 solver failure.

#include "gnet/harness/battery.hpp"
#include "gnet/harness/cases.hpp"
#include "gnet/harness/results.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace gnet::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check",    "solve",          "jacobi",      "perturb",
                                                 "continue", "chart-roundtrip", "export-plot", "generate"};
  return names;
}

struct RunRequest {
  std::string command;
  std::string spec;       // spec file path
  std::string case_name;  // generate only
  std::string out;        // results (or spec, for generate); stdout when empty
  std::string csv;
  std::optional<double> tol, solve_tol, svd_tol;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> fields;  // export-plot extra columns: residual, kernel
  bool timestamp = true;
};

inline const char* to_string(SolverError::Kind k) {
  switch (k) {
    case SolverError::Kind::MaxIterations: return "MaxIterations";
    case SolverError::Kind::SingularSystem: return "SingularSystem";
    case SolverError::Kind::ContinuationStall: return "ContinuationStall";
    case SolverError::Kind::NoProgress: return "NoProgress";
    case SolverError::Kind::NoNormalPoint: return "NoNormalPoint";
    case SolverError::Kind::ClearanceFailure: return "ClearanceFailure";
    case SolverError::Kind::NotStationary: return "NotStationary";
  }
  return "Unknown";
}

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  os << text;
}

inline json read_spec_json(const RunRequest& req) {
  if (req.spec.empty()) throw ValidationError(req.command + ": --spec is required");
  std::ifstream in(req.spec);
  if (!in) throw ValidationError("cannot open spec file '" + req.spec + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ValidationError("spec file '" + req.spec + "' is not valid JSON: " + err.what());
  }
  if (!j.is_object()) throw ValidationError("spec file '" + req.spec + "': expected an object");
  json& opts = j["options"];
  if (opts.is_null()) opts = json::object();
  if (req.tol) opts["tol"] = *req.tol;
  if (req.solve_tol) opts["solve_tol"] = *req.solve_tol;
  if (req.svd_tol) opts["svd_tol"] = *req.svd_tol;
  if (req.seed) opts["seed"] = *req.seed;
  return j;
}

inline SolveOptions solve_options(const Options& o) {
  SolveOptions s;
  s.tolerance = o.solve_tol;
  s.max_iterations = o.max_iterations;
  return s;
}

inline json net_spec(const Experiment& ex, const MetricDescription& metric, const GeodesicNet& net) {
  return experiment_to_json(ex.graph, metric, net, ex.options);
}

inline void write_csv(const RunRequest& req, const GeodesicNet& net, const std::vector<NamedField>& fields) {
  if (req.csv.empty()) return;
  std::ofstream os(req.csv);
  if (!os) throw ValidationError("cannot write '" + req.csv + "'");
  write_plot_csv(os, net, fields);
}

inline std::vector<NamedField> kernel_columns(const NondegeneracyVerdict& v) {
  std::vector<NamedField> out;
  for (std::size_t i = 0; i < v.kernel.fields.size(); ++i) out.push_back({"k" + std::to_string(i + 1), v.kernel.fields[i]});
  return out;
}

inline void run_command(const RunRequest& req, const Experiment& ex, json& res) {
  const Options& o = ex.options;
  const auto& cmd = req.command;
  if (cmd == "check") {
    res["classification"] = to_string(classify(ex.graph));
    res["length"] = length(ex.chart, ex.net);
    res["stationarity"] = stationarity_json(ex.graph, stationarity_residual(ex.chart, ex.net), o.tol);
    write_csv(req, ex.net, {});
  } else if (cmd == "solve") {
    const auto r = solve_stationary(ex.chart, ex.net, solve_options(o));
    res["solve"] = trace_json(r, o.solve_tol);
    res["length"] = length(ex.chart, r.net);
    res["stationarity"] = stationarity_json(ex.graph, stationarity_residual(ex.chart, r.net), o.tol);
    res["result_spec"] = net_spec(ex, ex.metric, r.net);
    write_csv(req, r.net, {});
  } else if (cmd == "jacobi") {
    const auto v = is_nondegenerate(ex.chart, ex.net, o.svd_tol, o.tol);
    res["stationarity"] = stationarity_json(ex.graph, stationarity_residual(ex.chart, ex.net), o.tol);
    res["kernel"] = kernel_json(v, o.svd_tol);
    write_csv(req, ex.net, kernel_columns(v));
  } else if (cmd == "perturb") {
    BreakOptions b;
    b.amplitude = o.bump_amplitude;
    b.max_bumps = o.max_bumps;
    b.svd_tol = o.svd_tol;
    if (o.bump_radius > 0) b.bump.radius = o.bump_radius;
    b.continuation.solve = solve_options(o);
    const auto r = break_degeneracy(ex.chart, ex.net, b);
    MetricDescription metric = ex.metric;
    json bumps = json::array();
    for (const auto& rec : r.bumps) {
      metric.layers.push_back({rec.bump.h, rec.amplitude});
      bumps.push_back({{"edge", ex.graph.edge(rec.bump.spec.edge).id},
                       {"t0", rec.bump.spec.t0},
                       {"radius", rec.bump.spec.radius},
                       {"beta", rec.bump.spec.beta},
                       {"amplitude", rec.amplitude},
                       {"direction", harness::detail::from_vec(rec.bump.spec.direction)},
                       {"pairing_t0", rec.bump.pairing_t0},
                       {"kernel_dimension_after", rec.kernel_dimension}});
    }
    res["bumps"] = bumps;
    res["kernel"] = kernel_json(r.verdict, o.svd_tol);
    res["stationarity"] = stationarity_json(ex.graph, stationarity_residual(r.chart, r.net), o.tol);
    res["result_spec"] = net_spec(ex, metric, r.net);
    write_csv(req, r.net, {});
  } else if (cmd == "continue") {
    std::vector<double> schedule = o.schedule;
    if (schedule.empty()) schedule = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<MetricChart> path;
    for (double s : schedule) path.push_back(ex.metric.build(s));
    ContinuationOptions c;
    c.solve = solve_options(o);
    const auto r = continue_family(path, ex.net, c);
    json steps = json::array(), nets = json::array();
    for (const auto& s : r.trace)
      steps.push_back({{"index", s.index}, {"fraction", s.fraction}, {"iterations", s.iterations}, {"residual", s.residual}});
    for (std::size_t i = 0; i < r.nets.size(); ++i) {
      json entry = {{"scale", schedule[i]},
                    {"length", length(path[i], r.nets[i])},
                    {"stationarity", stationarity_json(ex.graph, stationarity_residual(path[i], r.nets[i]), o.tol)}};
      if (i < r.verdicts.size()) entry["kernel"] = kernel_json(r.verdicts[i], o.svd_tol);
      nets.push_back(entry);
    }
    res["continuation"] = {{"schedule", schedule}, {"steps", steps}, {"nets", nets}, {"tol", o.solve_tol}};
    MetricDescription last = ex.metric;
    for (auto& l : last.layers) l.amplitude *= schedule.back();
    res["result_spec"] = net_spec(ex, last, r.nets.back());
    write_csv(req, r.nets.back(), {});
  } else if (cmd == "chart-roundtrip") {
    std::mt19937_64 rng(o.seed);
    const double xi_err = xi_identity_error(rng);
    const double rep_err = reparam_invariance_error(rng);
    const auto b = chart_battery(ex.chart, ex.net, rng, 20, o.tol);
    const bool pass = xi_err <= 1e-9 && rep_err <= 1e-7 && b.net_roundtrip <= 1e-8 &&
                      b.equivalence_agree == b.equivalence_checks;
    res["chart_roundtrip"] = {{"xi_identity", {{"max_error", xi_err}, {"tol", 1e-9}, {"samples", 1000}}},
                              {"reparametrization", {{"max_error", rep_err}, {"tol", 1e-7}, {"curves", 20}, {"reps", 5}}},
                              {"net_roundtrip", {{"max_error", b.net_roundtrip}, {"tol", 1e-8}}},
                              {"equivalence", {{"checks", b.equivalence_checks}, {"agree", b.equivalence_agree},
                                               {"tol", o.tol}, {"center_stationary", b.center_stationary}}},
                              {"pass", pass}};
    if (!pass) throw SolverError(SolverError::Kind::NoProgress, "chart-roundtrip: battery failed");
  } else if (cmd == "export-plot") {
    if (req.csv.empty()) throw ValidationError("export-plot: --csv is required");
    std::vector<NamedField> fields;
    for (const auto& f : req.fields) {
      if (f == "residual") {
        NetField r;
        r.values = stationarity_residual(ex.chart, ex.net).edge_residual;
        fields.push_back({"r", r});
      } else if (f == "kernel") {
        auto k = kernel_columns(is_nondegenerate(ex.chart, ex.net, o.svd_tol, o.tol));
        fields.insert(fields.end(), k.begin(), k.end());
      } else {
        throw ValidationError("export-plot: unknown field '" + f + "' (expected residual or kernel)");
      }
    }
    write_csv(req, ex.net, fields);
    json cols = json::array();
    for (const auto& f : fields) cols.push_back(f.name);
    res["export"] = {{"csv", req.csv}, {"fields", cols}, {"length", length(ex.chart, ex.net)}};
  } else {
    throw ValidationError("unknown command '" + cmd + "'");
  }
}

}  // namespace detail

/// Runs one command; diagnostics go to `err`. The results document is also
/// returned through `results` when non-null.
inline int run(const RunRequest& req, std::ostream& err = std::cerr, json* results = nullptr) {
  json res = {{"tool", {{"name", "gnet"}, {"version", kVersion}}}, {"command", req.command}};
  if (req.timestamp) res["timestamp"] = detail::utc_now();
  int code = kExitOk;
  try {
    if (req.command == "generate") {
      if (req.case_name.empty()) throw ValidationError("generate: --case is required");
      json spec = generate_case(req.case_name);
      if (req.seed) spec["options"]["seed"] = *req.seed;
      detail::write_text(req.out, spec.dump(2) + "\n");
      if (results) *results = spec;
      return kExitOk;
    }
    res["spec"] = req.spec;
    const Experiment ex = parse_experiment(detail::read_spec_json(req));
    res["options"] = ex.options.to_json();
    detail::run_command(req, ex, res);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    res["error"] = {{"kind", "Validation"}, {"message", e.what()}};
    code = kExitValidation;
  } catch (const SolverError& e) {
    err << "solver error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    res["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    code = kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    res["error"] = {{"kind", "Numerical"}, {"message", e.what()}};
    code = kExitSolver;
  }
  try {
    detail::write_text(req.out, res.dump(2) + "\n");
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    code = kExitValidation;
  }
  if (results) *results = res;
  return code;
}

}  // namespace gnet::harness
