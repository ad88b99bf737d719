#include "gnet/harness/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace gnet::harness;
  CLI::App app{"gnet: stationary geodesic nets, Jacobi kernels and degeneracy breaking"};
  app.require_subcommand(1);

  RunRequest req;
  std::optional<double> tol, solve_tol, svd_tol;
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;

  auto common = [&](CLI::App* sub, bool needs_spec) {
    auto* spec = sub->add_option("--spec", req.spec, "experiment spec (JSON)")->check(CLI::ExistingFile);
    if (needs_spec) spec->required();
    sub->add_option("--out", req.out, "results file (stdout when omitted)");
    sub->add_option("--csv", req.csv, "per-sample CSV output");
    sub->add_option("--tol", tol, "stationarity tolerance");
    sub->add_option("--solve-tol", solve_tol, "Newton residual target");
    sub->add_option("--svd-tol", svd_tol, "relative singular value threshold");
    sub->add_option("--seed", seed, "seed for jitter and random batteries");
    sub->add_flag("--no-timestamp", no_timestamp, "omit the timestamp field");
  };

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"check", "stationarity report"},
      {"solve", "Newton solve for a stationary net"},
      {"jacobi", "Jacobi kernel and nondegeneracy verdict"},
      {"perturb", "break degeneracy with conformal bumps"},
      {"continue", "continue the net along the spec's amplitude schedule"},
      {"chart-roundtrip", "local-coordinate battery"},
      {"export-plot", "per-sample CSV"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common(sub, true);
    if (name == "export-plot")
      sub->add_option("--field", req.fields, "extra columns: residual, kernel")->check(CLI::IsMember({"residual", "kernel"}));
    sub->callback([&req, n = name] { req.command = n; });
  }
  auto* gen = app.add_subcommand("generate", "write a built-in test case spec");
  gen->add_option("--case", req.case_name, "case name")->required()->check(CLI::IsMember(case_names()));
  gen->add_option("--out", req.out, "spec file (stdout when omitted)");
  gen->add_option("--seed", seed, "seed stored in the spec options");
  gen->callback([&req] { req.command = "generate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  req.tol = tol;
  req.solve_tol = solve_tol;
  req.svd_tol = svd_tol;
  req.seed = seed;
  req.timestamp = !no_timestamp;
  return run(req, std::cerr);
}
