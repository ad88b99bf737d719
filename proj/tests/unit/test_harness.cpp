#include "gnet/harness/run.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace gnet;
using namespace gnet::harness;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const auto dir = fs::temp_directory_path() / "gnet_harness" / (std::string(info->test_suite_name()) + "." + info->name());
  fs::create_directories(dir);
  return dir;
}

std::string write_spec(const std::string& name, const json& spec) {
  const auto path = scratch_dir() / name;
  std::ofstream(path) << spec.dump(2);
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json run_json(RunRequest req, int expected) {
  std::ostringstream err;
  json res;
  req.out = (scratch_dir() / (req.command + ".json")).string();
  EXPECT_EQ(run(req, err, &res), expected) << err.str();
  return res;
}

}  // namespace

TEST(Cases, HoneycombValidatesAndIsStationary) {
  const auto ex = parse_experiment(generate_case("honeycomb-torus"));
  EXPECT_EQ(classify(ex.graph), GraphClass::GoodStar);
  EXPECT_LE(stationarity_residual(ex.chart, ex.net).aggregate, 1e-6);
}

TEST(Cases, EquatorIsLoopOfLengthTwoPi) {
  const auto ex = parse_experiment(generate_case("sphere-equator"));
  EXPECT_EQ(classify(ex.graph), GraphClass::LoopWithMultiplicity);
  EXPECT_NEAR(length(ex.chart, ex.net), 2 * std::numbers::pi, 1e-5);
}

TEST(Cases, ThetaBalancedAtPoles) {
  const auto ex = parse_experiment(generate_case("sphere-theta"));
  EXPECT_EQ(classify(ex.graph), GraphClass::GoodStar);
  const auto r = stationarity_residual(ex.chart, ex.net);
  for (double b : r.balance_norm) EXPECT_LE(b, 1e-4);
}

TEST(Cases, UnknownNameRejected) { EXPECT_THROW(generate_case("klein-bottle"), ValidationError); }

TEST(Run, CheckHoneycomb) {
  const auto res = run_json({.command = "check", .spec = write_spec("hc.json", generate_case("honeycomb-torus"))}, 0);
  EXPECT_LE(res["stationarity"]["aggregate"].get<double>(), 1e-6);
  EXPECT_EQ(res["stationarity"]["tol"].get<double>(), 1e-5);
}

TEST(Run, JacobiHoneycomb) {
  const auto res = run_json({.command = "jacobi", .spec = write_spec("hc.json", generate_case("honeycomb-torus"))}, 0);
  EXPECT_EQ(res["kernel"]["dimension"].get<int>(), 2);
  EXPECT_EQ(res["kernel"]["verdict"].get<std::string>(), "Degenerate");
}

TEST(Run, DegreeOneVertexIsValidationFailure) {
  json spec = generate_case("honeycomb-torus");
  spec["graph"]["vertices"].push_back("C");
  spec["graph"]["edges"].push_back({{"id", "E4"}, {"v0", "A"}, {"v1", "C"}, {"multiplicity", 1}});
  spec["net"]["edges"]["E4"] = {{"generator", "straight"}, {"from", {0.0, 0.0}}, {"to", {0.3, 0.3}}};
  const auto res = run_json({.command = "check", .spec = write_spec("bad.json", spec)}, 2);
  EXPECT_NE(res["error"]["message"].get<std::string>().find("'C'"), std::string::npos);
}

TEST(Run, UnknownKeyRejected) {
  json spec = generate_case("flat-loop");
  spec["options"]["colour"] = "blue";
  run_json({.command = "check", .spec = write_spec("key.json", spec)}, 2);
}

TEST(Run, SolverFailureExitCode) {
  json spec = generate_case("honeycomb-torus");
  spec["options"]["jitter"] = 0.05;
  spec["options"]["max_iterations"] = 1;
  const auto res = run_json({.command = "solve", .spec = write_spec("jit.json", spec)}, 3);
  EXPECT_EQ(res["error"]["kind"].get<std::string>(), "MaxIterations");
}

TEST(Run, SolveJitteredHoneycomb) {
  json spec = generate_case("honeycomb-torus");
  spec["options"]["jitter"] = 0.05;
  spec["options"]["seed"] = 11;
  const auto res = run_json({.command = "solve", .spec = write_spec("jit.json", spec), .solve_tol = 1e-10}, 0);
  EXPECT_LE(res["solve"]["residual"].get<double>(), 1e-10);
  EXPECT_TRUE(res.contains("result_spec"));
  const auto back = parse_experiment(res["result_spec"]);
  EXPECT_LE(stationarity_residual(back.chart, back.net).aggregate, 1e-10);
}

TEST(Run, DeterministicApartFromTimestamp) {
  json spec = generate_case("sphere-equator");
  spec["options"]["jitter"] = 0.01;
  const auto path = write_spec("eq.json", spec);
  std::string first;
  for (int i = 0; i < 2; ++i) {
    RunRequest req{.command = "solve", .spec = path, .solve_tol = 1e-8};
    req.out = (scratch_dir() / ("det" + std::to_string(i) + ".json")).string();
    req.timestamp = false;
    std::ostringstream err;
    ASSERT_EQ(run(req, err), 0) << err.str();
    if (i == 0) first = slurp(req.out);
    else EXPECT_EQ(slurp(req.out), first);
  }
}

TEST(Run, ExportPlotRoundTrip) {
  for (const auto& name : case_names()) {
    const auto path = write_spec(name + ".json", generate_case(name));
    const auto csv = (scratch_dir() / (name + ".csv")).string();
    const auto res = run_json({.command = "export-plot", .spec = path, .csv = csv, .fields = {"residual"}}, 0);
    const auto ex = load_experiment(path);
    std::ifstream in(csv);
    const auto net = read_plot_csv(in, ex.graph);
    EXPECT_LE(std::abs(length(ex.chart, net) - length(ex.chart, ex.net)), 1e-12) << name;
    EXPECT_EQ(res["export"]["fields"][0].get<std::string>(), "r");
  }
}

TEST(Run, ExportPlotNeedsCsv) {
  run_json({.command = "export-plot", .spec = write_spec("fl.json", generate_case("flat-loop"))}, 2);
}

TEST(Run, ChartRoundtripPasses) {
  const auto res =
      run_json({.command = "chart-roundtrip", .spec = write_spec("th.json", generate_case("sphere-theta"))}, 0);
  EXPECT_TRUE(res["chart_roundtrip"]["pass"].get<bool>());
}

TEST(Run, PerturbHoneycombAndReload) {
  const auto res = run_json({.command = "perturb", .spec = write_spec("hc.json", generate_case("honeycomb-torus"))}, 0);
  EXPECT_EQ(res["kernel"]["verdict"].get<std::string>(), "Nondegenerate");
  EXPECT_LE(res["bumps"].size(), 3u);
  const auto ex = parse_experiment(res["result_spec"]);
  EXPECT_EQ(is_nondegenerate(ex.chart, ex.net).kernel_dimension, 0);
}

TEST(Run, ContinueAlongSchedule) {
  json spec = generate_case("honeycomb-torus");
  spec["metric"]["bumps"] = json::array({{{"type", "normal"},
                                          {"amplitude", 0.05},
                                          {"center", {0.5, 0.0}},
                                          {"radius", 0.2},
                                          {"beta", 4.0},
                                          {"tangent", {1.0, 0.0}},
                                          {"normal", {0.0, 1.0}}}});
  spec["options"]["schedule"] = {0.2, 0.6, 1.0};
  const auto res = run_json({.command = "continue", .spec = write_spec("cont.json", spec)}, 0);
  ASSERT_EQ(res["continuation"]["nets"].size(), 3u);
  for (const auto& n : res["continuation"]["nets"]) EXPECT_LE(n["stationarity"]["aggregate"].get<double>(), 1e-8);
}

TEST(Run, GenerateWritesLoadableSpec) {
  RunRequest req{.command = "generate", .case_name = "sphere-theta"};
  req.out = (scratch_dir() / "gen.json").string();
  std::ostringstream err;
  ASSERT_EQ(run(req, err), 0);
  EXPECT_NO_THROW(load_experiment(req.out));
}
