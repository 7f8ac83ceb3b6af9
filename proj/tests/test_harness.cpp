#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tdho/harness/commands.hpp"

namespace {

using namespace tdho;
using namespace tdho::harness;
namespace fs = std::filesystem;

std::string scenario_path(const std::string& name) { return std::string(TDHO_SCENARIO_DIR) + "/" + name + ".json"; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tdho-harness-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const CheckRecord& record(const RunResult& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no record " + name);
}

std::string config_field(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

RunOptions quiet(const fs::path& dir) {
  RunOptions o;
  o.write_csv = false;
  o.write_report = false;
  o.output_dir = dir;
  return o;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

TEST(Scenario, MinimalConstantGetsDefaults) {
  const auto sc = parse_scenario(R"({"name": "m", "profile": {"kind": "constant", "omega": 1.0, "t_max": 5}})");
  EXPECT_EQ(sc.profile.kind, ProfileKind::constant);
  EXPECT_EQ(sc.profile.t_min, 0.0);
  EXPECT_EQ(sc.grid_step, 0.05);
  EXPECT_EQ(sc.integrator.rel_tol, 1e-10);
  EXPECT_EQ(sc.integrator.abs_tol, 1e-12);
  EXPECT_EQ(sc.quantum.dim, 64u);
  EXPECT_FALSE(sc.initial.explicit_pair);
  EXPECT_TRUE(sc.has_check("wronskian_drift"));
  EXPECT_TRUE(sc.has_check("ermakov_residual"));
  EXPECT_FALSE(sc.has_check("manley_rowe"));
  EXPECT_FALSE(sc.needs_quantum());
  for (const auto& c : sc.checks) {
    const auto* info = find_check(c.name);
    ASSERT_NE(info, nullptr);
    EXPECT_EQ(c.tolerance, info->default_tolerance);
  }
  EXPECT_EQ(run_scenario(sc, quiet(scratch("minimal"))).exit_code(), kExitPass);
}

TEST(Scenario, EchoRoundTrip) {
  const std::string text = R"({
    "name": "echo",
    "profile": {"kind": "tanh_sweep", "omega_start": 1, "omega_end": 2, "center": 300, "width": 200, "t_max": 600},
    "integrator": {"rel_tol": 1e-11, "max_step": 0.1},
    "quantum": {"dim": 32, "probes": [1, [0, 2]]},
    "checks": {"wronskian_drift": {"tolerance": 1e-9}, "conjugation": {"params": {"time": 300}}}
  })";
  const auto sc = parse_scenario(text);
  const auto echo = scenario_to_json(sc);
  EXPECT_EQ(echo["profile"]["omega_start"], 1.0);
  EXPECT_EQ(echo["profile"]["omega_end"], 2.0);
  EXPECT_EQ(echo["profile"]["width"], 200.0);
  EXPECT_EQ(echo["profile"]["center"], 300.0);
  EXPECT_EQ(echo["integrator"]["rel_tol"], 1e-11);
  EXPECT_EQ(echo["quantum"]["dim"], 32);
  const auto again = scenario_from_json(echo);
  EXPECT_EQ(scenario_to_json(again), echo);
}

TEST(Scenario, NegativeOmegaEndHasFieldPath) {
  EXPECT_EQ(config_field(R"({"name": "x", "profile": {"kind": "tanh_sweep", "omega_start": 1, "omega_end": -2,
                             "center": 1, "width": 1, "t_max": 2}})"),
            "profile.omega_end");
}

TEST(Scenario, RejectionsCarryFieldPaths) {
  const std::string profile = R"("profile": {"kind": "constant", "omega": 1, "t_max": 2})";
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "extra": 1})"), "extra");
  EXPECT_EQ(config_field(R"({"name": "x", "profile": {"kind": "constant", "omega": 1, "t_max": 2, "w": 1}})"),
            "profile.w");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "checks": {"nope": {}}})"), "checks.nope");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "checks": {"wronskian_drift": {"tolerance": 0}}})"),
            "checks.wronskian_drift.tolerance");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "checks": {"phase_eom": {"tolerance": 1}}})"),
            "checks.phase_eom.tolerance");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "checks": {"wronskian_drift": {"gated": false}}})"),
            "checks.wronskian_drift.gated");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "quantum": {"dim": 3}})"), "quantum.dim");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "grid": {"step": "fine"}})"), "grid.step");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "quantum": {"sample_times": [0, 9]}})"),
            "quantum.sample_times[1]");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "schema_version": 2})"), "schema_version");
  EXPECT_EQ(config_field(R"({"name": "x", )" + profile + R"(, "processes": [{"omega_out": 2.5,
             "inputs": [{"id": "a", "coefficient": 1, "omega": 2.5, "n": 1}]}]})"),
            "processes[0].omega_out");
}

TEST(Scenario, MalformedTextReportsLineAndColumn) {
  try {
    parse_scenario("{\n  \"name\": \"m\",\n  \"profile\": {\"kind\": \"constant\",, \"t_max\": 1}\n}");
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, ProcessArithmetic) {
  const auto sc = parse_scenario(R"({"name": "p", "profile": {"kind": "constant", "omega": 1, "t_max": 1},
      "processes": [{"name": "a", "omega_out": "5/2", "inputs": [
        {"id": "w1", "coefficient": 2, "omega": 1, "n": 100},
        {"id": "w2", "coefficient": 1, "omega": "0.5", "n": 200}]}]})");
  ASSERT_EQ(sc.processes.size(), 1u);
  EXPECT_TRUE(sc.processes[0].exact);
  EXPECT_EQ(sc.processes[0].rational.omega_out, mr::Rational(5) / 2);
  EXPECT_EQ(sc.processes[0].rational.inputs[1].mode.omega_i, mr::Rational(1) / 2);
  EXPECT_EQ(sc.processes[0].rational.inputs[1].coefficient, 1);
  EXPECT_TRUE(sc.has_check("manley_rowe"));
  EXPECT_THROW(parse_scenario(R"({"name": "p", "profile": {"kind": "constant", "omega": 1, "t_max": 1},
      "processes": [{"name": "a", "omega_out": 1, "inputs": [{"id": "w1", "omega": 1, "n": 1}]}]})"),
               ConfigError);
}

TEST(Scenario, ParameterValidationBeforeIntegration) {
  const auto bad_time = parse_scenario(R"({"name": "t", "profile": {"kind": "constant", "omega": 1, "t_max": 2},
      "checks": {"conjugation": {"params": {"time": 1.01}}}})");
  EXPECT_THROW(run_scenario(bad_time, quiet(scratch("bad-time"))), ConfigError);
  const auto rescaled = parse_scenario(R"({"name": "g", "profile": {"kind": "constant", "omega": 1, "t_max": 2},
      "initial": {"kind": "explicit", "u1": 0, "du1": -2, "u2": 1, "du2": 0},
      "checks": {"energy_relation": {}}})");
  EXPECT_THROW(run_scenario(rescaled, quiet(scratch("rescaled"))), ConfigError);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

TEST(Run, ConstantUnitPasses) {
  const auto r = run_scenario(parse_scenario(read_file(scenario_path("constant-unit"))), quiet(scratch("cu")));
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.exit_code(), kExitPass);
  for (const auto& c : r.checks) {
    if (c.gated) EXPECT_EQ(c.status, CheckStatus::pass) << c.name;
  }
}

TEST(Run, AdiabaticSweepRecordsSmallDrift) {
  const auto r = run_scenario(parse_scenario(read_file(scenario_path("tanh-sweep-adiabatic"))), quiet(scratch("ad")));
  EXPECT_TRUE(r.passed);
  EXPECT_LE(record(r, "wronskian_drift").value, 1e-8);
}

TEST(Run, SumFrequencyLedgerExact) {
  const auto r = run_scenario(parse_scenario(read_file(scenario_path("sum-frequency-vuv"))), quiet(scratch("sf")));
  EXPECT_TRUE(r.passed);
  const auto& mr = record(r, "manley_rowe");
  EXPECT_EQ(mr.value, 0.0);
  const auto& procs = mr.details["processes"];
  EXPECT_EQ(procs[0]["lhs"], rational_json(mr::Rational(250)));
  EXPECT_EQ(procs[0]["rhs"], rational_json(mr::Rational(250)));
  EXPECT_EQ(procs[1]["lhs"], rational_json(mr::Rational(180)));
  EXPECT_EQ(procs[2]["relation_asserted"], false);
}

TEST(Run, CorruptedToleranceFails) {
  auto sc = parse_scenario(read_file(scenario_path("constant-unit")));
  for (auto& c : sc.checks) {
    if (c.name == "invariant_drift") c.tolerance = 1e-300;
  }
  const auto r = run_scenario(sc, quiet(scratch("corrupt")));
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.exit_code(), kExitFail);
}

TEST(Run, IntegrationFailureIsGatedFailure) {
  auto sc = parse_scenario(read_file(scenario_path("constant-unit")));
  sc.integrator.step_limit = 5;
  const auto dir = scratch("intfail");
  RunOptions o;
  o.output_dir = dir;
  const auto r = run_scenario(sc, o);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(r.report.contains("error"));
  EXPECT_FALSE(fs::exists(dir / "constant-unit.csv"));
  EXPECT_TRUE(fs::exists(dir / "constant-unit.report.json"));
}

TEST(Run, DocumentedChecksNeverGate) {
  const auto r = run_scenario(parse_scenario(read_file(scenario_path("rescaled-g2"))), quiet(scratch("g2")));
  EXPECT_TRUE(r.passed);
  const auto& unit = record(r, "ermakov_residual_unit_form");
  EXPECT_EQ(unit.status, CheckStatus::documented);
  EXPECT_GT(unit.value, 0.1);
}

TEST(Run, CsvIsDeterministicWithFixedPrecision) {
  const auto sc = parse_scenario(read_file(scenario_path("fast-sweep")));
  const auto a = scratch("csv-a"), b = scratch("csv-b");
  RunOptions oa, ob;
  oa.output_dir = a;
  ob.output_dir = b;
  run_scenario(sc, oa);
  run_scenario(sc, ob);
  const auto ca = slurp(a / "fast-sweep.csv");
  const auto cb = slurp(b / "fast-sweep.csv");
  EXPECT_EQ(ca, cb);
  std::istringstream lines(ca);
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,u1,du1,u2,du2,rho,drho,s_rho,omega,G,I,ermakov_residual,Omega");
  for (int i = 0; i < 5 && std::getline(lines, row); ++i) {
    std::istringstream fields(row);
    std::string cell;
    while (std::getline(fields, cell, ',')) EXPECT_EQ(cell, format_g17(std::stod(cell))) << row;
  }
}

TEST(Run, ReportSchema) {
  const auto dir = scratch("report");
  RunOptions o;
  o.output_dir = dir;
  run_scenario(parse_scenario(read_file(scenario_path("constant-unit"))), o);
  const auto rep = json::parse(slurp(dir / "constant-unit.report.json"));
  EXPECT_EQ(rep["schema"], "tdho-run-report");
  EXPECT_EQ(rep["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(rep["status"], "pass");
  EXPECT_EQ(rep["exit_code"], 0);
  ASSERT_TRUE(rep["checks"].is_array());
  for (const auto& c : rep["checks"]) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_TRUE(c.contains("status"));
    EXPECT_TRUE(c.contains("value"));
  }
  EXPECT_EQ(rep["artifacts"][0]["schema_version"], kCsvSchemaVersion);
  for (const auto& entry : fs::directory_iterator(dir)) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos) << entry.path();
  }
}

TEST(Run, DocumentedProbesReproduceExactly) {
  const auto sc = parse_scenario(read_file(scenario_path("constant-unit")));
  const auto a = run_scenario(sc, quiet(scratch("rep-a")));
  const auto b = run_scenario(sc, quiet(scratch("rep-b")));
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].value, b.checks[i].value) << a.checks[i].name;
    EXPECT_EQ(a.checks[i].details, b.checks[i].details) << a.checks[i].name;
  }
}

// ---------------------------------------------------------------------------
// Output handling
// ---------------------------------------------------------------------------

TEST(Output, DirectoryPrecedence) {
  ::setenv(kOutputDirEnv, "/tmp/from-env", 1);
  EXPECT_EQ(resolve_output_dir("flag"), fs::path("flag"));
  EXPECT_EQ(resolve_output_dir(), fs::path("/tmp/from-env"));
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(), fs::path(kDefaultOutputDir));
}

TEST(Output, AtomicWriteReplacesAndCleansUp) {
  const auto dir = scratch("atomic");
  atomic_write(dir / "nested" / "f.txt", "first");
  atomic_write(dir / "nested" / "f.txt", "second");
  EXPECT_EQ(slurp(dir / "nested" / "f.txt"), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "nested")) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(Output, UnwritableTargetIsOutputError) {
  const auto dir = scratch("unwritable");
  atomic_write(dir / "file", "x");
  EXPECT_THROW(atomic_write(dir / "file" / "below.csv", "y"), OutputError);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_phase_matrix(4, "pi", (dir / "file" / "p.csv").string(), out, err), kExitConfig);
}

TEST(Output, G17Formatting) {
  EXPECT_EQ(format_g17(0.1), "0.10000000000000001");
  EXPECT_EQ(format_g17(1.0), "1");
  EXPECT_EQ(format_g17(std::numeric_limits<double>::quiet_NaN()), "nan");
}

// ---------------------------------------------------------------------------
// Sweeps and commands
// ---------------------------------------------------------------------------

TEST(Sweep, GridSpecParsing) {
  const auto axis = parse_grid_spec("quantum.dim=32,64,128");
  EXPECT_EQ(axis.path, "quantum.dim");
  ASSERT_EQ(axis.values.size(), 3u);
  EXPECT_EQ(axis.values[2], 128);
  EXPECT_THROW(parse_grid_spec("quantum.dim="), ConfigError);
  EXPECT_THROW(parse_grid_spec("=1,2"), ConfigError);
  EXPECT_THROW(parse_grid_spec("profile.width=1,abc"), ConfigError);
}

TEST(Sweep, EmptyGridIsConfigError) {
  const auto doc = parse_json_text(read_file(scenario_path("adiabatic-study")));
  EXPECT_THROW(run_sweep(doc, {}, quiet(scratch("empty"))), ConfigError);
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(scenario_path("adiabatic-study"), {}, scratch("empty-cmd").string(), out, err), kExitConfig);
}

TEST(Sweep, UndeclaredPathRejected) {
  const auto doc = parse_json_text(read_file(scenario_path("adiabatic-study")));
  EXPECT_THROW(run_sweep(doc, {parse_grid_spec("profile.nothing=1,2")}, quiet(scratch("undeclared"))), ConfigError);
}

TEST(Sweep, ConjugationDefectFallsWithDimension) {
  const auto doc = parse_json_text(read_file(scenario_path("conjugation-truncation")));
  const auto res = run_sweep(doc, {parse_grid_spec("quantum.dim=32,64,128")}, quiet(scratch("dims")));
  ASSERT_EQ(res.runs.size(), 3u);
  const double d32 = record(res.runs[0], "conjugation").value;
  const double d64 = record(res.runs[1], "conjugation").value;
  const double d128 = record(res.runs[2], "conjugation").value;
  EXPECT_GT(d32, d64);
  EXPECT_GT(d64, d128);
  EXPECT_EQ(res.report["schema"], "tdho-sweep-report");
}

TEST(Sweep, AdiabaticDeviationFallsWithWidth) {
  const auto doc = parse_json_text(read_file(scenario_path("adiabatic-study")));
  const auto dir = scratch("widths");
  RunOptions o;
  o.output_dir = dir;
  const auto res = run_sweep(doc, {parse_grid_spec("profile.width=0.1,10,200")}, o);
  EXPECT_TRUE(res.passed);
  const double w0 = record(res.runs[0], "adiabatic_deviation").value;
  const double w1 = record(res.runs[1], "adiabatic_deviation").value;
  const double w2 = record(res.runs[2], "adiabatic_deviation").value;
  EXPECT_GT(w0, w1);
  EXPECT_GT(w1, w2);
  EXPECT_TRUE(fs::exists(dir / "adiabatic-study.sweep.json"));
}

TEST(Commands, ExitCodes) {
  const auto dir = scratch("cmd");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(scenario_path("constant-unit"), dir.string(), true, out, err), kExitPass);
  EXPECT_TRUE(fs::exists(dir / "constant-unit.csv"));
  EXPECT_EQ(cmd_run((dir / "missing.json").string(), dir.string(), true, out, err), kExitConfig);
  std::ofstream(dir / "bad.json") << "{\"name\": ";
  EXPECT_EQ(cmd_run((dir / "bad.json").string(), dir.string(), true, out, err), kExitConfig);
  std::ofstream(dir / "strict.json")
      << R"({"name": "strict", "profile": {"kind": "constant", "omega": 1, "t_max": 2},
             "checks": {"rho_sq_omega": {"tolerance": 1e-300}, "invariant_drift": {"tolerance": 1e-300}}})";
  EXPECT_EQ(cmd_run((dir / "strict.json").string(), dir.string(), false, out, err), kExitFail);
}

TEST(Commands, PhaseMatrixDump) {
  const auto dir = scratch("phase");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_phase_matrix(4, "pi", (dir / "p.csv").string(), out, err), kExitPass);
  std::istringstream lines(slurp(dir / "p.csv"));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "row,col,re,im");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream f(line);
    std::string r, c, re, im;
    std::getline(f, r, ',');
    std::getline(f, c, ',');
    std::getline(f, re, ',');
    std::getline(f, im, ',');
    if (r == c) {
      EXPECT_EQ(std::stod(re), 0.0);
      EXPECT_EQ(std::stod(im), 0.0);
    }
  }
  EXPECT_EQ(rows, 16);
  EXPECT_EQ(cmd_phase_matrix(3, "pi", (dir / "q.csv").string(), out, err), kExitConfig);
  EXPECT_EQ(cmd_phase_matrix(8, "tau", (dir / "q.csv").string(), out, err), kExitConfig);
}

TEST(Catalog, EveryCheckDocumented) {
  for (const auto& info : check_catalog()) {
    EXPECT_FALSE(info.measures.empty()) << info.name;
    if (info.cls == CheckClass::gated) {
      EXPECT_GT(info.default_tolerance, 0.0) << info.name;
    }
  }
}

}  // namespace
