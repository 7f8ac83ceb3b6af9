#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdho/harness/io.hpp"
#include "tdho/harness/run.hpp"
#include "tdho/harness/scenario.hpp"
#include "tdho/phase.hpp"

namespace tdho::harness {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct GridAxis {
  std::string path;  // dotted path into the scenario document
  std::vector<json> values;
};

/// "quantum.dim=32,64,128"
inline GridAxis parse_grid_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--grid", "expected path=v1,v2,... in '" + spec + "'");
  GridAxis axis{spec.substr(0, eq), {}};
  std::string rest = spec.substr(eq + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const auto token = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!token.empty()) {
      json v = json::parse(token, nullptr, false);
      if (v.is_discarded() || !v.is_number()) {
        throw ConfigError("--grid " + axis.path, "value '" + token + "' is not a number");
      }
      axis.values.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (axis.values.empty()) throw ConfigError("--grid " + axis.path, "empty grid");
  return axis;
}

namespace detail {

inline json& resolve_numeric(json& doc, const std::string& path) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError("--grid " + path, "path is not declared in the scenario");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number()) throw ConfigError("--grid " + path, "only numeric fields can be swept");
  return *node;
}

}  // namespace detail

struct SweepResult {
  json report;
  bool passed = false;
  std::vector<RunResult> runs;
};

/// Expands the Cartesian product of the axes over the template, validates
/// every child before running any of them, then runs the children
/// concurrently. Results are ordered by grid index.
inline SweepResult run_sweep(const json& base, const std::vector<GridAxis>& axes, const RunOptions& options) {
  if (axes.empty()) throw ConfigError("--grid", "empty grid");
  const auto base_sc = scenario_from_json(base);

  std::vector<std::vector<std::size_t>> combos{{}};
  for (const auto& axis : axes) {
    if (axis.values.empty()) throw ConfigError("--grid " + axis.path, "empty grid");
    std::vector<std::vector<std::size_t>> next;
    for (const auto& c : combos) {
      for (std::size_t v = 0; v < axis.values.size(); ++v) {
        auto e = c;
        e.push_back(v);
        next.push_back(std::move(e));
      }
    }
    combos = std::move(next);
  }

  std::vector<Scenario> children;
  std::vector<json> parameters;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    json doc = base;
    json params = json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      detail::resolve_numeric(doc, axes[a].path) = axes[a].values[combos[i][a]];
      params[axes[a].path] = axes[a].values[combos[i][a]];
    }
    doc["name"] = base_sc.name + "__" + std::to_string(i);
    try {
      children.push_back(scenario_from_json(doc));
      detail::prepare(children.back());
    } catch (const ConfigError& e) {
      throw ConfigError(e.field(), "grid point " + std::to_string(i) + " " + params.dump() + ": " + e.message());
    }
    parameters.push_back(params);
  }

  RunOptions child_options = options;
  child_options.write_csv = false;
  child_options.write_report = false;
  std::vector<std::future<RunResult>> futures;
  for (const auto& child : children) {
    futures.push_back(std::async(std::launch::async, [&child, child_options] { return run_scenario(child, child_options); }));
  }

  SweepResult out;
  out.passed = true;
  json runs = json::array();
  std::map<std::string, json> worst;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    out.runs.push_back(futures[i].get());
    const auto& r = out.runs.back();
    out.passed = out.passed && r.passed;
    json checks = json::object();
    for (const auto& c : r.checks) {
      checks[c.name] = {{"value", c.value}, {"status", std::string(to_string(c.status))}};
      auto& w = worst[c.name];
      // NaN outranks everything so a broken run is never hidden.
      bool worse = w.is_null();
      if (!worse) {
        const double cur = w["max_value"].get<double>();
        worse = !std::isnan(cur) && (std::isnan(c.value) || c.value > cur);
      }
      if (worse) {
        w = {{"max_value", c.value}, {"at_index", i}};
      }
      if (c.status == CheckStatus::fail) w["failed_runs"].push_back(i);
    }
    runs.push_back({{"index", i}, {"name", r.name}, {"parameters", parameters[i]},
                    {"status", r.passed ? "pass" : "fail"}, {"checks", checks}});
  }
  json axes_json = json::array();
  for (const auto& a : axes) axes_json.push_back({{"path", a.path}, {"values", a.values}});
  out.report = {{"schema", "tdho-sweep-report"},
                {"schema_version", kReportSchemaVersion},
                {"scenario_name", base_sc.name},
                {"status", out.passed ? "pass" : "fail"},
                {"axes", axes_json},
                {"runs", runs},
                {"worst", worst}};
  if (options.write_report) {
    atomic_write(options.output_dir / (base_sc.name + ".sweep.json"), out.report.dump(2) + "\n");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase matrix dump
// ---------------------------------------------------------------------------

/// row,col,re,im in row-major order, 17 significant digits.
inline std::string phase_matrix_csv(const PhaseOperator& phi) {
  std::string out = "row,col,re,im\n";
  const auto n = phi.m.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      out += std::to_string(r) + "," + std::to_string(c) + "," + format_g17(phi.m(r, c).real()) + "," +
             format_g17(phi.m(r, c).imag()) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands (exit codes: 0 pass, 1 gated failure, 2 configuration error)
// ---------------------------------------------------------------------------

inline void print_summary(const RunResult& r, std::ostream& out) {
  for (const auto& c : r.checks) {
    out << (c.status == CheckStatus::pass ? "PASS " : c.status == CheckStatus::fail ? "FAIL " : "DOC  ") << c.name
        << "  value=" << format_g17(c.value);
    if (c.gated) out << "  tol=" << format_g17(c.tolerance);
    if (c.block) out << "  block=" << c.block->block << "/" << c.block->dim;
    if (!c.error.empty()) out << "  error: " << c.error;
    out << "\n";
  }
  out << "scenario " << r.name << ": " << (r.passed ? "pass" : "fail") << "\n";
}

inline int cmd_run(const std::string& file, const std::string& output_dir, bool write_csv, std::ostream& out,
                   std::ostream& err) {
  try {
    const auto sc = parse_scenario(read_file(file));
    RunOptions opts;
    opts.write_csv = write_csv;
    opts.output_dir = resolve_output_dir(output_dir);
    const auto result = run_scenario(sc, opts);
    print_summary(result, out);
    if (result.report.contains("error")) err << "integration failed: " << result.report["error"].get<std::string>() << "\n";
    return result.passed ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_sweep(const std::string& file, const std::vector<std::string>& grid_specs, const std::string& output_dir,
                     std::ostream& out, std::ostream& err) {
  try {
    if (grid_specs.empty()) throw ConfigError("--grid", "empty grid");
    std::vector<GridAxis> axes;
    for (const auto& g : grid_specs) axes.push_back(parse_grid_spec(g));
    const auto doc = parse_json_text(read_file(file));
    RunOptions opts;
    opts.output_dir = resolve_output_dir(output_dir);
    const auto result = run_sweep(doc, axes, opts);
    for (const auto& run : result.report["runs"]) {
      out << run["status"].get<std::string>() << "  " << run["name"].get<std::string>() << "  "
          << run["parameters"].dump() << "\n";
    }
    out << "sweep " << result.report["scenario_name"].get<std::string>() << ": "
        << (result.passed ? "pass" : "fail") << "\n";
    return result.passed ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline int cmd_phase_matrix(std::size_t dim, const std::string& norm, const std::string& path, std::ostream& out,
                            std::ostream& err) {
  try {
    if (norm != "pi" && norm != "none") throw ConfigError("--norm", "expected pi or none");
    const auto phi = turski_phase_matrix(dim, norm == "pi" ? PhaseNormalization::with_inv_pi : PhaseNormalization::none);
    atomic_write(path, phase_matrix_csv(phi));
    out << "wrote " << dim * dim << " entries to " << path << "\n";
    return kExitPass;
  } catch (const DimensionError& e) {
    err << "config error: --dim: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace tdho::harness
