#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tdho/classical.hpp"
#include "tdho/errors.hpp"
#include "tdho/manley_rowe.hpp"
#include "tdho/profile.hpp"

namespace tdho::harness {

using json = nlohmann::json;

inline constexpr int kScenarioSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Check catalog
// ---------------------------------------------------------------------------

enum class CheckClass {
  gated,       // measured value must be <= tolerance
  documented,  // measured and reported; never affects the exit status
  diagnostic,  // documented by default, gated when the scenario asks for it
};

enum class CheckGroup { classical, quantum, phase, ledger };

struct CheckInfo {
  std::string_view name;
  CheckGroup group;
  CheckClass cls;
  double default_tolerance;
  std::string_view measures;
};

inline const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> catalog = {
      {"wronskian_drift", CheckGroup::classical, CheckClass::gated, 1e-8, "max |G(t) - G(t0)| / |G(t0)|"},
      {"phase_consistency", CheckGroup::classical, CheckClass::gated, 1e-8,
       "max |wrap(s_rho - atan2(-u1, u2))| over samples"},
      {"rho_sq_omega", CheckGroup::classical, CheckClass::gated, 1e-8,
       "max |rho^2 omega - rho0^2 omega0| / |rho0^2 omega0|"},
      {"invariant_identity", CheckGroup::classical, CheckClass::gated, 1e-12,
       "max |I - W^2/2| / (W^2/2), I = rho^4 omega^2 / 2, W the local Wronskian"},
      {"invariant_drift", CheckGroup::classical, CheckClass::gated, 1e-8, "max |I(t) - I(t0)| / I(t0)"},
      {"ermakov_residual", CheckGroup::classical, CheckClass::gated, 1e-5,
       "max |rho'' + Omega^2 rho - G^2/rho^3| at interior samples"},
      {"ermakov_residual_unit_form", CheckGroup::classical, CheckClass::documented, 0.0,
       "max |rho'' + Omega^2 rho - 1/rho^3| (the G = 1 form)"},
      {"ermakov_convergence", CheckGroup::classical, CheckClass::gated, 0.1,
       "4 - observed finite-difference order of the Ermakov residual under grid halving"},
      {"adiabatic_deviation", CheckGroup::classical, CheckClass::diagnostic, 1e-2,
       "max |rho sqrt(Omega) - rho0 sqrt(Omega0)|"},

      {"fock_commutator", CheckGroup::quantum, CheckClass::gated, 1e-12, "[q, p] - i on the (N-1) block"},
      {"hamiltonian_spectrum", CheckGroup::quantum, CheckClass::gated, 1e-8,
       "lowest N/2 eigenvalues of H(omega0) against omega0 (n + 1/2)"},
      {"g_commutation_t0", CheckGroup::quantum, CheckClass::gated, 1e-12, "[G1, G2] + iG at t0, (N-1) block"},
      {"g_commutation", CheckGroup::quantum, CheckClass::gated, 1e-8,
       "[G1, G2] + iG over the quantum sample times, (N-1) block"},
      {"ermakov_equivalence", CheckGroup::quantum, CheckClass::gated, 1e-10,
       "(G1^2 + G2^2)/2 against the rho form, full matrix, over sample times"},
      {"invariant_time_independence", CheckGroup::quantum, CheckClass::gated, 1e-7,
       "Heisenberg I_H(t) - I_H(t0), (N-1) block, over sample times"},
      {"factorization", CheckGroup::quantum, CheckClass::gated, 1e-8,
       "I - a^dag a - G/2 and I - A^dag A - G/2, (N-1) block, over sample times"},
      {"conjugation", CheckGroup::quantum, CheckClass::gated, 1e-6,
       "e^{isI} A e^{-isI} - a(t) at one time, Schrodinger picture, N/4 block"},
      {"heisenberg_consistency", CheckGroup::quantum, CheckClass::gated, 1e-6,
       "e^{isI} A e^{-isI} - a(t) in the Heisenberg picture, N/4 block, >= 5 sample times"},
      {"squeeze_unitarity", CheckGroup::quantum, CheckClass::gated, 1e-8,
       "T^dag T - 1 on the N/2 block over sample times"},
      {"invariant_hamiltonian_relation", CheckGroup::quantum, CheckClass::gated, 1e-4,
       "H - i (dT^dag/dt) T - omega I, N/4 block, central difference"},
      {"invariant_hamiltonian_convergence", CheckGroup::quantum, CheckClass::gated, 0.5,
       "|ratio - 4| for the relation defect when dt is halved"},
      {"ladder_rate", CheckGroup::quantum, CheckClass::documented, 0.0,
       "d a_H/dt against +-i omega [I, a_H], N/4 block"},

      {"turski_structure", CheckGroup::phase, CheckClass::gated, 1e-12,
       "hermiticity defect and max |diagonal| of the phase matrix"},
      {"turski_quadrature", CheckGroup::phase, CheckClass::gated, 1e-8,
       "closed form against 2-D quadrature for m, n < dim (default 9)"},
      {"coherent_state", CheckGroup::phase, CheckClass::gated, 1e-9,
       "norm, displacement route and Poisson mean for every probe"},
      {"phase_commutator", CheckGroup::phase, CheckClass::documented, 0.0,
       "<alpha| [Phi, I] |alpha> + i for every probe; block of [Phi, I] + i"},
      {"phase_eom", CheckGroup::phase, CheckClass::documented, 0.0,
       "relative deviation of d<Phi(t)>/dt from -omega away from the branch cut"},
      {"coordinate_identity", CheckGroup::phase, CheckClass::gated, 1e-8,
       "q - (a + a^dag)/sqrt(2 G omega), (N-1) block, over sample times"},
      {"polar_decomposition", CheckGroup::phase, CheckClass::documented, 0.0,
       "a - sqrt(I) e^{-i Phi} on the N/4 block and on a fixed block"},
      {"number_invariant_identity", CheckGroup::phase, CheckClass::gated, 1e-8,
       "I - (omega n + 1/2), (N-1) block, over sample times (G = 1)"},
      {"number_frequency_product", CheckGroup::phase, CheckClass::gated, 1e-7,
       "relative spread of <n_H(t)> omega(t) for one coherent probe"},
      {"energy_relation", CheckGroup::phase, CheckClass::gated, 1e-9,
       "|<n> omega - (<I> - 1/2)| for every probe and sample time"},

      {"manley_rowe", CheckGroup::ledger, CheckClass::gated, 1e-12,
       "matching residual, per-mode energy and sum c_k W_k(t_i) - W_out(t_f) (relative)"},
  };
  return catalog;
}

inline const CheckInfo* find_check(std::string_view name) {
  for (const auto& c : check_catalog()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct InitialSpec {
  bool explicit_pair = false;
  InitialPair pair;  // only meaningful when explicit_pair
};

struct CheckSpec {
  std::string name;
  bool gated = true;
  double tolerance = 0.0;
  json params = json::object();
};

struct QuantumSpec {
  std::size_t dim = 64;
  std::vector<double> sample_times;  // empty: five evenly spaced grid points
  std::vector<std::complex<double>> probes{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
};

struct ProcessConfig {
  bool exact = true;
  mr::ProcessSpec<mr::Rational> rational;
  mr::ProcessSpec<double> floating;

  const std::string& name() const { return exact ? rational.name : floating.name; }
};

struct Scenario {
  std::string name;
  FrequencyProfile profile;
  InitialSpec initial;
  IntegratorSettings integrator;
  double grid_step = 0.05;
  QuantumSpec quantum;
  std::vector<CheckSpec> checks;
  std::vector<ProcessConfig> processes;

  bool has_check(std::string_view n) const {
    return std::any_of(checks.begin(), checks.end(), [&](const CheckSpec& c) { return c.name == n; });
  }
  bool needs_quantum() const {
    return std::any_of(checks.begin(), checks.end(), [](const CheckSpec& c) {
      const auto* info = find_check(c.name);
      return info->group == CheckGroup::quantum || info->group == CheckGroup::phase;
    });
  }
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

// Object reader: typed access with field paths in every error, and a final
// pass that rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join_path(path_, key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(path(key), "required number is missing");
    }
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(path(key), "must be positive");
    return x;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(path(key), "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(path(key), "required string is missing");
    }
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::complex<double> parse_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(path, "expected a number or [re, im]");
}

// Exact value from an integer, "p/q" or a decimal string such as "2.5".
inline mr::Rational parse_rational(const json& v, const std::string& path) {
  if (v.is_number_integer()) return mr::Rational(v.get<std::int64_t>());
  if (v.is_number()) {
    throw ConfigError(path, "non-integer numbers are not exact; write them as a string such as \"5/2\" or \"2.5\"");
  }
  if (!v.is_string()) throw ConfigError(path, "expected an integer or a rational string");
  const std::string s = v.get<std::string>();
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      const boost::multiprecision::cpp_int num(s.substr(0, slash));
      const boost::multiprecision::cpp_int den(s.substr(slash + 1));
      if (den == 0) throw ConfigError(path, "zero denominator");
      return mr::Rational(num, den);
    }
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      if (digits.empty() || digits == "-" || digits == "+") throw std::runtime_error("no digits");
      const auto frac = s.size() - dot - 1;
      boost::multiprecision::cpp_int scale = 1;
      for (std::size_t i = 0; i < frac; ++i) scale *= 10;
      return mr::Rational(boost::multiprecision::cpp_int(digits), scale);
    }
    return mr::Rational(boost::multiprecision::cpp_int(s));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(path, "malformed rational '" + s + "'");
  }
}

inline double parse_real(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  return static_cast<double>(parse_rational(v, path));
}

template <class T>
T parse_scalar(const json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, double>) {
    return parse_real(v, path);
  } else {
    return parse_rational(v, path);
  }
}

template <class T>
mr::ProcessSpec<T> parse_process(Fields& f, const std::string& path, const std::string& name) {
  mr::ProcessSpec<T> spec;
  spec.name = name;
  if (!f.has("omega_out")) throw ConfigError(f.path("omega_out"), "required value is missing");
  spec.omega_out = parse_scalar<T>(f.raw("omega_out"), f.path("omega_out"));
  if (!(spec.omega_out > T(0))) throw ConfigError(f.path("omega_out"), "must be positive");
  spec.tolerance = f.has("tolerance") ? parse_scalar<T>(f.raw("tolerance"), f.path("tolerance")) : T(0);
  if (spec.tolerance < T(0)) throw ConfigError(f.path("tolerance"), "must be nonnegative");
  if (!f.has("inputs")) throw ConfigError(f.path("inputs"), "required list is missing");
  const auto& inputs = f.raw("inputs");
  if (!inputs.is_array() || inputs.empty()) throw ConfigError(f.path("inputs"), "expected a non-empty list");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto ipath = index_path(join_path(path, "inputs"), i);
    Fields m(inputs[i], ipath);
    mr::ProcessInput<T> in;
    in.mode.id = m.text("id", "mode" + std::to_string(i + 1));
    if (!m.has("coefficient")) throw ConfigError(m.path("coefficient"), "required integer is missing");
    const auto& c = m.raw("coefficient");
    if (!c.is_number_integer() || c.get<std::int64_t>() <= 0) {
      throw ConfigError(m.path("coefficient"), "expected a positive integer");
    }
    in.coefficient = c.get<std::int64_t>();
    if (!m.has("omega")) throw ConfigError(m.path("omega"), "required value is missing");
    in.mode.omega_i = parse_scalar<T>(m.raw("omega"), m.path("omega"));
    if (!(in.mode.omega_i > T(0))) throw ConfigError(m.path("omega"), "must be positive");
    if (!m.has("n")) throw ConfigError(m.path("n"), "required value is missing");
    in.mode.n_i = parse_scalar<T>(m.raw("n"), m.path("n"));
    if (in.mode.n_i < T(0)) throw ConfigError(m.path("n"), "must be nonnegative");
    in.mode.omega_f = m.has("omega_final") ? parse_scalar<T>(m.raw("omega_final"), m.path("omega_final")) : spec.omega_out;
    if (!(in.mode.omega_f > T(0))) throw ConfigError(m.path("omega_final"), "must be positive");
    m.finish();
    spec.inputs.push_back(std::move(in));
  }
  return spec;
}

inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points one past the offending character.
    const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("", "malformed scenario text at line " + std::to_string(line) + ", column " +
                              std::to_string(col) + ": " + e.what());
  }
}

/// Validates a scenario document and fills defaults. Every error carries the
/// dotted path of the offending field.
inline Scenario scenario_from_json(const json& doc) {
  detail::Fields root(doc, "");
  Scenario sc;
  const auto version = root.count("schema_version", kScenarioSchemaVersion);
  if (version != static_cast<std::size_t>(kScenarioSchemaVersion)) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  }
  sc.name = root.text("name");
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name", "must be a non-empty file-name-safe string");
  }

  {
    if (!root.has("profile")) throw ConfigError("profile", "required object is missing");
    detail::Fields p(root.raw("profile"), "profile");
    const auto kind_text = p.text("kind");
    try {
      sc.profile.kind = profile_kind_from_string(kind_text);
    } catch (const DomainError& e) {
      throw ConfigError("profile.kind", e.what());
    }
    if (sc.profile.kind == ProfileKind::constant) {
      sc.profile.omega_start = p.positive("omega");
      sc.profile.omega_end = sc.profile.omega_start;
    } else {
      sc.profile.omega_start = p.positive("omega_start");
      sc.profile.omega_end = p.positive("omega_end");
      sc.profile.center = p.number("center");
      sc.profile.width = p.positive("width");
    }
    sc.profile.t_min = p.number("t_min", 0.0);
    sc.profile.t_max = p.number("t_max");
    if (!(sc.profile.t_max > sc.profile.t_min)) throw ConfigError("profile.t_max", "must exceed t_min");
    p.finish();
  }

  if (root.has("initial")) {
    detail::Fields ini(root.raw("initial"), "initial");
    const auto kind = ini.text("kind", "default");
    if (kind == "default") {
      sc.initial.explicit_pair = false;
    } else if (kind == "explicit") {
      sc.initial.explicit_pair = true;
      sc.initial.pair = {{ini.number("u1"), ini.number("du1")}, {ini.number("u2"), ini.number("du2")}};
      if (sc.initial.pair.wronskian() == 0.0) throw ConfigError("initial", "pair has zero Wronskian");
    } else {
      throw ConfigError("initial.kind", "expected \"default\" or \"explicit\"");
    }
    ini.finish();
  }

  if (root.has("integrator")) {
    detail::Fields in(root.raw("integrator"), "integrator");
    sc.integrator.rel_tol = in.positive("rel_tol", sc.integrator.rel_tol);
    sc.integrator.abs_tol = in.positive("abs_tol", sc.integrator.abs_tol);
    sc.integrator.initial_step = in.positive("initial_step", sc.integrator.initial_step);
    if (in.has("max_step")) sc.integrator.max_step = in.positive("max_step");
    sc.integrator.step_limit = in.count("step_limit", sc.integrator.step_limit);
    in.finish();
  }

  if (root.has("grid")) {
    detail::Fields g(root.raw("grid"), "grid");
    sc.grid_step = g.positive("step");
    g.finish();
  }
  if (sc.grid_step > sc.profile.t_max - sc.profile.t_min) throw ConfigError("grid.step", "larger than the domain");

  if (root.has("quantum")) {
    detail::Fields q(root.raw("quantum"), "quantum");
    sc.quantum.dim = q.count("dim", sc.quantum.dim);
    if (sc.quantum.dim < 4) throw ConfigError("quantum.dim", "must be at least 4");
    if (q.has("sample_times")) {
      const auto& st = q.raw("sample_times");
      if (!st.is_array() || st.empty()) throw ConfigError("quantum.sample_times", "expected a non-empty list");
      for (std::size_t i = 0; i < st.size(); ++i) {
        const auto path = detail::index_path("quantum.sample_times", i);
        if (!st[i].is_number()) throw ConfigError(path, "expected a number");
        const double t = st[i].get<double>();
        if (!sc.profile.contains(t)) throw ConfigError(path, "outside the profile domain");
        sc.quantum.sample_times.push_back(t);
      }
      if (!std::is_sorted(sc.quantum.sample_times.begin(), sc.quantum.sample_times.end())) {
        throw ConfigError("quantum.sample_times", "must be increasing");
      }
    }
    if (q.has("probes")) {
      const auto& pr = q.raw("probes");
      if (!pr.is_array() || pr.empty()) throw ConfigError("quantum.probes", "expected a non-empty list");
      sc.quantum.probes.clear();
      for (std::size_t i = 0; i < pr.size(); ++i) {
        const auto path = detail::index_path("quantum.probes", i);
        const auto alpha = detail::parse_complex(pr[i], path);
        if (std::norm(alpha) > static_cast<double>(sc.quantum.dim) / 4.0) {
          throw ConfigError(path, "|alpha|^2 exceeds dim/4");
        }
        sc.quantum.probes.push_back(alpha);
      }
    }
    q.finish();
  }

  if (root.has("processes")) {
    const auto& procs = root.raw("processes");
    if (!procs.is_array()) throw ConfigError("processes", "expected a list");
    for (std::size_t i = 0; i < procs.size(); ++i) {
      const auto path = detail::index_path("processes", i);
      detail::Fields pf(procs[i], path);
      ProcessConfig pc;
      const auto name = pf.text("name", "process" + std::to_string(i + 1));
      const auto arithmetic = pf.text("arithmetic", "exact");
      if (arithmetic == "exact") {
        pc.exact = true;
        pc.rational = detail::parse_process<mr::Rational>(pf, path, name);
      } else if (arithmetic == "float") {
        pc.exact = false;
        pc.floating = detail::parse_process<double>(pf, path, name);
      } else {
        throw ConfigError(pf.path("arithmetic"), "expected \"exact\" or \"float\"");
      }
      pf.finish();
      sc.processes.push_back(std::move(pc));
    }
  }

  if (root.has("checks")) {
    const auto& checks = root.raw("checks");
    if (!checks.is_object()) throw ConfigError("checks", "expected an object keyed by check name");
    for (const auto& [key, value] : checks.items()) {
      const auto path = detail::join_path("checks", key);
      const auto* info = find_check(key);
      if (!info) throw ConfigError(path, "unknown check");
      CheckSpec spec;
      spec.name = key;
      spec.gated = info->cls == CheckClass::gated;
      spec.tolerance = info->default_tolerance;
      detail::Fields cf(value, path);
      if (cf.has("gated")) {
        const bool gated = cf.flag("gated", spec.gated);
        if (gated != spec.gated && info->cls != CheckClass::diagnostic) {
          throw ConfigError(cf.path("gated"), gated ? "this check is documented only and cannot be gated"
                                                    : "this check is always gated");
        }
        spec.gated = gated;
      }
      if (cf.has("tolerance")) {
        if (!spec.gated) throw ConfigError(cf.path("tolerance"), "documented checks take no tolerance");
        spec.tolerance = cf.positive("tolerance");
      }
      if (cf.has("params")) {
        spec.params = cf.raw("params");
        if (!spec.params.is_object()) throw ConfigError(cf.path("params"), "expected an object");
      }
      cf.finish();
      sc.checks.push_back(std::move(spec));
    }
  } else {
    for (const auto& info : check_catalog()) {
      if (info.group != CheckGroup::classical) continue;
      if (info.name == "ermakov_convergence") continue;  // opt-in: three extra tight integrations
      sc.checks.push_back({std::string(info.name), info.cls == CheckClass::gated, info.default_tolerance, json::object()});
    }
    if (!sc.processes.empty()) sc.checks.push_back({"manley_rowe", true, 1e-12, json::object()});
  }
  root.finish();

  if (sc.has_check("manley_rowe") && sc.processes.empty()) {
    throw ConfigError("checks.manley_rowe", "needs at least one entry under processes");
  }
  return sc;
}

inline Scenario parse_scenario(std::string_view text) { return scenario_from_json(parse_json_text(text)); }

// ---------------------------------------------------------------------------
// Echo (the normalized scenario, written into every report)
// ---------------------------------------------------------------------------

inline json rational_json(const mr::Rational& r) {
  return {{"num", boost::multiprecision::numerator(r).str()}, {"den", boost::multiprecision::denominator(r).str()}};
}

template <class T>
json scalar_json(const T& v) {
  if constexpr (std::is_same_v<T, double>) {
    return v;
  } else {
    return rational_json(v);
  }
}

template <class T>
json process_json(const mr::ProcessSpec<T>& spec, bool exact) {
  json inputs = json::array();
  for (const auto& in : spec.inputs) {
    inputs.push_back({{"id", in.mode.id},
                      {"coefficient", in.coefficient},
                      {"omega", scalar_json(in.mode.omega_i)},
                      {"omega_final", scalar_json(in.mode.omega_f)},
                      {"n", scalar_json(in.mode.n_i)}});
  }
  return {{"name", spec.name},
          {"arithmetic", exact ? "exact" : "float"},
          {"omega_out", scalar_json(spec.omega_out)},
          {"tolerance", scalar_json(spec.tolerance)},
          {"inputs", inputs}};
}

inline json scenario_to_json(const Scenario& sc) {
  json profile{{"kind", std::string(to_string(sc.profile.kind))}, {"t_min", sc.profile.t_min}, {"t_max", sc.profile.t_max}};
  if (sc.profile.kind == ProfileKind::constant) {
    profile["omega"] = sc.profile.omega_start;
  } else {
    profile["omega_start"] = sc.profile.omega_start;
    profile["omega_end"] = sc.profile.omega_end;
    profile["center"] = sc.profile.center;
    profile["width"] = sc.profile.width;
  }
  json initial{{"kind", sc.initial.explicit_pair ? "explicit" : "default"}};
  if (sc.initial.explicit_pair) {
    initial["u1"] = sc.initial.pair.first.u;
    initial["du1"] = sc.initial.pair.first.du;
    initial["u2"] = sc.initial.pair.second.u;
    initial["du2"] = sc.initial.pair.second.du;
  }
  json integrator{{"rel_tol", sc.integrator.rel_tol},
                  {"abs_tol", sc.integrator.abs_tol},
                  {"initial_step", sc.integrator.initial_step},
                  {"step_limit", sc.integrator.step_limit}};
  if (std::isfinite(sc.integrator.max_step)) integrator["max_step"] = sc.integrator.max_step;
  json probes = json::array();
  for (auto a : sc.quantum.probes) probes.push_back(json::array({a.real(), a.imag()}));
  json quantum{{"dim", sc.quantum.dim}, {"probes", probes}};
  if (!sc.quantum.sample_times.empty()) quantum["sample_times"] = sc.quantum.sample_times;
  json checks = json::object();
  for (const auto& c : sc.checks) {
    json entry{{"gated", c.gated}};
    if (c.gated) entry["tolerance"] = c.tolerance;
    if (!c.params.empty()) entry["params"] = c.params;
    checks[c.name] = entry;
  }
  json processes = json::array();
  for (const auto& p : sc.processes) {
    processes.push_back(p.exact ? process_json(p.rational, true) : process_json(p.floating, false));
  }
  return {{"schema_version", kScenarioSchemaVersion},
          {"name", sc.name},
          {"profile", profile},
          {"initial", initial},
          {"integrator", integrator},
          {"grid", {{"step", sc.grid_step}}},
          {"quantum", quantum},
          {"checks", checks},
          {"processes", processes}};
}

}  // namespace tdho::harness
