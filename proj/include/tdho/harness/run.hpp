#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdho/classical.hpp"
#include "tdho/fock.hpp"
#include "tdho/harness/io.hpp"
#include "tdho/harness/scenario.hpp"
#include "tdho/manley_rowe.hpp"
#include "tdho/phase.hpp"
#include "tdho/quantum.hpp"

namespace tdho::harness {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"t",     "u1", "du1", "u2", "du2",
                                                "rho",   "drho", "s_rho", "omega", "G",
                                                "I",     "ermakov_residual", "Omega"};
  return cols;
}

enum class CheckStatus { pass, fail, documented };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::documented: return "documented";
  }
  return "?";
}

struct CheckRecord {
  std::string name;
  bool gated = true;
  CheckStatus status = CheckStatus::fail;
  double value = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  std::optional<LowBlockComparison> block;
  json details = json::object();
  std::string error;
};

struct RunOptions {
  bool write_csv = true;
  bool write_report = true;
  std::filesystem::path output_dir = kDefaultOutputDir;
};

struct RunResult {
  std::string name;
  bool passed = false;
  std::vector<CheckRecord> checks;
  json report;
  std::vector<std::filesystem::path> written;

  int exit_code() const { return passed ? 0 : 1; }
};

namespace detail {

inline json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

inline json block_json(const LowBlockComparison& b) {
  return {{"block", b.block},
          {"dim", b.dim},
          {"norm", b.norm == BlockNorm::max_entry ? "max_entry" : "spectral"},
          {"full_matrix", b.full_matrix()}};
}

// Data shared by all checks of one scenario; the quantum pieces are built
// only when a quantum or phase check is enabled.
struct RunContext {
  const Scenario* sc = nullptr;
  std::vector<double> grid;
  InitialPair pair;
  double omega0 = 1.0;
  Trajectory traj;
  AmplitudePhaseSeries series;
  ErmakovResidual residual;
  ClassicalInvariantReport invariants;
  std::vector<std::size_t> samples;
  std::optional<FockSpace> space;
  std::optional<PhaseOperator> phi;

  const TrajectoryPoint& first() const { return traj.points.front(); }
  const TrajectoryPoint& at(std::size_t i) const { return traj.points.at(i); }
  std::size_t mid() const { return (grid.size() - 1) / 2; }
};

inline std::size_t grid_index(const std::vector<double>& grid, double t, const std::string& path) {
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  const double k = std::round((t - grid.front()) / h);
  if (k < 0.0 || k > static_cast<double>(grid.size() - 1)) throw ConfigError(path, "outside the sample grid");
  const auto i = static_cast<std::size_t>(k);
  if (std::abs(grid[i] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "time " << t << " is not on the sample grid (spacing " << h << ")";
    throw ConfigError(path, msg.str());
  }
  return i;
}

inline const json* param(const CheckSpec& spec, const std::string& key) {
  return spec.params.contains(key) ? &spec.params.at(key) : nullptr;
}

inline double param_number(const CheckSpec& spec, const std::string& key, double fallback) {
  const auto* v = param(spec, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError("checks." + spec.name + ".params." + key, "expected a number");
  return v->get<double>();
}

inline std::size_t param_time_index(const RunContext& ctx, const CheckSpec& spec, std::size_t fallback) {
  const auto* v = param(spec, "time");
  if (!v) return fallback;
  const auto path = "checks." + spec.name + ".params.time";
  if (!v->is_number()) throw ConfigError(path, "expected a number");
  return grid_index(ctx.grid, v->get<double>(), path);
}

inline std::complex<double> param_alpha(const CheckSpec& spec, std::complex<double> fallback, std::size_t dim) {
  const auto* v = param(spec, "alpha");
  if (!v) return fallback;
  const auto path = "checks." + spec.name + ".params.alpha";
  const auto a = harness::detail::parse_complex(*v, path);
  if (std::norm(a) > static_cast<double>(dim) / 4.0) throw ConfigError(path, "|alpha|^2 exceeds dim/4");
  return a;
}

inline void require_unit_default(const Scenario& sc, const std::string& check) {
  if (sc.initial.explicit_pair) {
    throw ConfigError("checks." + check, "needs the default initial pair (G = 1, invariant diagonal at t0)");
  }
}

// Checks with allowed params, validated before anything runs.
inline void validate_params(const Scenario& sc, const CheckSpec& spec) {
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"ermakov_convergence", {"steps", "rel_tol", "abs_tol"}},
      {"conjugation", {"time"}},
      {"invariant_hamiltonian_relation", {"time", "dt"}},
      {"invariant_hamiltonian_convergence", {"time", "dt"}},
      {"ladder_rate", {"time", "dt"}},
      {"turski_structure", {"normalization"}},
      {"turski_quadrature", {"dim", "normalization"}},
      {"phase_commutator", {"normalization"}},
      {"phase_eom", {"alpha", "times"}},
      {"polar_decomposition", {"block"}},
      {"number_frequency_product", {"alpha"}},
  };
  const auto it = allowed.find(spec.name);
  for (const auto& [key, value] : spec.params.items()) {
    if (it == allowed.end() || !it->second.count(key)) {
      throw ConfigError("checks." + spec.name + ".params." + key, "unknown parameter");
    }
  }
  if (spec.name == "heisenberg_consistency" && !sc.quantum.sample_times.empty() && sc.quantum.sample_times.size() < 5) {
    throw ConfigError("quantum.sample_times", "heisenberg_consistency needs at least 5 sample times");
  }
  for (const char* g1 : {"phase_commutator", "phase_eom", "number_invariant_identity", "energy_relation",
                         "polar_decomposition", "number_frequency_product"}) {
    if (spec.name == g1) require_unit_default(sc, spec.name);
  }
  if (const auto* n = param(spec, "normalization")) {
    if (!n->is_string() || (n->get<std::string>() != "pi" && n->get<std::string>() != "none")) {
      throw ConfigError("checks." + spec.name + ".params.normalization", "expected \"pi\" or \"none\"");
    }
  }
  if (spec.name == "ermakov_convergence") {
    if (const auto* s = param(spec, "steps")) {
      if (!s->is_array() || s->size() < 2) {
        throw ConfigError("checks.ermakov_convergence.params.steps", "expected at least two grid steps");
      }
      for (const auto& x : *s) {
        if (!x.is_number() || !(x.get<double>() > 0.0)) {
          throw ConfigError("checks.ermakov_convergence.params.steps", "steps must be positive numbers");
        }
      }
    }
  }
}

inline PhaseNormalization param_normalization(const CheckSpec& spec) {
  const auto* n = param(spec, "normalization");
  return (n && n->get<std::string>() == "none") ? PhaseNormalization::none : PhaseNormalization::with_inv_pi;
}

// Everything that can be a configuration problem is resolved here, before
// any integration starts.
inline RunContext prepare(const Scenario& sc) {
  RunContext ctx;
  ctx.sc = &sc;
  try {
    sc.profile.validate();
  } catch (const DomainError& e) {
    throw ConfigError("profile", e.what());
  }
  ctx.grid = uniform_grid(sc.profile.t_min, sc.profile.t_max, sc.grid_step);
  if (ctx.grid.size() < 5) throw ConfigError("grid.step", "fewer than 5 samples on the domain");
  ctx.omega0 = eval_profile(sc.profile, sc.profile.t_min).omega;
  ctx.pair = sc.initial.explicit_pair ? sc.initial.pair : InitialPair::unit_wronskian(ctx.omega0);

  for (const auto& c : sc.checks) validate_params(sc, c);

  if (sc.quantum.sample_times.empty()) {
    for (std::size_t k = 0; k <= 4; ++k) ctx.samples.push_back((k * (ctx.grid.size() - 1) + 2) / 4);
  } else {
    for (std::size_t i = 0; i < sc.quantum.sample_times.size(); ++i) {
      ctx.samples.push_back(grid_index(ctx.grid, sc.quantum.sample_times[i], index_path("quantum.sample_times", i)));
    }
  }
  for (const auto& c : sc.checks) {
    if (c.name == "conjugation" || c.name == "invariant_hamiltonian_relation" ||
        c.name == "invariant_hamiltonian_convergence" || c.name == "ladder_rate") {
      param_time_index(ctx, c, 0);
    }
    if (c.name == "phase_eom" || c.name == "number_frequency_product") param_alpha(c, {}, sc.quantum.dim);
    if (c.name == "phase_eom") {
      if (const auto* ts = param(c, "times")) {
        if (!ts->is_array() || ts->empty()) throw ConfigError("checks.phase_eom.params.times", "expected a list");
        for (std::size_t i = 0; i < ts->size(); ++i) {
          const auto path = index_path("checks.phase_eom.params.times", i);
          if (!(*ts)[i].is_number()) throw ConfigError(path, "expected a number");
          const auto idx = grid_index(ctx.grid, (*ts)[i].get<double>(), path);
          if (idx == 0 || idx + 1 >= ctx.grid.size()) throw ConfigError(path, "must be an interior sample");
        }
      }
    }
  }
  if (sc.needs_quantum()) {
    try {
      ctx.space = build_fock(sc.quantum.dim, ctx.omega0, ctx.pair.wronskian());
    } catch (const Error& e) {
      throw ConfigError("quantum", e.what());
    }
  }
  return ctx;
}

inline void integrate(RunContext& ctx) {
  ctx.traj = integrate_tdho(ctx.sc->profile, ctx.pair, ctx.grid, ctx.sc->integrator);
  ctx.series = amplitude_phase(ctx.traj);
  ctx.residual = ermakov_residual(ctx.series, ctx.sc->profile, ctx.traj.G);
  ctx.invariants = classical_invariants(ctx.traj);
}

inline const PhaseOperator& phase_matrix(RunContext& ctx) {
  if (!ctx.phi) ctx.phi = turski_phase_matrix(ctx.space->dim);
  return *ctx.phi;
}

// ---------------------------------------------------------------------------
// Individual checks. Each fills value/block/details of the record.
// ---------------------------------------------------------------------------

inline void max_into(CheckRecord& rec, const LowBlockComparison& b) {
  if (!rec.block || b.value > rec.block->value) rec.block = b;
  rec.value = rec.block->value;
}

inline void run_check(RunContext& ctx, const CheckSpec& spec, CheckRecord& rec) {
  const auto& sc = *ctx.sc;
  const auto& name = spec.name;
  auto per_sample = [&](const std::function<LowBlockComparison(const TrajectoryPoint&)>& f) {
    json values = json::array();
    for (std::size_t idx : ctx.samples) {
      const auto b = f(ctx.at(idx));
      values.push_back({{"t", ctx.at(idx).t}, {"value", b.value}});
      max_into(rec, b);
    }
    rec.details["samples"] = values;
  };

  if (name == "wronskian_drift") {
    rec.value = ctx.invariants.g_drift;
    rec.details = {{"G0", ctx.traj.G}};
  } else if (name == "phase_consistency") {
    rec.value = ctx.series.branch_mismatch;
  } else if (name == "rho_sq_omega") {
    rec.value = ctx.invariants.rho_sq_omega_defect;
    rec.details = {{"rho0", ctx.series.rho0}, {"omega0", ctx.series.omega0}};
  } else if (name == "invariant_identity") {
    rec.value = ctx.invariants.identity_defect;
    rec.details = {{"I_t0", ctx.invariants.invariant.front()}, {"G_sq_half", 0.5 * ctx.traj.G * ctx.traj.G}};
  } else if (name == "invariant_drift") {
    rec.value = ctx.invariants.invariant_drift;
  } else if (name == "ermakov_residual") {
    rec.value = ctx.residual.max_abs;
    rec.details = {{"step", ctx.residual.step}, {"G", ctx.traj.G}};
  } else if (name == "ermakov_residual_unit_form") {
    rec.value = ermakov_residual(ctx.series, sc.profile, 1.0).max_abs;
    rec.details = {{"G", ctx.traj.G}};
  } else if (name == "ermakov_convergence") {
    std::vector<double> steps{0.2, 0.1, 0.05};
    if (const auto* s = param(spec, "steps")) steps = s->get<std::vector<double>>();
    std::sort(steps.begin(), steps.end(), std::greater<>());
    IntegratorSettings tight = sc.integrator;
    tight.rel_tol = param_number(spec, "rel_tol", 1e-13);
    tight.abs_tol = param_number(spec, "abs_tol", 1e-15);
    std::vector<double> maxima, orders;
    for (double h : steps) {
      const auto grid = uniform_grid(sc.profile.t_min, sc.profile.t_max, h);
      const auto traj = integrate_tdho(sc.profile, ctx.pair, grid, tight);
      maxima.push_back(ermakov_residual(amplitude_phase(traj), sc.profile, traj.G).max_abs);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
      orders.push_back(std::log(maxima[i] / maxima[i + 1]) / std::log(steps[i] / steps[i + 1]));
      worst = std::min(worst, orders.back());
    }
    rec.value = 4.0 - worst;
    rec.details = {{"steps", steps}, {"max_residual", maxima}, {"observed_order", orders},
                   {"rel_tol", tight.rel_tol}, {"abs_tol", tight.abs_tol}};
  } else if (name == "adiabatic_deviation") {
    rec.value = adiabatic_check(ctx.series, sc.profile);
    const double of = eval_profile(sc.profile, sc.profile.t_max).omega;
    rec.details = {{"rho_final", ctx.series.records.back().rho},
                   {"rho_final_adiabatic", ctx.series.rho0 * std::sqrt(ctx.omega0 / of)}};
  } else if (name == "fock_commutator") {
    const auto& sp = *ctx.space;
    const ComplexMatrix diff = commutator(sp.q, sp.p) - kI * sp.identity();
    max_into(rec, compare_block(diff, sp.polynomial_block()));
    const auto n = static_cast<Eigen::Index>(sp.dim - 1);
    rec.details = {{"corner", complex_json(diff(n, n))}};
  } else if (name == "hamiltonian_spectrum") {
    rec.value = hamiltonian_spectrum_defect(*ctx.space, ctx.space->dim / 2);
    rec.details = {{"eigenvalues_compared", ctx.space->dim / 2}};
  } else if (name == "g_commutation_t0") {
    max_into(rec, check_g_commutation(schrodinger_quadratures(*ctx.space), ctx.first(), ctx.traj.G));
  } else if (name == "g_commutation") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    per_sample([&](const TrajectoryPoint& pt) { return check_g_commutation(quad, pt, ctx.traj.G); });
  } else if (name == "ermakov_equivalence") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    per_sample([&](const TrajectoryPoint& pt) { return ermakov_operator(quad, pt).defect; });
  } else if (name == "invariant_time_independence") {
    max_into(rec, invariant_time_independence(*ctx.space, ctx.traj, ctx.samples));
    rec.details = {{"picture", "heisenberg"}, {"sample_count", ctx.samples.size()}};
  } else if (name == "factorization") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    double cross = 0.0;
    per_sample([&](const TrajectoryPoint& pt) {
      const auto f = check_factorization(quad, pt);
      cross = std::max(cross, f.cross.value);
      auto worst = f.rho_form;
      worst.value = std::max({f.rho_form.value, f.g_form.value, f.cross.value});
      return worst;
    });
    rec.details["cross"] = cross;
  } else if (name == "conjugation") {
    const auto idx = param_time_index(ctx, spec, ctx.mid());
    const auto& pt = ctx.at(idx);
    max_into(rec, phase_shift_conjugation(*ctx.space, pt, pt.phase));
    rec.details = {{"t", pt.t}, {"s_rho", pt.phase}, {"picture", "schrodinger"}};
  } else if (name == "heisenberg_consistency") {
    if (ctx.samples.size() < 5) throw ConfigError("quantum.sample_times", "needs at least 5 sample times");
    per_sample([&](const TrajectoryPoint& pt) {
      return phase_shift_conjugation(heisenberg_quadratures(*ctx.space, ctx.first(), pt), pt, pt.phase);
    });
  } else if (name == "squeeze_unitarity") {
    per_sample([&](const TrajectoryPoint& pt) {
      const auto ap = amplitude_phase(pt);
      const auto t = squeeze_transform(*ctx.space, ap.rho, ap.drho);
      const auto b = ctx.space->unitary_block();
      return LowBlockComparison{b, ctx.space->dim, BlockNorm::max_entry, unitarity_defect(t.m, b)};
    });
  } else if (name == "invariant_hamiltonian_relation" || name == "invariant_hamiltonian_convergence") {
    const auto idx = param_time_index(ctx, spec, ctx.mid());
    const double t = ctx.at(idx).t;
    const double dt = param_number(spec, "dt", default_relation_step(sc.profile, t));
    const auto d1 = check_invariant_hamiltonian_relation(*ctx.space, ctx.traj, t, dt, sc.integrator);
    if (name == "invariant_hamiltonian_relation") {
      max_into(rec, d1);
      rec.details = {{"t", t}, {"dt", dt}};
    } else {
      const auto d2 = check_invariant_hamiltonian_relation(*ctx.space, ctx.traj, t, 0.5 * dt, sc.integrator);
      const double ratio = d1.value / d2.value;
      rec.value = std::abs(ratio - 4.0);
      rec.block = d1;
      rec.block->value = rec.value;
      rec.details = {{"t", t}, {"dt", dt}, {"defect_dt", d1.value}, {"defect_half_dt", d2.value}, {"ratio", ratio}};
    }
  } else if (name == "ladder_rate") {
    const auto idx = param_time_index(ctx, spec, ctx.mid());
    const double t = ctx.at(idx).t;
    const auto lr = ladder_rate_probe(*ctx.space, ctx.traj, t, param_number(spec, "dt", 0.0));
    rec.value = lr.printed_sign;
    rec.details = {{"t", t}, {"rate_norm", lr.rate_norm}, {"plus_i_omega", lr.printed_sign},
                   {"minus_i_omega", lr.flipped_sign}, {"picture", "heisenberg"}};
  } else if (name == "turski_structure") {
    const auto phi = turski_phase_matrix(ctx.space->dim, param_normalization(spec));
    const double herm = hermiticity_defect(phi.m);
    const double diag = phi.m.diagonal().cwiseAbs().maxCoeff();
    rec.value = std::max(herm, diag);
    rec.details = {{"hermiticity_defect", herm}, {"max_diagonal", diag}, {"dim", ctx.space->dim}};
  } else if (name == "turski_quadrature") {
    const auto dim = static_cast<std::size_t>(param_number(spec, "dim", 9));
    const auto norm = param_normalization(spec);
    const auto quad = turski_phase_matrix_quadrature(dim, norm);
    const auto closed = turski_phase_matrix(std::max<std::size_t>(dim, 4), norm);
    const auto n = static_cast<Eigen::Index>(dim);
    rec.value = max_entry(quad.m - closed.m.topLeftCorner(n, n));
    rec.details = {{"dim", dim}, {"element_0_1_closed", complex_json(closed.m(0, 1))},
                   {"element_0_1_quadrature", complex_json(quad.m(0, 1))}};
  } else if (name == "coherent_state") {
    const auto& sp = *ctx.space;
    const ComplexMatrix number = sp.adag * sp.a;
    json probes = json::array();
    double worst = 0.0;
    for (auto alpha : sc.quantum.probes) {
      const auto cs = coherent_state(sp, alpha);
      const double norm_defect = std::abs(cs.coeffs.norm() - 1.0);
      const double route = (displaced_vacuum(sp, alpha) - cs.coeffs).cwiseAbs().maxCoeff();
      const double mean = std::abs(expectation(cs.coeffs, number).real() - std::norm(alpha));
      worst = std::max({worst, norm_defect, route, mean});
      probes.push_back({{"alpha", complex_json(alpha)}, {"norm_defect", norm_defect},
                        {"displacement_route", route}, {"mean_number_defect", mean}});
    }
    rec.value = worst;
    rec.details = {{"probes", probes}};
  } else if (name == "phase_commutator") {
    const auto phi = turski_phase_matrix(ctx.space->dim, param_normalization(spec));
    const auto inv0 = ermakov_operator(schrodinger_quadratures(*ctx.space), ctx.first()).from_g.m;
    const auto rep = check_phase_commutator(phi, inv0, sc.quantum.probes);
    json probes = json::array();
    double worst = 0.0;
    for (const auto& p : rep.probes) {
      probes.push_back({{"alpha", complex_json(p.alpha)}, {"expectation", complex_json(p.value)},
                        {"deviation", p.deviation}});
      worst = std::max(worst, p.deviation);
    }
    rec.value = worst;
    rec.block = rep.block;
    rec.block->value = rep.block.value;
    rec.details = {{"probes", probes}, {"diagonal_max", rep.diagonal_max}, {"block_value", rep.block.value}};
  } else if (name == "phase_eom") {
    const auto alpha = param_alpha(spec, {2.0, 0.0}, ctx.space->dim);
    std::vector<std::size_t> idx;
    if (const auto* ts = param(spec, "times")) {
      for (const auto& t : *ts) idx.push_back(grid_index(ctx.grid, t.get<double>(), "checks.phase_eom.params.times"));
    } else {
      for (auto i : ctx.samples) {
        if (i > 0 && i + 1 < ctx.grid.size()) idx.push_back(i);
      }
    }
    const auto rep = phase_eom_probe(*ctx.space, ctx.traj, phase_matrix(ctx), alpha, idx);
    json recs = json::array();
    double worst = 0.0;
    for (const auto& r : rep.records) {
      const double rel = std::abs(r.rate_deviation) / r.omega;
      if (!r.near_wrap) worst = std::max(worst, rel);
      recs.push_back({{"t", r.t}, {"omega", r.omega}, {"number", r.number}, {"phase", r.phase},
                      {"invariant", r.invariant}, {"phase_rate", r.phase_rate}, {"relative_deviation", rel},
                      {"near_wrap", r.near_wrap}});
    }
    rec.value = worst;
    rec.details = {{"alpha", complex_json(alpha)}, {"degenerate", rep.degenerate}, {"records", recs}};
  } else if (name == "coordinate_identity") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    per_sample([&](const TrajectoryPoint& pt) { return coordinate_identity(quad, pt); });
  } else if (name == "polar_decomposition") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    const auto fixed = std::min<std::size_t>(static_cast<std::size_t>(param_number(spec, "block", 16)), ctx.space->dim);
    const auto quarter = polar_deviation(quad, ctx.first(), phase_matrix(ctx), ctx.space->exponential_block());
    const auto fixed_block = polar_deviation(quad, ctx.first(), phase_matrix(ctx), fixed);
    max_into(rec, quarter);
    rec.details = {{"fixed_block", fixed}, {"fixed_block_value", fixed_block.value}, {"t", ctx.first().t}};
  } else if (name == "number_invariant_identity") {
    const auto quad = schrodinger_quadratures(*ctx.space);
    per_sample([&](const TrajectoryPoint& pt) { return invariant_number_phase_check(quad, pt, 1.0, {}).identity; });
  } else if (name == "number_frequency_product") {
    const auto alpha = param_alpha(spec, {1.0, 0.0}, ctx.space->dim);
    const auto psi = coherent_state(*ctx.space, alpha).coeffs;
    std::vector<double> products;
    json values = json::array();
    for (std::size_t idx : ctx.samples) {
      const auto& pt = ctx.at(idx);
      const auto quad = heisenberg_quadratures(*ctx.space, ctx.first(), pt);
      const double w = amplitude_phase(pt).phase_rate;
      const double n = expectation(psi, number_operator(quad, pt, 1.0).m).real();
      products.push_back(n * w);
      values.push_back({{"t", pt.t}, {"omega", w}, {"number", n}, {"product", n * w}});
    }
    const auto [lo, hi] = std::minmax_element(products.begin(), products.end());
    const double mean = std::accumulate(products.begin(), products.end(), 0.0) / static_cast<double>(products.size());
    rec.value = (*hi - *lo) / std::abs(mean);
    rec.details = {{"alpha", complex_json(alpha)}, {"samples", values}, {"picture", "heisenberg"}};
  } else if (name == "energy_relation") {
    double worst = 0.0;
    json values = json::array();
    for (std::size_t idx : ctx.samples) {
      const auto& pt = ctx.at(idx);
      const auto quad = heisenberg_quadratures(*ctx.space, ctx.first(), pt);
      const auto rep = invariant_number_phase_check(quad, pt, 1.0, sc.quantum.probes);
      for (const auto& e : rep.probes) {
        worst = std::max(worst, e.defect);
        values.push_back({{"t", pt.t}, {"alpha", complex_json(e.alpha)}, {"energy", e.energy},
                          {"invariant_minus_half", e.invariant - 0.5}, {"defect", e.defect}});
      }
    }
    rec.value = worst;
    rec.details = {{"probes", values}, {"picture", "heisenberg"}};
  } else if (name == "manley_rowe") {
    json processes = json::array();
    double worst = 0.0;
    for (const auto& pc : sc.processes) {
      json entry;
      double value = 0.0;
      auto fill = [&](const auto& spec_t) {
        using T = std::decay_t<decltype(spec_t.omega_out)>;
        const auto rep = mr::conservation_report(spec_t);
        auto rel = [](const T& a, const T& b) {
          const double da = static_cast<double>(a), db = static_cast<double>(b);
          return mr::same_value(a, b) ? 0.0 : std::abs(da - db) / std::max(std::abs(db), 1e-300);
        };
        value = std::max(value, std::abs(static_cast<double>(rep.residual)) / static_cast<double>(spec_t.omega_out));
        json modes = json::array();
        for (const auto& m : rep.modes) {
          value = std::max(value, rel(m.energy_f, m.energy_i));
          modes.push_back({{"id", m.mode.id}, {"coefficient", m.coefficient},
                           {"omega_i", scalar_json(m.mode.omega_i)}, {"omega_f", scalar_json(m.mode.omega_f)},
                           {"n_i", scalar_json(m.mode.n_i)}, {"n_f", scalar_json(*m.mode.n_f)},
                           {"energy_i", scalar_json(m.energy_i)}, {"energy_f", scalar_json(m.energy_f)},
                           {"W_i", scalar_json(m.w_i)}, {"W_f", scalar_json(m.w_f)}});
        }
        if (rep.relation_holds) value = std::max(value, rel(rep.lhs, rep.rhs));
        entry = {{"name", rep.name}, {"residual", scalar_json(rep.residual)}, {"modes", modes},
                 {"equal_energy", rep.equal_energy}, {"n_out", scalar_json(rep.n_out)},
                 {"lhs", scalar_json(rep.lhs)}, {"rhs", scalar_json(rep.rhs)},
                 {"relation_asserted", rep.relation_holds.has_value()},
                 {"relation_holds", rep.relation_holds ? json(*rep.relation_holds) : json(nullptr)},
                 {"unit_coefficient_lhs", scalar_json(rep.unit_coefficient_lhs)},
                 {"unit_coefficient_form_holds", rep.unit_coefficient_form_holds}, {"note", rep.note}};
      };
      try {
        if (pc.exact) {
          fill(pc.rational);
        } else {
          fill(pc.floating);
        }
      } catch (const MatchingError& e) {
        entry = {{"name", pc.name()}, {"error", e.what()}};
        value = std::numeric_limits<double>::infinity();
      }
      entry["arithmetic"] = pc.exact ? "exact" : "float";
      entry["value"] = value;
      worst = std::max(worst, value);
      processes.push_back(entry);
    }
    rec.value = worst;
    rec.details = {{"processes", processes}};
  } else {
    throw ConfigError("checks." + name, "unknown check");
  }
}

inline std::string render_csv(const RunContext& ctx) {
  std::string out;
  out.reserve(ctx.traj.points.size() * 13 * 24);
  for (std::size_t i = 0; i < csv_columns().size(); ++i) {
    out += (i ? "," : "");
    out += csv_columns()[i];
  }
  out += '\n';
  for (std::size_t i = 0; i < ctx.traj.points.size(); ++i) {
    const auto& p = ctx.traj.points[i];
    const auto& r = ctx.series.records[i];
    const double rho2 = r.rho * r.rho;
    const double values[] = {p.t,     p.u1,          p.du1,
                             p.u2,    p.du2,         r.rho,
                             r.drho,  r.phase,       r.phase_rate,
                             wronskian(p), 0.5 * rho2 * rho2 * r.phase_rate * r.phase_rate, ctx.residual.residual[i],
                             eval_profile(ctx.sc->profile, p.t).omega};
    for (std::size_t k = 0; k < std::size(values); ++k) {
      out += (k ? "," : "");
      out += format_g17(values[k]);
    }
    out += '\n';
  }
  return out;
}

inline json record_json(const CheckRecord& rec) {
  json j{{"name", rec.name},
         {"class", rec.gated ? "gated" : "documented"},
         {"status", std::string(to_string(rec.status))},
         {"value", rec.value}};
  if (rec.gated) j["tolerance"] = rec.tolerance;
  if (rec.block) j["block"] = block_json(*rec.block);
  if (!rec.details.empty()) j["details"] = rec.details;
  if (!rec.error.empty()) j["error"] = rec.error;
  return j;
}

}  // namespace detail

/// Runs every enabled check of the scenario. Configuration problems throw
/// ConfigError before integration starts; integration failures and check
/// exceptions become failed records.
inline RunResult run_scenario(const Scenario& sc, const RunOptions& options = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto ctx = detail::prepare(sc);

  RunResult result;
  result.name = sc.name;
  std::string fatal;
  try {
    detail::integrate(ctx);
  } catch (const Error& e) {
    fatal = e.what();
  }

  for (const auto& spec : sc.checks) {
    CheckRecord rec;
    rec.name = spec.name;
    rec.gated = spec.gated;
    rec.tolerance = spec.tolerance;
    const bool needs_trajectory = find_check(spec.name)->group != CheckGroup::ledger;
    if (!fatal.empty() && needs_trajectory) {
      rec.error = "not evaluated: " + fatal;
    } else {
      try {
        detail::run_check(ctx, spec, rec);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        rec.error = e.what();
        rec.value = std::numeric_limits<double>::quiet_NaN();
      }
    }
    if (!rec.gated) {
      rec.status = CheckStatus::documented;
    } else {
      rec.status = (rec.error.empty() && std::isfinite(rec.value) && rec.value <= rec.tolerance) ? CheckStatus::pass
                                                                                                  : CheckStatus::fail;
    }
    result.checks.push_back(std::move(rec));
  }
  result.passed = fatal.empty() && std::none_of(result.checks.begin(), result.checks.end(),
                                                [](const CheckRecord& r) { return r.status == CheckStatus::fail; });

  json artifacts = json::array();
  if (options.write_csv && fatal.empty()) {
    const auto path = options.output_dir / (sc.name + ".csv");
    atomic_write(path, detail::render_csv(ctx));
    result.written.push_back(path);
    artifacts.push_back({{"kind", "series_csv"}, {"path", path.string()}, {"schema_version", kCsvSchemaVersion},
                         {"columns", csv_columns()}, {"rows", ctx.traj.points.size()}});
  }

  json checks = json::array();
  for (const auto& rec : result.checks) checks.push_back(detail::record_json(rec));
  const auto& st = ctx.traj.stats;
  result.report = {{"schema", "tdho-run-report"},
                   {"schema_version", kReportSchemaVersion},
                   {"scenario_name", sc.name},
                   {"status", result.passed ? "pass" : "fail"},
                   {"exit_code", result.exit_code()},
                   {"scenario", scenario_to_json(sc)},
                   {"checks", checks},
                   {"artifacts", artifacts},
                   {"integrator",
                    {{"rel_tol", sc.integrator.rel_tol},
                     {"abs_tol", sc.integrator.abs_tol},
                     {"accepted_steps", st.accepted},
                     {"rejected_steps", st.rejected},
                     {"min_step", std::isfinite(st.min_step) ? json(st.min_step) : json(nullptr)},
                     {"max_step", st.max_step},
                     {"samples", ctx.traj.points.size()}}}};
  if (!fatal.empty()) result.report["error"] = fatal;
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.report["wall_time_seconds"] = elapsed;

  if (options.write_report) {
    const auto path = options.output_dir / (sc.name + ".report.json");
    result.report["artifacts"].push_back({{"kind", "report_json"}, {"path", path.string()}});
    atomic_write(path, result.report.dump(2) + "\n");
    result.written.push_back(path);
  }
  return result;
}

}  // namespace tdho::harness
