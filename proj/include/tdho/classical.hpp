#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "tdho/errors.hpp"
#include "tdho/profile.hpp"

namespace tdho {

// Value and time derivative of one real TDHO solution.
struct PhasePoint {
  double u = 0.0;
  double du = 0.0;
};

/// Two solutions of  u'' + Omega^2(t) u = 0  given at t0.
struct InitialPair {
  PhasePoint first;
  PhasePoint second;

  /// u1 = 0, u1' = -sqrt(w0), u2 = 1/sqrt(w0), u2' = 0: Wronskian 1, rho0 = 1/sqrt(w0).
  static InitialPair unit_wronskian(double omega0) {
    const double r = std::sqrt(omega0);
    return {{0.0, -r}, {1.0 / r, 0.0}};
  }

  double wronskian() const { return first.u * second.du - second.u * first.du; }
};

struct IntegratorSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  // Upper bound on |dt|; long horizons need it to keep the global phase error down.
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t step_limit = 50'000'000;  // accepted + rejected
  // Steps smaller than this fraction of max(|t|, 1) count as underflow.
  double min_step_fraction = 1e-14;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
};

// `phase` is the running quadrature of G/rho^2, seeded with atan2(-u1, u2).
struct TrajectoryPoint {
  double t = 0.0;
  double u1 = 0.0;
  double du1 = 0.0;
  double u2 = 0.0;
  double du2 = 0.0;
  double phase = 0.0;
};

struct Trajectory {
  FrequencyProfile profile;
  std::vector<TrajectoryPoint> points;
  double G = 0.0;  // Wronskian at t0
  IntegratorStats stats;
};

inline double wronskian(const TrajectoryPoint& p) { return p.u1 * p.du2 - p.u2 * p.du1; }

namespace detail {

using OdeState = std::array<double, 5>;

struct TdhoSystem {
  const FrequencyProfile* profile;
  double G;

  void operator()(const OdeState& x, OdeState& dxdt, double t) const {
    const double w2 = eval_profile(*profile, t).omega_sq;
    dxdt[0] = x[1];
    dxdt[1] = -w2 * x[0];
    dxdt[2] = x[3];
    dxdt[3] = -w2 * x[2];
    dxdt[4] = G / (x[0] * x[0] + x[2] * x[2]);
  }
};

// Adaptive RKF7(8) stepping from t to t_end (either direction), landing exactly on t_end.
// x[4] is kept within (-pi, pi]; whole turns are accumulated in `turns` so the
// error control on the phase quadrature does not loosen as the phase grows.
inline void advance(const TdhoSystem& system, OdeState& x, double& turns, double& t, double t_end, double& dt,
                    const IntegratorSettings& settings, IntegratorStats& stats) {
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(settings.abs_tol, settings.rel_tol, ode::runge_kutta_fehlberg78<OdeState>());
  const double direction = t_end >= t ? 1.0 : -1.0;
  dt = direction * std::abs(dt);
  while (t != t_end) {
    if (std::abs(dt) > settings.max_step) dt = direction * settings.max_step;
    const double nominal = dt;
    bool last = false;
    if (std::abs(t_end - t) <= std::abs(dt)) {
      dt = t_end - t;
      last = true;
    }
    const double tried = dt;
    const double t_before = t;
    const auto result = stepper.try_step(system, x, t, dt);
    if (result == ode::success) {
      ++stats.accepted;
      stats.min_step = std::min(stats.min_step, std::abs(tried));
      stats.max_step = std::max(stats.max_step, std::abs(tried));
      if (last) {
        t = t_end;
        dt = std::abs(dt) > std::abs(nominal) ? dt : nominal;
      }
      const double k = std::round(x[4] / (2.0 * std::numbers::pi));
      if (k != 0.0) {
        x[4] -= k * 2.0 * std::numbers::pi;
        turns += k;
      }
    } else {
      ++stats.rejected;
    }
    const bool underflow = result != ode::success && std::abs(dt) < settings.min_step_fraction * std::max(std::abs(t), 1.0);
    if (underflow || stats.accepted + stats.rejected > settings.step_limit || !std::isfinite(x[0] + x[2])) {
      std::ostringstream msg;
      msg << "integration failed near t=" << t_before << ": step " << dt << " after " << stats.accepted
          << " accepted / " << stats.rejected << " rejected steps (rel_tol=" << settings.rel_tol
          << ", abs_tol=" << settings.abs_tol << ")";
      throw IntegrationError(msg.str());
    }
  }
}

inline void require_independent(double u1, double du1, double u2, double du2) {
  const double w = u1 * du2 - u2 * du1;
  const double scale = std::abs(u1 * du2) + std::abs(u2 * du1);
  if (w == 0.0 || std::abs(w) <= 1e-13 * scale) {
    throw DegeneratePairError("solutions are linearly dependent (zero Wronskian)");
  }
}

}  // namespace detail

/// Integrates both solutions of the pair on the strictly increasing `times`
/// (the first entry is t0). The returned trajectory carries G = W(t0).
inline Trajectory integrate_tdho(const FrequencyProfile& profile, const InitialPair& init, std::span<const double> times,
                                 const IntegratorSettings& settings = {}) {
  if (times.empty()) throw InsufficientGridError("no output times requested");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!profile.contains(times[i])) throw DomainError("output time outside profile domain");
    if (i > 0 && !(times[i] > times[i - 1])) throw DomainError("output times must be strictly increasing");
  }
  detail::require_independent(init.first.u, init.first.du, init.second.u, init.second.du);

  Trajectory traj;
  traj.profile = profile;
  traj.G = init.wronskian();
  traj.stats.rel_tol = settings.rel_tol;
  traj.stats.abs_tol = settings.abs_tol;
  traj.points.reserve(times.size());

  const detail::TdhoSystem system{&traj.profile, traj.G};
  detail::OdeState x{init.first.u, init.first.du, init.second.u, init.second.du,
                     std::atan2(-init.first.u, init.second.u)};
  double turns = 0.0;
  double t = times.front();
  double dt = settings.initial_step;
  for (double target : times) {
    detail::advance(system, x, turns, t, target, dt, settings, traj.stats);
    traj.points.push_back({target, x[0], x[1], x[2], x[3], x[4] + turns * 2.0 * std::numbers::pi});
  }
  return traj;
}

/// Propagates a single point to `t_end` (forward or backward). The phase
/// quadrature uses the point's own Wronskian.
inline TrajectoryPoint propagate(const FrequencyProfile& profile, const TrajectoryPoint& from, double t_end,
                                 const IntegratorSettings& settings = {}) {
  if (!profile.contains(t_end)) throw DomainError("propagation target outside profile domain");
  detail::require_independent(from.u1, from.du1, from.u2, from.du2);
  const detail::TdhoSystem system{&profile, wronskian(from)};
  const double base_turns = std::round(from.phase / (2.0 * std::numbers::pi));
  detail::OdeState x{from.u1, from.du1, from.u2, from.du2, from.phase - base_turns * 2.0 * std::numbers::pi};
  double turns = base_turns;
  double t = from.t;
  double dt = std::min(settings.initial_step, std::max(std::abs(t_end - t), 1e-300));
  IntegratorStats stats;
  detail::advance(system, x, turns, t, t_end, dt, settings, stats);
  return {t_end, x[0], x[1], x[2], x[3], x[4] + turns * 2.0 * std::numbers::pi};
}

inline std::vector<double> uniform_grid(double t_min, double t_max, double step) {
  if (!(step > 0.0) || !(t_max > t_min)) throw DomainError("uniform grid needs step > 0 and t_max > t_min");
  const auto intervals = static_cast<std::size_t>(std::llround((t_max - t_min) / step));
  const std::size_t n = std::max<std::size_t>(intervals, 1) + 1;
  const double h = (t_max - t_min) / static_cast<double>(n - 1);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = t_min + h * static_cast<double>(i);
  grid.back() = t_max;
  return grid;
}

/// Index of the sample at time t; throws DomainError when t is not on the grid.
inline std::size_t sample_index(const Trajectory& traj, double t) {
  const auto& pts = traj.points;
  auto it = std::lower_bound(pts.begin(), pts.end(), t,
                             [](const TrajectoryPoint& p, double value) { return p.t < value; });
  const double span = pts.empty() ? 1.0 : std::max(1.0, std::abs(pts.back().t - pts.front().t));
  for (auto cand : {it, it == pts.begin() ? it : std::prev(it)}) {
    if (cand != pts.end() && std::abs(cand->t - t) <= 1e-12 * span) return static_cast<std::size_t>(cand - pts.begin());
  }
  throw DomainError("time " + std::to_string(t) + " is not a trajectory sample point");
}

inline double wronskian(const Trajectory& traj, double t) { return wronskian(traj.points[sample_index(traj, t)]); }

// ---------------------------------------------------------------------------
// Amplitude and phase representation  u1 = -rho sin s,  u2 = rho cos s
// ---------------------------------------------------------------------------

struct AmplitudePhaseRecord {
  double t;
  double rho;
  double drho;
  double phase;       // unwrapped s_rho
  double phase_rate;  // omega = ds/dt = W / rho^2
};

struct AmplitudePhaseSeries {
  std::vector<AmplitudePhaseRecord> records;
  double rho0 = 0.0;
  double omega0 = 0.0;
  double G = 0.0;
  // max over samples of |s_quadrature - atan2(-u1, u2)| modulo 2 pi
  double branch_mismatch = 0.0;
};

inline double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(angle, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

inline AmplitudePhaseRecord amplitude_phase(const TrajectoryPoint& p) {
  const double rho = std::hypot(p.u1, p.u2);
  return {p.t, rho, (p.u1 * p.du1 + p.u2 * p.du2) / rho, p.phase, wronskian(p) / (rho * rho)};
}

inline AmplitudePhaseSeries amplitude_phase(const Trajectory& traj) {
  if (traj.G == 0.0) throw DegeneratePairError("trajectory has zero Wronskian");
  AmplitudePhaseSeries series;
  series.G = traj.G;
  series.records.reserve(traj.points.size());
  for (const auto& p : traj.points) {
    const auto rec = amplitude_phase(p);
    series.records.push_back(rec);
    const double mismatch = std::abs(wrap_angle(p.phase - std::atan2(-p.u1, p.u2)));
    series.branch_mismatch = std::max(series.branch_mismatch, mismatch);
  }
  if (!series.records.empty()) {
    series.rho0 = series.records.front().rho;
    series.omega0 = series.records.front().phase_rate;
  }
  return series;
}

// ---------------------------------------------------------------------------
// Ermakov auxiliary equation  rho'' + Omega^2 rho = G^2 / rho^3
// ---------------------------------------------------------------------------

struct ErmakovResidual {
  // Same length as the series; the two samples at each end are NaN.
  std::vector<double> residual;
  double max_abs = 0.0;
  double step = 0.0;
};

/// rho'' comes from the five-point fourth-order central difference, so the
/// series must sit on a uniform grid.
inline ErmakovResidual ermakov_residual(const AmplitudePhaseSeries& series, const FrequencyProfile& profile, double G) {
  const auto& r = series.records;
  if (r.size() < 5) throw InsufficientGridError("Ermakov residual needs at least 5 samples");
  const double h = (r.back().t - r.front().t) / static_cast<double>(r.size() - 1);
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (std::abs((r[i].t - r[i - 1].t) - h) > 1e-8 * h) {
      throw InsufficientGridError("Ermakov residual needs a uniform sample grid");
    }
  }
  ErmakovResidual out;
  out.step = h;
  out.residual.assign(r.size(), std::numeric_limits<double>::quiet_NaN());
  const double g2 = G * G;
  for (std::size_t i = 2; i + 2 < r.size(); ++i) {
    const double rho_dd =
        (-r[i + 2].rho + 16.0 * r[i + 1].rho - 30.0 * r[i].rho + 16.0 * r[i - 1].rho - r[i - 2].rho) / (12.0 * h * h);
    const double rho = r[i].rho;
    const double res = rho_dd + eval_profile(profile, r[i].t).omega_sq * rho - g2 / (rho * rho * rho);
    out.residual[i] = res;
    out.max_abs = std::max(out.max_abs, std::abs(res));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classical invariants
// ---------------------------------------------------------------------------

struct ClassicalInvariantReport {
  std::vector<double> invariant;  // I(t) = rho^4 (ds/dt)^2 / 2
  double g_drift = 0.0;           // max |W(t) - G| / |G|
  double invariant_drift = 0.0;   // max |I(t) - I(t0)| / I(t0)
  double identity_defect = 0.0;   // max |I - W^2/2| / (W^2/2), W taken at the same sample
  double rho_sq_omega_defect = 0.0;  // max |rho^2 omega - rho0^2 omega0| / (rho0^2 omega0)
};

inline ClassicalInvariantReport classical_invariants(const Trajectory& traj) {
  ClassicalInvariantReport rep;
  const auto series = amplitude_phase(traj);
  rep.invariant.reserve(series.records.size());
  const double g0 = series.rho0 * series.rho0 * series.omega0;
  for (std::size_t i = 0; i < series.records.size(); ++i) {
    const auto& rec = series.records[i];
    const double rho2 = rec.rho * rec.rho;
    const double inv = 0.5 * rho2 * rho2 * rec.phase_rate * rec.phase_rate;
    rep.invariant.push_back(inv);
    const double w = wronskian(traj.points[i]);
    rep.g_drift = std::max(rep.g_drift, std::abs(w - traj.G) / std::abs(traj.G));
    rep.identity_defect = std::max(rep.identity_defect, std::abs(inv - 0.5 * w * w) / (0.5 * w * w));
    rep.rho_sq_omega_defect = std::max(rep.rho_sq_omega_defect, std::abs(rho2 * rec.phase_rate - g0) / std::abs(g0));
  }
  for (double inv : rep.invariant) {
    rep.invariant_drift = std::max(rep.invariant_drift, std::abs(inv - rep.invariant.front()) / rep.invariant.front());
  }
  return rep;
}

// Diagnostic only: large values mean the sweep is not adiabatic.
inline double adiabatic_check(const AmplitudePhaseSeries& series, const FrequencyProfile& profile) {
  if (series.records.empty()) return 0.0;
  const auto& first = series.records.front();
  const double reference = first.rho * std::sqrt(eval_profile(profile, first.t).omega);
  double worst = 0.0;
  for (const auto& rec : series.records) {
    worst = std::max(worst, std::abs(rec.rho * std::sqrt(eval_profile(profile, rec.t).omega) - reference));
  }
  return worst;
}

}  // namespace tdho
