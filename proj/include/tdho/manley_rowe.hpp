#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tdho/errors.hpp"

namespace tdho::mr {

using Rational = boost::multiprecision::cpp_rational;

// Scalar policy: exact comparison for rationals, 1e-12 relative for floating point.
template <class T>
bool same_value(const T& a, const T& b) {
  if constexpr (std::is_floating_point_v<T>) {
    const T scale = std::max({T(1), std::abs(a), std::abs(b)});
    return std::abs(a - b) <= T(1e-12) * scale;
  } else {
    return a == b;
  }
}

template <class T>
std::string render(const T& v) {
  std::ostringstream out;
  if constexpr (std::is_floating_point_v<T>) {
    out.precision(17);
  }
  out << v;
  return out.str();
}

/// One optical mode: frequency and photon number at t_i, frequency at t_f.
template <class T>
struct Mode {
  std::string id;
  T omega_i{};
  T omega_f{};
  T n_i{};
  std::optional<T> n_f;

  T energy_i() const { return omega_i * n_i; }
};

/// omega_i n_i = omega_f n_f.
template <class T>
Mode<T> evolve_mode(Mode<T> mode) {
  if (!(mode.omega_f > T(0))) throw InvalidFrequencyError("mode " + mode.id + ": final frequency must be positive");
  if (!(mode.omega_i > T(0))) throw InvalidFrequencyError("mode " + mode.id + ": initial frequency must be positive");
  if (mode.n_i < T(0)) throw DomainError("mode " + mode.id + ": photon number must be nonnegative");
  mode.n_f = mode.omega_i * mode.n_i / mode.omega_f;
  return mode;
}

template <class T>
struct ProcessInput {
  Mode<T> mode;
  std::int64_t coefficient = 1;
};

/// sum_k c_k omega_k(t_i) = omega_out, single output, positive integer c_k.
template <class T>
struct ProcessSpec {
  std::string name;
  std::vector<ProcessInput<T>> inputs;
  T omega_out{};
  T tolerance{};  // zero means exact
};

template <class T>
void validate(const ProcessSpec<T>& spec) {
  if (spec.inputs.empty()) throw DomainError("process needs at least one input mode");
  if (!(spec.omega_out > T(0))) throw InvalidFrequencyError("output frequency must be positive");
  for (const auto& in : spec.inputs) {
    if (in.coefficient <= 0) {
      throw DomainError("mode " + in.mode.id + ": coefficients must be positive integers; restate the process with " +
                        "the high-frequency mode as the output");
    }
  }
}

/// sum_k c_k omega_k(t_i) - omega_out, without the tolerance test.
template <class T>
T matching_residual(const ProcessSpec<T>& spec) {
  validate(spec);
  T sum{0};
  for (const auto& in : spec.inputs) sum += T(in.coefficient) * in.mode.omega_i;
  return sum - spec.omega_out;
}

template <class T>
T check_matching(const ProcessSpec<T>& spec) {
  const T residual = matching_residual(spec);
  const T mag = residual < T(0) ? T(-residual) : residual;
  if (mag > spec.tolerance) {
    throw MatchingError("frequency matching residual " + render(residual) + " exceeds tolerance " +
                        render(spec.tolerance));
  }
  return residual;
}

enum class Epoch { initial, final };

/// W = omega^2 n at the requested epoch.
template <class T>
T power_density(const Mode<T>& mode, Epoch at) {
  if (at == Epoch::initial) return mode.omega_i * mode.omega_i * mode.n_i;
  if (!mode.n_f) throw DomainError("mode " + mode.id + " has not been evolved to t_f");
  return mode.omega_f * mode.omega_f * *mode.n_f;
}

template <class T>
struct ModeRecord {
  Mode<T> mode;
  std::int64_t coefficient = 1;
  T energy_i{};
  T energy_f{};
  bool energy_conserved = false;
  T w_i{};
  T w_f{};
};

template <class T>
struct ConservationReport {
  std::string name;
  std::vector<ModeRecord<T>> modes;  // canonical order
  T residual{};
  T omega_out{};
  bool equal_energy = false;          // all omega_k n_k(t_i) equal, i.e. common n_f
  T n_out{};                          // sum c_k n_f,k / sum c_k; the common n_f when equal_energy
  T lhs{};                            // sum c_k W_k(t_i)
  T rhs{};                            // omega_out^2 n_out
  std::optional<bool> relation_holds; // only asserted when equal_energy
  T unit_coefficient_lhs{};           // sum W_k(t_i)
  bool unit_coefficient_form_holds = false;
  std::string note;
};

namespace detail {

template <class T>
bool canonical_less(const ProcessInput<T>& a, const ProcessInput<T>& b) {
  return std::tie(a.mode.omega_i, a.coefficient, a.mode.n_i, a.mode.omega_f, a.mode.id) <
         std::tie(b.mode.omega_i, b.coefficient, b.mode.n_i, b.mode.omega_f, b.mode.id);
}

}  // namespace detail

/// Evolves every input mode to omega_out and evaluates
///   sum_k c_k W_k(t_i) = omega_out^2 n_f,
/// which follows from the matching condition only when every mode ends with
/// the same photon number (equal input energies). Inputs are sorted into a
/// canonical order so that permuting them leaves the report unchanged.
template <class T>
ConservationReport<T> conservation_report(const ProcessSpec<T>& spec) {
  ConservationReport<T> rep;
  rep.name = spec.name;
  rep.omega_out = spec.omega_out;
  rep.residual = check_matching(spec);

  auto inputs = spec.inputs;
  std::sort(inputs.begin(), inputs.end(), detail::canonical_less<T>);
  for (const auto& in : inputs) {
    if (!same_value(in.mode.omega_f, spec.omega_out)) {
      throw MatchingError("mode " + in.mode.id + " must end at the output frequency " + render(spec.omega_out));
    }
  }

  T coeff_sum{0};
  T weighted_nf{0};
  for (const auto& in : inputs) {
    ModeRecord<T> rec;
    rec.mode = evolve_mode(in.mode);
    rec.coefficient = in.coefficient;
    rec.energy_i = rec.mode.energy_i();
    rec.energy_f = rec.mode.omega_f * *rec.mode.n_f;
    rec.energy_conserved = same_value(rec.energy_i, rec.energy_f);
    rec.w_i = power_density(rec.mode, Epoch::initial);
    rec.w_f = power_density(rec.mode, Epoch::final);
    rep.lhs += T(in.coefficient) * rec.w_i;
    rep.unit_coefficient_lhs += rec.w_i;
    coeff_sum += T(in.coefficient);
    weighted_nf += T(in.coefficient) * *rec.mode.n_f;
    rep.modes.push_back(std::move(rec));
  }

  rep.equal_energy = std::all_of(rep.modes.begin(), rep.modes.end(),
                                 [&](const auto& m) { return same_value(m.energy_i, rep.modes.front().energy_i); });
  rep.n_out = weighted_nf / coeff_sum;
  rep.rhs = spec.omega_out * spec.omega_out * rep.n_out;
  if (rep.equal_energy) rep.relation_holds = same_value(rep.lhs, rep.rhs);
  rep.unit_coefficient_form_holds = same_value(rep.unit_coefficient_lhs, rep.rhs);

  std::ostringstream note;
  const bool all_unit = std::all_of(inputs.begin(), inputs.end(), [](const auto& in) { return in.coefficient == 1; });
  if (!rep.equal_energy) {
    note << "input energies differ, final photon numbers are not common; relation not asserted. ";
  }
  if (all_unit) {
    note << "all coefficients are 1: sum W_k(t_i) = W_out(t_f) is the same statement.";
  } else {
    note << "coefficient-free sum W_k(t_i) = W_out(t_f) omits c = (";
    for (std::size_t i = 0; i < inputs.size(); ++i) note << (i ? ", " : "") << inputs[i].coefficient;
    note << ") and " << (rep.unit_coefficient_form_holds ? "happens to hold" : "does not hold") << ".";
  }
  rep.note = note.str();
  return rep;
}

}  // namespace tdho::mr
