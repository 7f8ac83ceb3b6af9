#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "tdho/classical.hpp"
#include "tdho/fock.hpp"
#include "tdho/operator_matrix.hpp"

namespace tdho {

// Operators built at a trajectory point can be expressed with the fixed
// Schrodinger quadratures q, p or with their Heisenberg images
// q_H(t) = U^dag q U, p_H(t) = U^dag p U. For a quadratic Hamiltonian those
// images are linear in q and p with classical coefficients, so no state
// propagation is involved.
enum class Picture { schrodinger, heisenberg };

struct Quadratures {
  ComplexMatrix q;
  ComplexMatrix p;
  Picture picture = Picture::schrodinger;
};

inline Quadratures schrodinger_quadratures(const FockSpace& space) { return {space.q, space.p, Picture::schrodinger}; }

/// q_H = A q + B p and p_H = A' q + B' p, where A, B are the solutions with
/// A(t0) = 1, A'(t0) = 0, B(t0) = 0, B'(t0) = 1 written through the pair.
inline Quadratures heisenberg_quadratures(const FockSpace& space, const TrajectoryPoint& initial,
                                          const TrajectoryPoint& at) {
  const double w0 = wronskian(initial);
  if (w0 == 0.0) throw DegeneratePairError("initial pair has zero Wronskian");
  const double A = (initial.du2 * at.u1 - initial.du1 * at.u2) / w0;
  const double dA = (initial.du2 * at.du1 - initial.du1 * at.du2) / w0;
  const double B = (initial.u1 * at.u2 - initial.u2 * at.u1) / w0;
  const double dB = (initial.u1 * at.du2 - initial.u2 * at.du1) / w0;
  return {A * space.q + B * space.p, dA * space.q + dB * space.p, Picture::heisenberg};
}

inline Quadratures quadratures(const FockSpace& space, Picture picture, const TrajectoryPoint& initial,
                               const TrajectoryPoint& at) {
  return picture == Picture::schrodinger ? schrodinger_quadratures(space) : heisenberg_quadratures(space, initial, at);
}

// ---------------------------------------------------------------------------
// Linear invariants and the Ermakov-Lewis operator
// ---------------------------------------------------------------------------

struct LinearInvariants {
  OperatorMatrix g1;  // u1 p - u1' q
  OperatorMatrix g2;  // -u2 p + u2' q
};

inline LinearInvariants linear_invariant_ops(const Quadratures& quad, const TrajectoryPoint& pt) {
  return {{pt.u1 * quad.p - pt.du1 * quad.q, "G1"}, {-pt.u2 * quad.p + pt.du2 * quad.q, "G2"}};
}

/// max-entry norm of [G1, G2] + iG on the leading (dim - 1) block.
inline LowBlockComparison check_g_commutation(const Quadratures& quad, const TrajectoryPoint& pt, double G) {
  const auto ops = linear_invariant_ops(quad, pt);
  const auto n = quad.q.rows();
  ComplexMatrix diff = commutator(ops.g1.m, ops.g2.m) + kI * G * ComplexMatrix::Identity(n, n);
  return compare_block(diff, static_cast<std::size_t>(n - 1));
}

struct ErmakovOperators {
  OperatorMatrix from_g;    // (G1^2 + G2^2) / 2
  OperatorMatrix from_rho;  // ((G q / rho)^2 + (rho p - rho' q)^2) / 2
  LowBlockComparison defect;  // full matrix
};

// Both forms expand to the same polynomial in q and p once
// u1'^2 + u2'^2 = G^2/rho^2 + rho'^2 with G the Wronskian at this point, so
// the agreement is exact on the whole truncated matrix.
inline ErmakovOperators ermakov_operator(const Quadratures& quad, const TrajectoryPoint& pt) {
  const auto ops = linear_invariant_ops(quad, pt);
  const auto ap = amplitude_phase(pt);
  if (!(ap.rho > 0.0)) throw DomainError("amplitude rho must be positive");
  const double G = wronskian(pt);
  const ComplexMatrix x = (G / ap.rho) * quad.q;
  const ComplexMatrix y = ap.rho * quad.p - ap.drho * quad.q;
  ErmakovOperators out{{0.5 * (ops.g1.m * ops.g1.m + ops.g2.m * ops.g2.m), "I[G]"},
                       {0.5 * (x * x + y * y), "I[rho]"},
                       {}};
  out.defect = compare_block(out.from_g.m - out.from_rho.m, static_cast<std::size_t>(quad.q.rows()));
  return out;
}

struct InvariantLadder {
  OperatorMatrix A;      // (G1 - i G2) / sqrt 2
  OperatorMatrix A_dag;
  OperatorMatrix a;      // (G q / rho + i (rho p - rho' q)) / sqrt 2
  OperatorMatrix a_dag;
};

inline InvariantLadder invariant_ladder(const Quadratures& quad, const TrajectoryPoint& pt) {
  const auto ops = linear_invariant_ops(quad, pt);
  const auto ap = amplitude_phase(pt);
  if (!(ap.rho > 0.0)) throw DomainError("amplitude rho must be positive");
  const double G = wronskian(pt);
  const double s = std::numbers::sqrt2;
  const ComplexMatrix A = (ops.g1.m - kI * ops.g2.m) / s;
  const ComplexMatrix a = ((G / ap.rho) * quad.q + kI * (ap.rho * quad.p - ap.drho * quad.q)) / s;
  return {{A, "A"}, {A.adjoint(), "A^dag"}, {a, "a(t)"}, {a.adjoint(), "a^dag(t)"}};
}

struct FactorizationCheck {
  LowBlockComparison rho_form;  // I - a^dag(t) a(t) - G/2
  LowBlockComparison g_form;    // I - A^dag A - G/2
  LowBlockComparison cross;     // a^dag a - A^dag A
};

inline FactorizationCheck check_factorization(const Quadratures& quad, const TrajectoryPoint& pt) {
  const auto inv = ermakov_operator(quad, pt);
  const auto lad = invariant_ladder(quad, pt);
  const double G = wronskian(pt);
  const auto n = quad.q.rows();
  const ComplexMatrix half_g = 0.5 * G * ComplexMatrix::Identity(n, n);
  const ComplexMatrix na = lad.a_dag.m * lad.a.m;
  const ComplexMatrix nA = lad.A_dag.m * lad.A.m;
  const auto block = static_cast<std::size_t>(n - 1);
  return {compare_block(inv.from_g.m - na - half_g, block), compare_block(inv.from_g.m - nA - half_g, block),
          compare_block(na - nA, block)};
}

/// e^{i s I} A e^{-i s I} - a(t) on the leading dim/4 block. In the
/// Schrodinger picture `phase` is reduced modulo 2 pi first; for G = 1 the
/// invariant spectrum is n + 1/2, so a full turn is a global sign.
inline LowBlockComparison phase_shift_conjugation(const Quadratures& quad, const TrajectoryPoint& pt, double phase) {
  const auto inv = ermakov_operator(quad, pt);
  const auto lad = invariant_ladder(quad, pt);
  const double s = quad.picture == Picture::schrodinger ? wrap_angle(phase) : phase;
  const ComplexMatrix u = matrix_exponential(ComplexMatrix(kI * s * inv.from_g.m)).m;
  const ComplexMatrix diff = u * lad.A.m * u.adjoint() - lad.a.m;
  return compare_block(diff, static_cast<std::size_t>(quad.q.rows() / 4));
}

inline LowBlockComparison phase_shift_conjugation(const FockSpace& space, const TrajectoryPoint& pt, double phase) {
  return phase_shift_conjugation(schrodinger_quadratures(space), pt, phase);
}

/// T = exp(i ln(rho sqrt w0)/2 (qp + pq)) exp(-i rho'/(2 rho) q^2)
inline OperatorMatrix squeeze_transform(const FockSpace& space, double rho, double drho) {
  if (!(rho > 0.0)) throw DomainError("squeeze transform needs rho > 0");
  const double dilation = std::log(rho * std::sqrt(space.omega0));
  const ComplexMatrix qp = space.q * space.p + space.p * space.q;
  const ComplexMatrix q2 = space.q * space.q;
  const auto d = matrix_exponential(ComplexMatrix(kI * (0.5 * dilation) * qp));
  const auto c = matrix_exponential(ComplexMatrix(-kI * (drho / (2.0 * rho)) * q2));
  OperatorMatrix t{d.m * c.m, "T"};
  t.unitary = d.unitary && c.unitary;
  return t;
}

inline double default_relation_step(const FrequencyProfile& profile, double t) {
  return 1e-4 * 2.0 * std::numbers::pi / eval_profile(profile, t).omega;
}

/// Residual of  w(t) I = H(t) - i (dT^dag/dt) T  on the leading dim/4 block,
/// with dT^dag/dt from a central difference over t +- dt. The neighbouring
/// points are obtained by re-integrating from the sample at t.
inline LowBlockComparison check_invariant_hamiltonian_relation(const FockSpace& space, const Trajectory& traj, double t,
                                                               double dt = 0.0, const IntegratorSettings& settings = {}) {
  if (dt <= 0.0) dt = default_relation_step(traj.profile, t);
  const auto& pt = traj.points[sample_index(traj, t)];
  const auto plus = amplitude_phase(propagate(traj.profile, pt, t + dt, settings));
  const auto minus = amplitude_phase(propagate(traj.profile, pt, t - dt, settings));
  const auto here = amplitude_phase(pt);

  const ComplexMatrix t_plus_dag = squeeze_transform(space, plus.rho, plus.drho).m.adjoint();
  const ComplexMatrix t_minus_dag = squeeze_transform(space, minus.rho, minus.drho).m.adjoint();
  const ComplexMatrix dt_dag = (t_plus_dag - t_minus_dag) / (2.0 * dt);
  const ComplexMatrix t_here = squeeze_transform(space, here.rho, here.drho).m;

  const auto h = hamiltonian(space, eval_profile(traj.profile, t).omega);
  const auto inv = ermakov_operator(schrodinger_quadratures(space), pt);
  const ComplexMatrix diff = h.m - kI * dt_dag * t_here - here.phase_rate * inv.from_g.m;
  return compare_block(diff, space.exponential_block());
}

/// max over the given samples of |I_H(t) - I_H(t0)| on the (dim-1) block.
/// In the Heisenberg picture the invariant is a constant matrix.
inline LowBlockComparison invariant_time_independence(const FockSpace& space, const Trajectory& traj,
                                                      std::span<const std::size_t> samples) {
  const auto& first = traj.points.front();
  const ComplexMatrix ref = ermakov_operator(heisenberg_quadratures(space, first, first), first).from_g.m;
  LowBlockComparison worst{space.polynomial_block(), space.dim, BlockNorm::max_entry, 0.0};
  for (std::size_t idx : samples) {
    const auto& pt = traj.points.at(idx);
    const auto inv = ermakov_operator(heisenberg_quadratures(space, first, pt), pt).from_g.m;
    worst.value = std::max(worst.value, compare_block(inv - ref, space.polynomial_block()).value);
  }
  return worst;
}

/// Lowest `count` eigenvalues of H(w0) against w0 (n + 1/2).
inline double hamiltonian_spectrum_defect(const FockSpace& space, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hamiltonian(space, space.omega0).m, Eigen::EigenvaluesOnly);
  double worst = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const double expected = space.omega0 * (static_cast<double>(n) + 0.5);
    worst = std::max(worst, std::abs(eig.eigenvalues()(static_cast<Eigen::Index>(n)) - expected));
  }
  return worst;
}

struct LadderRateReport {
  double rate_norm = 0.0;    // |d a_H/dt| on the block
  double printed_sign = 0.0; // |d a_H/dt - i w [I, a_H]|
  double flipped_sign = 0.0; // |d a_H/dt + i w [I, a_H]|
};

/// Finite-difference rate of the Heisenberg ladder operator a_H(t) compared
/// with both signs of  i w [I, a]. Reported, never gated.
inline LadderRateReport ladder_rate_probe(const FockSpace& space, const Trajectory& traj, double t, double dt = 0.0) {
  if (dt <= 0.0) dt = 1e-3 * 2.0 * std::numbers::pi / eval_profile(traj.profile, t).omega;
  const auto& first = traj.points.front();
  const auto& pt = traj.points[sample_index(traj, t)];
  const auto plus = propagate(traj.profile, pt, t + dt);
  const auto minus = propagate(traj.profile, pt, t - dt);
  const auto a_of = [&](const TrajectoryPoint& x) {
    return invariant_ladder(heisenberg_quadratures(space, first, x), x).a.m;
  };
  const ComplexMatrix rate = (a_of(plus) - a_of(minus)) / (2.0 * dt);
  const auto quad = heisenberg_quadratures(space, first, pt);
  const ComplexMatrix gen =
      kI * amplitude_phase(pt).phase_rate * commutator(ermakov_operator(quad, pt).from_g.m, a_of(pt));
  const std::size_t block = space.exponential_block();
  return {compare_block(rate, block).value, compare_block(rate - gen, block).value,
          compare_block(rate + gen, block).value};
}

}  // namespace tdho
