#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tdho/classical.hpp"
#include "tdho/fock.hpp"
#include "tdho/operator_matrix.hpp"
#include "tdho/quantum.hpp"

namespace {

using namespace tdho;

ComplexMatrix eye(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

const Trajectory& sweep_trajectory() {
  static const Trajectory traj = [] {
    const auto p = FrequencyProfile::tanh_sweep(1.0, 2.0, 50.0, 5.0, 0.0, 100.0);
    return integrate_tdho(p, InitialPair::unit_wronskian(1.0), uniform_grid(0.0, 100.0, 0.05));
  }();
  return traj;
}

const std::vector<std::size_t> kSamples{0, 500, 1000, 1500, 2000};

// ---------------------------------------------------------------------------
// Fock space and Hamiltonian
// ---------------------------------------------------------------------------

TEST(Fock, TwoLevelLadder) {
  const auto a = annihilation(2);
  EXPECT_EQ(a(0, 1), Complex(1.0, 0.0));
  EXPECT_EQ(a(0, 0), Complex(0.0, 0.0));
  EXPECT_EQ(a(1, 0), Complex(0.0, 0.0));
  EXPECT_EQ(a(1, 1), Complex(0.0, 0.0));
}

TEST(Fock, TooSmallRejected) {
  EXPECT_THROW(build_fock(3, 1.0), DimensionError);
  EXPECT_THROW(build_fock(8, -1.0), InvalidFrequencyError);
  EXPECT_THROW(build_fock(8, 1.0, 0.0), DegeneratePairError);
}

TEST(Fock, QuadraturesHermitian) {
  for (std::size_t n : {4u, 17u, 64u}) {
    const auto s = build_fock(n, 1.7);
    EXPECT_LE(hermiticity_defect(s.q), 1e-15);
    EXPECT_LE(hermiticity_defect(s.p), 1e-15);
  }
}

TEST(Fock, CanonicalCommutatorOnlyCornerDefect) {
  const auto s = build_fock(64, 1.0);
  const ComplexMatrix diff = commutator(s.q, s.p) - kI * s.identity();
  EXPECT_LE(compare_block(diff, 63).value, 1e-12);
  EXPECT_NEAR(diff(63, 63).imag(), -64.0, 1e-10);
  ComplexMatrix off = diff;
  off(63, 63) = 0.0;
  EXPECT_LE(max_entry(off), 1e-12);
}

TEST(Fock, LadderCommutator) {
  const auto s = build_fock(16, 1.0);
  EXPECT_LE(compare_block(commutator(s.a, s.adag) - s.identity(), 15).value, 1e-14);
  EXPECT_EQ(max_entry(commutator(s.a, s.a)), 0.0);
}

TEST(Hamiltonian, LowSpectrumIsHarmonic) {
  const auto s = build_fock(64, 1.3);
  EXPECT_LE(hamiltonian_spectrum_defect(s, 32), 1e-8);
}

TEST(Hamiltonian, VacuumExpectationAtDoubleFrequency) {
  const double w0 = 0.7;
  const auto s = build_fock(32, w0);
  const auto h = hamiltonian(s, 2.0 * w0);
  EXPECT_NEAR(h.m(0, 0).real(), (w0 * w0 + 4.0 * w0 * w0) / (4.0 * w0), 1e-15);
  EXPECT_TRUE(h.hermitian);
  EXPECT_THROW(hamiltonian(s, 0.0), InvalidFrequencyError);
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

TEST(MatrixExponential, ZeroAndDiagonal) {
  EXPECT_LE(max_entry(matrix_exponential(ComplexMatrix::Zero(6, 6)).m - eye(6)), 1e-15);
  ComplexMatrix d = ComplexMatrix::Zero(6, 6);
  for (int k = 0; k < 6; ++k) d(k, k) = kI * std::numbers::pi * static_cast<double>(k);
  const auto e = matrix_exponential(d);
  EXPECT_TRUE(e.unitary);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(std::abs(e.m(k, k) - Complex(k % 2 ? -1.0 : 1.0, 0.0)), 0.0, 1e-14);
}

TEST(MatrixExponential, RandomAntiHermitianMatchesSeriesOracle) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix h(8, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) h(r, c) = Complex(u(rng), u(rng));
  }
  const ComplexMatrix a = 0.5 * (h - h.adjoint());
  ASSERT_TRUE(is_anti_hermitian(a));
  const auto e = matrix_exponential(a);
  EXPECT_TRUE(e.unitary);
  EXPECT_LE(max_entry(e.m - oracle::expm_series(a)), 1e-11);
  EXPECT_LE(unitarity_defect(e.m, 8), 1e-10);
}

TEST(MatrixExponential, GeneralMatrixMatchesSeriesOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  ComplexMatrix a(6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) a(r, c) = Complex(u(rng), u(rng));
  }
  EXPECT_LE(max_entry(matrix_exponential(a).m - oracle::expm_series(a)), 1e-11);
}

TEST(MatrixExponential, NonFiniteInputRejected) {
  ComplexMatrix a = ComplexMatrix::Zero(4, 4);
  a(1, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(matrix_exponential(a), NumericalError);
}

// ---------------------------------------------------------------------------
// Linear invariants
// ---------------------------------------------------------------------------

TEST(LinearInvariants, ReduceToQuadraturesAtStart) {
  const double w0 = 2.0;
  const auto s = build_fock(16, w0);
  const auto init = InitialPair::unit_wronskian(w0);
  const TrajectoryPoint pt{0.0, init.first.u, init.first.du, init.second.u, init.second.du, 0.0};
  const auto ops = linear_invariant_ops(schrodinger_quadratures(s), pt);
  EXPECT_LE(max_entry(ops.g1.m - std::sqrt(w0) * s.q), 1e-15);
  EXPECT_LE(max_entry(ops.g2.m + s.p / std::sqrt(w0)), 1e-15);
  EXPECT_TRUE(ops.g1.hermitian);
  EXPECT_TRUE(ops.g2.hermitian);
}

TEST(LinearInvariants, CommutatorAtStart) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  EXPECT_LE(check_g_commutation(schrodinger_quadratures(s), traj.points.front(), traj.G).value, 1e-12);
}

TEST(LinearInvariants, CommutatorAlongSweep) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  for (auto i : kSamples) {
    const auto b = check_g_commutation(schrodinger_quadratures(s), traj.points[i], traj.G);
    EXPECT_EQ(b.block, 63u);
    EXPECT_LE(b.value, 1e-8) << "sample " << i;
  }
}

TEST(LinearInvariants, RescaledPairCarriesTwiceG) {
  const auto s = build_fock(64, 1.0);
  const double r = std::sqrt(2.0);
  const TrajectoryPoint pt{0.0, 0.0, -r, r, 0.0, 0.0};
  EXPECT_LE(check_g_commutation(schrodinger_quadratures(s), pt, 2.0).value, 1e-12);
  EXPECT_GT(check_g_commutation(schrodinger_quadratures(s), pt, 1.0).value, 0.5);
}

// ---------------------------------------------------------------------------
// Ermakov-Lewis operator, ladder operators, factorization
// ---------------------------------------------------------------------------

TEST(ErmakovOperator, NumberOperatorAtStart) {
  const auto s = build_fock(32, 1.0);
  const auto& traj = sweep_trajectory();
  const auto inv = ermakov_operator(schrodinger_quadratures(s), traj.points.front());
  for (int n = 0; n < 31; ++n) EXPECT_NEAR(inv.from_g.m(n, n).real(), n + 0.5, 1e-12);
  EXPECT_NEAR(inv.from_g.m(0, 0).real(), 0.5 * traj.G, 1e-15);
}

TEST(ErmakovOperator, BothFormsAgreeOnFullMatrix) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  for (auto i : kSamples) {
    const auto inv = ermakov_operator(schrodinger_quadratures(s), traj.points[i]);
    EXPECT_TRUE(inv.defect.full_matrix());
    EXPECT_LE(inv.defect.value, 1e-10) << "sample " << i;
  }
}

TEST(ErmakovOperator, ConstantInHeisenbergPicture) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < traj.points.size(); i += 40) all.push_back(i);
  EXPECT_LE(invariant_time_independence(s, traj, all).value, 1e-7);
}

TEST(Ladder, ReferenceAnnihilatorAtStart) {
  const auto s = build_fock(16, 1.0);
  const auto& traj = sweep_trajectory();
  const auto lad = invariant_ladder(schrodinger_quadratures(s), traj.points.front());
  EXPECT_LE(max_entry(lad.a.m - s.a), 1e-15);
  EXPECT_LE(max_entry(lad.A.m - lad.a.m), 1e-15);
  EXPECT_LE(max_entry(lad.a_dag.m - lad.a.m.adjoint()), 1e-15);
}

TEST(Ladder, CommutatorEqualsG) {
  const auto s = build_fock(32, 1.0);
  const auto& traj = sweep_trajectory();
  const auto& pt = traj.points[1000];
  const auto lad = invariant_ladder(schrodinger_quadratures(s), pt);
  EXPECT_LE(compare_block(commutator(lad.a.m, lad.a_dag.m) - wronskian(pt) * s.identity(), 31).value, 1e-8);
}

TEST(Factorization, StartAndMidSweep) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  const auto f0 = check_factorization(schrodinger_quadratures(s), traj.points.front());
  EXPECT_LE(std::max({f0.rho_form.value, f0.g_form.value, f0.cross.value}), 1e-12);
  const auto f1 = check_factorization(schrodinger_quadratures(s), traj.points[1000]);
  EXPECT_LE(std::max({f1.rho_form.value, f1.g_form.value, f1.cross.value}), 1e-8);
}

// ---------------------------------------------------------------------------
// Phase-shift conjugation
// ---------------------------------------------------------------------------

TEST(Conjugation, ZeroPhaseIsIdentity) {
  const auto s = build_fock(32, 1.0);
  EXPECT_LE(phase_shift_conjugation(s, sweep_trajectory().points.front(), 0.0).value, 1e-14);
}

TEST(Conjugation, ConstantFrequencyRotation) {
  const double w0 = 1.0;
  const auto p = FrequencyProfile::constant(w0, 0.0, 10.0);
  const auto traj = integrate_tdho(p, InitialPair::unit_wronskian(w0), uniform_grid(0.0, 10.0, 0.5));
  const auto s = build_fock(64, w0);
  for (std::size_t i : {3u, 11u, 20u}) {
    const auto& pt = traj.points[i];
    EXPECT_NEAR(pt.phase, w0 * pt.t, 1e-8);
    EXPECT_LE(phase_shift_conjugation(s, pt, pt.phase).value, 1e-8);
  }
}

TEST(Conjugation, MidSweepShrinksWithDimension) {
  const auto& pt = sweep_trajectory().points[1000];
  const double d64 = phase_shift_conjugation(build_fock(64, 1.0), pt, pt.phase).value;
  const double d128 = phase_shift_conjugation(build_fock(128, 1.0), pt, pt.phase).value;
  EXPECT_LE(d64, 1e-6);
  EXPECT_LT(d128, d64);
}

TEST(Conjugation, HeisenbergPictureAgrees) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  for (auto i : kSamples) {
    const auto& pt = traj.points[i];
    EXPECT_LE(phase_shift_conjugation(heisenberg_quadratures(s, traj.points.front(), pt), pt, pt.phase).value, 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Squeeze transformation and the invariant/Hamiltonian relation
// ---------------------------------------------------------------------------

TEST(Squeeze, IdentityAtReferenceAmplitude) {
  const double w0 = 1.5;
  const auto s = build_fock(32, w0);
  const auto t = squeeze_transform(s, 1.0 / std::sqrt(w0), 0.0);
  EXPECT_LE(max_entry(t.m - s.identity()), 1e-13);
}

TEST(Squeeze, PureDilationScalesVariance) {
  const auto s = build_fock(128, 1.0);
  const auto t = squeeze_transform(s, std::numbers::e, 0.0);
  const ComplexMatrix q2 = s.q * s.q;
  const Complex squeezed = (t.m * q2 * t.m.adjoint())(0, 0);
  EXPECT_NEAR(squeezed.real() / q2(0, 0).real(), std::exp(2.0), 1e-6);
}

TEST(Squeeze, UnitaryOnHalfBlock) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  for (auto i : kSamples) {
    const auto ap = amplitude_phase(traj.points[i]);
    const auto t = squeeze_transform(s, ap.rho, ap.drho);
    EXPECT_TRUE(t.unitary);
    EXPECT_LE(unitarity_defect(t.m, 32), 1e-8);
  }
  EXPECT_THROW(squeeze_transform(s, 0.0, 0.0), DomainError);
}

TEST(InvariantHamiltonian, ConstantFrequencyReducesToScaledInvariant) {
  const auto p = FrequencyProfile::constant(1.0, 0.0, 10.0);
  // The residual tracks the trajectory error in rho, so integrate tightly.
  IntegratorSettings tight;
  tight.rel_tol = 1e-12;
  tight.abs_tol = 1e-14;
  const auto traj = integrate_tdho(p, InitialPair::unit_wronskian(1.0), uniform_grid(0.0, 10.0, 0.5), tight);
  const auto s = build_fock(64, 1.0);
  EXPECT_LE(check_invariant_hamiltonian_relation(s, traj, 5.0, 0.0, tight).value, 1e-10);
}

TEST(InvariantHamiltonian, SweepSecondOrderInStep) {
  const auto s = build_fock(64, 1.0);
  const auto& traj = sweep_trajectory();
  const double dt = default_relation_step(traj.profile, 50.0);
  const double d1 = check_invariant_hamiltonian_relation(s, traj, 50.0, dt).value;
  const double d2 = check_invariant_hamiltonian_relation(s, traj, 50.0, 0.5 * dt).value;
  EXPECT_LE(d1, 1e-4);
  EXPECT_GE(d1 / d2, 3.5);
  EXPECT_LE(d1 / d2, 4.5);
}

TEST(LadderRate, ReportedNotGated) {
  const auto s = build_fock(64, 1.0);
  const auto r = ladder_rate_probe(s, sweep_trajectory(), 50.0);
  EXPECT_GT(r.rate_norm, 0.1);
  EXPECT_TRUE(std::isfinite(r.printed_sign));
  EXPECT_TRUE(std::isfinite(r.flipped_sign));
}

}  // namespace
