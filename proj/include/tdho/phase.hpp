#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tdho/classical.hpp"
#include "tdho/fock.hpp"
#include "tdho/operator_matrix.hpp"
#include "tdho/quantum.hpp"

namespace tdho {

// with_inv_pi divides the coherent-state integral by pi, which makes the
// projectors |alpha><alpha| d^2alpha / pi a resolution of the identity.
enum class PhaseNormalization { with_inv_pi, none };
enum class PhaseProvenance { closed_form, quadrature };

struct PhaseOperator {
  ComplexMatrix m;
  PhaseNormalization normalization = PhaseNormalization::with_inv_pi;
  PhaseProvenance provenance = PhaseProvenance::closed_form;

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
};

/// <m| Phi |n> of  Phi = (1/pi) \int theta |alpha><alpha| d^2alpha,  theta in (-pi, pi].
/// For k = m - n != 0 this is  -i (-1)^k Gamma((m+n)/2 + 1) / (k sqrt(m! n!)),
/// evaluated in log space; the diagonal vanishes.
inline Complex turski_element(std::size_t m, std::size_t n, PhaseNormalization norm = PhaseNormalization::with_inv_pi) {
  if (m == n) return {0.0, 0.0};
  const double k = static_cast<double>(m) - static_cast<double>(n);
  const double sign = ((m + n) % 2 == 0) ? 1.0 : -1.0;  // (-1)^k
  const double log_radial = std::lgamma(0.5 * static_cast<double>(m + n) + 1.0) -
                            0.5 * (std::lgamma(static_cast<double>(m) + 1.0) + std::lgamma(static_cast<double>(n) + 1.0));
  double value = sign * std::exp(log_radial) / k;
  if (norm == PhaseNormalization::none) value *= std::numbers::pi;
  return {0.0, -value};
}

inline PhaseOperator turski_phase_matrix(std::size_t dim, PhaseNormalization norm = PhaseNormalization::with_inv_pi) {
  if (dim < 4) throw DimensionError("phase operator needs dimension >= 4");
  const auto n = static_cast<Eigen::Index>(dim);
  PhaseOperator phi{ComplexMatrix::Zero(n, n), norm, PhaseProvenance::closed_form};
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      phi.m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = turski_element(r, c, norm);
    }
  }
  if (!phi.m.allFinite()) throw NumericalError("phase operator elements overflowed");
  return phi;
}

// ---------------------------------------------------------------------------
// Coherent states
// ---------------------------------------------------------------------------

struct CoherentState {
  Complex alpha;
  ComplexVector coeffs;
};

/// e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < dim.
inline ComplexVector coherent_coefficients(std::size_t dim, Complex alpha) {
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexVector c = ComplexVector::Zero(n);
  const double r = std::abs(alpha);
  if (r == 0.0) {
    c(0) = 1.0;
    return c;
  }
  const double theta = std::arg(alpha);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double log_mag = -0.5 * r * r + kk * std::log(r) - 0.5 * std::lgamma(kk + 1.0);
    c(k) = std::polar(std::exp(log_mag), kk * theta);
  }
  return c;
}

inline CoherentState coherent_state(const FockSpace& space, Complex alpha) {
  if (std::norm(alpha) > static_cast<double>(space.dim) / 4.0) {
    throw TruncationRiskError("|alpha|^2 exceeds dim/4; coherent state not resolved by the truncated basis");
  }
  return {alpha, coherent_coefficients(space.dim, alpha)};
}

/// exp(alpha a^dag - alpha* a)|0>, the displacement route.
inline ComplexVector displaced_vacuum(const FockSpace& space, Complex alpha) {
  const ComplexMatrix gen = alpha * space.adag - std::conj(alpha) * space.a;
  const auto d = matrix_exponential(gen, "D");
  return d.m.col(0);
}

inline Complex expectation(const ComplexVector& psi, const ComplexMatrix& op) { return psi.dot(op * psi); }

// ---------------------------------------------------------------------------
// Quadrature route for the phase matrix
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t count) {
  std::vector<double> x(count), w(count);
  const double n = static_cast<double>(count);
  for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= count; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double jj = static_cast<double>(j);
        p0 = ((2.0 * jj - 1.0) * z * p1 - (jj - 1.0) * p2) / jj;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[count - 1 - i] = z;
    w[i] = w[count - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

}  // namespace detail

/// <m|Phi|n> by direct 2-D integration of theta <m|alpha><alpha|n> over the
/// plane in polar coordinates: adaptive Gauss-Kronrod in r up to the point
/// where e^{-r^2} r^{m+n+1} < 1e-16, Gauss-Legendre with 8(m+n+2) nodes in theta.
inline Complex turski_element_quadrature(std::size_t m, std::size_t n,
                                         PhaseNormalization norm = PhaseNormalization::with_inv_pi) {
  const double power = static_cast<double>(m + n + 1);
  double r_max = std::sqrt(0.5 * power) + 1.0;
  while (-r_max * r_max + power * std::log(r_max) >= std::log(1e-16)) r_max += 0.25;

  const auto [nodes, weights] = detail::gauss_legendre(8 * (m + n + 2));
  const double log_norm = 0.5 * (std::lgamma(static_cast<double>(m) + 1.0) + std::lgamma(static_cast<double>(n) + 1.0));
  // <m|alpha><alpha|n> for alpha = r e^{i theta}
  auto overlap = [&](double r, double theta) {
    if (r == 0.0) return Complex(m == 0 && n == 0 ? 1.0 : 0.0, 0.0);
    const double mag = std::exp(-r * r + static_cast<double>(m + n) * std::log(r) - log_norm);
    return std::polar(mag, (static_cast<double>(m) - static_cast<double>(n)) * theta);
  };
  auto angular = [&](double r) {
    Complex sum{0.0, 0.0};
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double theta = std::numbers::pi * nodes[j];
      sum += weights[j] * std::numbers::pi * theta * overlap(r, theta);
    }
    return sum * r;
  };
  using boost::math::quadrature::gauss_kronrod;
  const Complex raw = gauss_kronrod<double, 61>::integrate(angular, 0.0, r_max, 10, 1e-13);
  const double re = raw.real();
  const double im = raw.imag();
  Complex value{re, im};
  if (norm == PhaseNormalization::with_inv_pi) value /= std::numbers::pi;
  return value;
}

inline PhaseOperator turski_phase_matrix_quadrature(std::size_t dim,
                                                    PhaseNormalization norm = PhaseNormalization::with_inv_pi) {
  const auto n = static_cast<Eigen::Index>(dim);
  PhaseOperator phi{ComplexMatrix::Zero(n, n), norm, PhaseProvenance::quadrature};
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      phi.m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = turski_element_quadrature(r, c, norm);
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// [Phi, I] on coherent probes
// ---------------------------------------------------------------------------

struct CoherentProbe {
  Complex alpha;
  Complex value;     // <alpha| [Phi, I] |alpha>
  double deviation;  // |value + i|
};

struct PhaseCommutatorReport {
  double diagonal_max = 0.0;  // max |[Phi, I]_nn|
  LowBlockComparison block;   // [Phi, I] + i on the dim/4 block
  std::vector<CoherentProbe> probes;
};

/// `invariant` must be diagonal in the number basis (reference time, G = 1).
inline PhaseCommutatorReport check_phase_commutator(const PhaseOperator& phi, const ComplexMatrix& invariant,
                                                    std::span<const Complex> alphas) {
  require_same_dim(phi.m, invariant);
  const ComplexMatrix comm = commutator(phi.m, invariant);
  PhaseCommutatorReport rep;
  rep.diagonal_max = comm.diagonal().cwiseAbs().maxCoeff();
  const auto n = comm.rows();
  rep.block = compare_block(comm + kI * ComplexMatrix::Identity(n, n), static_cast<std::size_t>(n / 4));
  for (Complex alpha : alphas) {
    const ComplexVector psi = coherent_coefficients(static_cast<std::size_t>(n), alpha);
    const Complex v = expectation(psi, comm);
    rep.probes.push_back({alpha, v, std::abs(v + kI)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Number operator and the number/phase form of the invariant
// ---------------------------------------------------------------------------

/// n(t) = a^dag(t) a(t) / (G w(t)), w = ds/dt at the point.
inline OperatorMatrix number_operator(const Quadratures& quad, const TrajectoryPoint& pt, double G) {
  const double w = amplitude_phase(pt).phase_rate;
  if (!(w > 0.0)) throw InvalidFrequencyError("number operator needs a positive phase rate");
  const auto lad = invariant_ladder(quad, pt);
  return {lad.a_dag.m * lad.a.m / (G * w), "n(t)"};
}

struct NumberPhaseRecord {
  double t = 0.0;
  double omega = 0.0;            // ds/dt
  double number = 0.0;           // <alpha| n_H(t) |alpha>
  double phase = 0.0;            // <alpha| Phi(t) |alpha>
  double invariant = 0.0;        // <alpha| I |alpha>
  double phase_rate = 0.0;       // central difference of `phase`
  double rate_deviation = 0.0;   // phase_rate + omega
  bool near_wrap = false;        // probe angle within pi/2 of the branch cut
};

struct NumberPhaseReport {
  Complex alpha;
  bool degenerate = false;  // vacuum probe: no phase to follow
  std::vector<NumberPhaseRecord> records;
};

/// Heisenberg-picture phase  Phi(t) = e^{i s I} Phi e^{-i s I}  with s measured
/// from t0, sampled on trajectory indices. Rates are central differences over
/// the neighbouring samples, so indices must be interior.
inline NumberPhaseReport phase_eom_probe(const FockSpace& space, const Trajectory& traj, const PhaseOperator& phi,
                                         Complex alpha, std::span<const std::size_t> indices) {
  require_same_dim(phi.m, space.a);
  const auto psi = coherent_state(space, alpha).coeffs;
  const auto& first = traj.points.front();
  const ComplexMatrix inv0 = ermakov_operator(schrodinger_quadratures(space), first).from_g.m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(inv0);
  const auto& vecs = eig.eigenvectors();
  const ComplexVector psi_eig = vecs.adjoint() * psi;
  const ComplexMatrix phi_eig = vecs.adjoint() * phi.m * vecs;

  auto phase_expect = [&](const TrajectoryPoint& pt) {
    // <psi| e^{isI} Phi e^{-isI} |psi> in the eigenbasis of I.
    const double s = pt.phase - first.phase;
    ComplexVector rotated = psi_eig;
    for (Eigen::Index k = 0; k < rotated.size(); ++k) rotated(k) *= std::exp(-kI * s * eig.eigenvalues()(k));
    return expectation(rotated, phi_eig).real();
  };

  NumberPhaseReport rep{alpha, std::abs(alpha) == 0.0, {}};
  for (std::size_t i : indices) {
    if (i == 0 || i + 1 >= traj.points.size()) throw DomainError("phase probe needs interior sample indices");
    const auto& pt = traj.points[i];
    const auto quad = heisenberg_quadratures(space, first, pt);
    NumberPhaseRecord rec;
    rec.t = pt.t;
    rec.omega = amplitude_phase(pt).phase_rate;
    rec.number = expectation(psi, number_operator(quad, pt, wronskian(first)).m).real();
    rec.invariant = expectation(psi, ermakov_operator(quad, pt).from_g.m).real();
    rec.phase = phase_expect(pt);
    const auto& lo = traj.points[i - 1];
    const auto& hi = traj.points[i + 1];
    rec.phase_rate = (phase_expect(hi) - phase_expect(lo)) / (hi.t - lo.t);
    rec.rate_deviation = rec.phase_rate + rec.omega;
    rec.near_wrap = std::abs(wrap_angle(std::arg(alpha) - (pt.phase - first.phase))) > 0.5 * std::numbers::pi;
    rep.records.push_back(rec);
  }
  return rep;
}

/// q - (a + a^dag) / sqrt(2 G w) on the (dim-1) block, G the local Wronskian.
inline LowBlockComparison coordinate_identity(const Quadratures& quad, const TrajectoryPoint& pt) {
  const auto lad = invariant_ladder(quad, pt);
  const double G = wronskian(pt);
  const double w = amplitude_phase(pt).phase_rate;
  if (!(G * w > 0.0)) throw InvalidFrequencyError("coordinate identity needs G w > 0");
  const ComplexMatrix q_rebuilt = (lad.a.m + lad.a_dag.m) / std::sqrt(2.0 * G * w);
  return compare_block(quad.q - q_rebuilt, static_cast<std::size_t>(quad.q.rows() - 1));
}

/// a - sqrt(I) e^{-i Phi} on the leading `block`; a measured deviation only.
inline LowBlockComparison polar_deviation(const Quadratures& quad, const TrajectoryPoint& pt, const PhaseOperator& phi,
                                          std::size_t block) {
  require_same_dim(phi.m, quad.q);
  const auto lad = invariant_ladder(quad, pt);
  const auto inv = ermakov_operator(quad, pt).from_g.m;
  const ComplexMatrix root = hermitian_function(inv, [](double x) { return Complex(std::sqrt(std::max(x, 0.0)), 0.0); });
  const ComplexMatrix rotation = matrix_exponential(ComplexMatrix(-kI * phi.m), "e^{-i Phi}").m;
  return compare_block(lad.a.m - root * rotation, block);
}

struct CoordinatePolarReport {
  LowBlockComparison coordinate;  // gated
  LowBlockComparison polar;       // dim/4 block, measured only
};

inline CoordinatePolarReport coordinate_polar_check(const Quadratures& quad, const TrajectoryPoint& pt,
                                                    const PhaseOperator& phi) {
  return {coordinate_identity(quad, pt), polar_deviation(quad, pt, phi, static_cast<std::size_t>(quad.q.rows() / 4))};
}

struct EnergyProbe {
  Complex alpha;
  double number = 0.0;     // <n(t)>
  double omega = 0.0;
  double energy = 0.0;     // <n(t)> w(t)
  double invariant = 0.0;  // <I>
  double defect = 0.0;     // |energy - (<I> - 1/2)|
};

struct InvariantNumberPhaseReport {
  LowBlockComparison identity;  // I - (w n + 1/2), (dim-1) block
  std::vector<EnergyProbe> probes;
};

/// I = -(n + 1/(2w)) dPhi/dt with dPhi/dt = -w, i.e. I = w n + 1/2. Only
/// meaningful at G = 1.
inline InvariantNumberPhaseReport invariant_number_phase_check(const Quadratures& quad, const TrajectoryPoint& pt,
                                                               double G, std::span<const Complex> alphas) {
  if (std::abs(G - 1.0) > 1e-12) {
    throw UnsupportedNormalizationError("number/phase form of the invariant is only defined for G = 1");
  }
  const auto n = quad.q.rows();
  const double w = amplitude_phase(pt).phase_rate;
  const auto number = number_operator(quad, pt, G);
  const auto inv = ermakov_operator(quad, pt).from_g;
  const ComplexMatrix diff = inv.m - (w * number.m + 0.5 * ComplexMatrix::Identity(n, n));
  InvariantNumberPhaseReport rep{compare_block(diff, static_cast<std::size_t>(n - 1)), {}};
  for (Complex alpha : alphas) {
    const ComplexVector psi = coherent_coefficients(static_cast<std::size_t>(n), alpha);
    EnergyProbe e;
    e.alpha = alpha;
    e.number = expectation(psi, number.m).real();
    e.omega = w;
    e.energy = e.number * w;
    e.invariant = expectation(psi, inv.m).real();
    e.defect = std::abs(e.energy - (e.invariant - 0.5));
    rep.probes.push_back(e);
  }
  return rep;
}

}  // namespace tdho
