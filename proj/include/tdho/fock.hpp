#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "tdho/errors.hpp"
#include "tdho/operator_matrix.hpp"

namespace tdho {

// a|n> = sqrt(n)|n-1> on span{|0>, ..., |dim-1>}.
inline ComplexMatrix annihilation(std::size_t dim) {
  if (dim == 0) throw DimensionError("Fock dimension must be positive");
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// Truncated number basis of the reference oscillator with frequency omega0.
///   q = (a + a^dag) / sqrt(2 w0),   p = i sqrt(w0/2) (a^dag - a)
/// [q, p] = i on the leading (dim-1) block; the last diagonal entry is -i(dim-1).
struct FockSpace {
  std::size_t dim = 0;
  double omega0 = 1.0;
  double G = 1.0;
  ComplexMatrix a;
  ComplexMatrix adag;
  ComplexMatrix q;
  ComplexMatrix p;

  // Block sizes used by the truncation-aware comparisons.
  std::size_t polynomial_block() const { return dim - 1; }
  std::size_t exponential_block() const { return dim / 4; }
  std::size_t unitary_block() const { return dim / 2; }

  ComplexMatrix identity() const {
    return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  }
};

inline FockSpace build_fock(std::size_t dim, double omega0, double G = 1.0) {
  if (dim < 4) throw DimensionError("Fock dimension must be at least 4, got " + std::to_string(dim));
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw InvalidFrequencyError("reference frequency must be positive");
  if (G == 0.0 || !std::isfinite(G)) throw DegeneratePairError("G must be finite and non-zero");
  FockSpace s;
  s.dim = dim;
  s.omega0 = omega0;
  s.G = G;
  s.a = annihilation(dim);
  s.adag = s.a.adjoint();
  s.q = (s.a + s.adag) / std::sqrt(2.0 * omega0);
  s.p = kI * std::sqrt(0.5 * omega0) * (s.adag - s.a);
  return s;
}

inline OperatorMatrix hamiltonian(const FockSpace& space, double omega) {
  if (!(omega > 0.0)) throw InvalidFrequencyError("Hamiltonian frequency must be positive");
  return {0.5 * (space.p * space.p + omega * omega * (space.q * space.q)), "H"};
}

}  // namespace tdho
