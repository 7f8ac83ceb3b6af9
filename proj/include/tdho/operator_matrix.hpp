#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "tdho/errors.hpp"

namespace tdho {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

inline double max_entry(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_defect(const ComplexMatrix& m) { return max_entry(m - m.adjoint()); }

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12) {
  return hermiticity_defect(m) <= tol * std::max(1.0, max_entry(m));
}

inline bool is_anti_hermitian(const ComplexMatrix& m, double tol = 1e-12) {
  return max_entry(m + m.adjoint()) <= tol * std::max(1.0, max_entry(m));
}

/// Dense operator on a truncated Fock space plus the structural facts we
/// know about it. `hermitian` is derived from the entries on construction;
/// `unitary` is only ever set by matrix_exponential of an anti-Hermitian
/// generator.
struct OperatorMatrix {
  ComplexMatrix m;
  bool hermitian = false;
  bool unitary = false;
  std::string label;

  OperatorMatrix() = default;
  OperatorMatrix(ComplexMatrix entries, std::string name)
      : m(std::move(entries)), hermitian(is_hermitian(m)), label(std::move(name)) {}

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
};

enum class BlockNorm { max_entry, spectral };

/// Norm of a difference matrix restricted to its leading block x block corner.
struct LowBlockComparison {
  std::size_t block = 0;
  std::size_t dim = 0;
  BlockNorm norm = BlockNorm::max_entry;
  double value = 0.0;

  bool full_matrix() const { return block == dim; }
};

inline LowBlockComparison compare_block(const ComplexMatrix& diff, std::size_t block,
                                        BlockNorm norm = BlockNorm::max_entry) {
  const auto n = static_cast<std::size_t>(diff.rows());
  if (diff.rows() != diff.cols()) throw DimensionError("block comparison needs a square matrix");
  if (block == 0 || block > n) throw DimensionError("block size must lie in [1, dim]");
  const auto b = static_cast<Eigen::Index>(block);
  const ComplexMatrix corner = diff.topLeftCorner(b, b);
  double value = 0.0;
  if (norm == BlockNorm::max_entry) {
    value = max_entry(corner);
  } else {
    Eigen::JacobiSVD<ComplexMatrix> svd(corner);
    value = svd.singularValues()(0);
  }
  return {block, n, norm, value};
}

inline void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw DimensionError(msg.str());
  }
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b);
  return a * b - b * a;
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return {commutator(a.m, b.m), "[" + a.label + ", " + b.label + "]"};
}

/// f(H) for Hermitian H through its eigendecomposition.
template <class F>
ComplexMatrix hermitian_function(const ComplexMatrix& h, F&& f) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
  const auto& v = eig.eigenvectors();
  ComplexVector fx(v.cols());
  for (Eigen::Index i = 0; i < fx.size(); ++i) fx(i) = f(eig.eigenvalues()(i));
  return v * fx.asDiagonal() * v.adjoint();
}

/// e^A. Hermitian and anti-Hermitian inputs go through an eigendecomposition
/// (so exponentials of anti-Hermitian generators are unitary to rounding);
/// anything else uses Pade scaling-and-squaring.
inline OperatorMatrix matrix_exponential(const ComplexMatrix& a, std::string label = "exp") {
  if (a.rows() != a.cols()) throw DimensionError("matrix exponential needs a square matrix");
  if (!a.allFinite()) throw NumericalError("matrix exponential of non-finite input");
  OperatorMatrix out;
  out.label = std::move(label);
  if (a.size() == 0) return out;
  if (is_hermitian(a)) {
    out.m = hermitian_function(a, [](double x) { return Complex(std::exp(x), 0.0); });
    out.hermitian = true;
    // A zero generator is also anti-Hermitian; its exponential is the identity.
    out.unitary = is_anti_hermitian(a);
  } else if (is_anti_hermitian(a)) {
    // A = iH with H = -iA Hermitian.
    out.m = hermitian_function(ComplexMatrix(-kI * a), [](double x) { return std::exp(kI * x); });
    out.unitary = true;
  } else {
    out.m = a.exp();
  }
  if (!out.m.allFinite()) {
    std::ostringstream msg;
    msg << "matrix exponential did not converge (max |A_ij| = " << max_entry(a) << ", dim " << a.rows() << ")";
    throw NumericalError(msg.str());
  }
  out.hermitian = out.hermitian || is_hermitian(out.m);
  return out;
}

inline double unitarity_defect(const ComplexMatrix& u, std::size_t block) {
  const ComplexMatrix prod = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
  return compare_block(prod, block).value;
}

}  // namespace tdho
