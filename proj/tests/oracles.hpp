#pragma once

// Reference computations that share no code with the library.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

// ---------------------------------------------------------------------------
// Fixed-step classical RK4 with one Richardson step-halving correction.
// State: u1, du1, u2, du2.
// ---------------------------------------------------------------------------

using State = std::array<double, 4>;

inline State rk4_fixed(const std::function<double(double)>& omega_sq, State y, double t0, double t1,
                       std::size_t steps) {
  const double h = (t1 - t0) / static_cast<double>(steps);
  auto f = [&](double t, const State& s) {
    const double w2 = omega_sq(t);
    return State{s[1], -w2 * s[0], s[3], -w2 * s[2]};
  };
  auto axpy = [](const State& a, double c, const State& b) {
    return State{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2], a[3] + c * b[3]};
  };
  double t = t0;
  for (std::size_t i = 0; i < steps; ++i) {
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State k4 = f(t + h, axpy(y, h, k3));
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    t = t0 + static_cast<double>(i + 1) * (t1 - t0) / static_cast<double>(steps);
  }
  return y;
}

inline State rk4_richardson(const std::function<double(double)>& omega_sq, const State& y0, double t0, double t1,
                            std::size_t steps) {
  const State coarse = rk4_fixed(omega_sq, y0, t0, t1, steps);
  const State fine = rk4_fixed(omega_sq, y0, t0, t1, 2 * steps);
  State out;
  for (int j = 0; j < 4; ++j) out[j] = (16.0 * fine[j] - coarse[j]) / 15.0;
  return out;
}

inline double tanh_sweep_omega(double t, double w_start, double w_end, double center, double width) {
  return w_start + 0.5 * (w_end - w_start) * (1.0 + std::tanh((t - center) / width));
}

// ---------------------------------------------------------------------------
// Matrix exponential by a 50-digit truncated Taylor series.
// ---------------------------------------------------------------------------

using Big = boost::multiprecision::cpp_bin_float_50;

struct BigComplex {
  Big re = 0;
  Big im = 0;
};

inline Eigen::MatrixXcd expm_series(const Eigen::MatrixXcd& a, int terms = 50) {
  const auto n = a.rows();
  using BigMat = std::vector<BigComplex>;
  auto at = [n](BigMat& m, Eigen::Index r, Eigen::Index c) -> BigComplex& { return m[r * n + c]; };
  BigMat A(n * n), term(n * n), sum(n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      at(A, r, c) = {Big(a(r, c).real()), Big(a(r, c).imag())};
      at(term, r, c) = {Big(r == c ? 1 : 0), Big(0)};
      at(sum, r, c) = at(term, r, c);
    }
  }
  for (int k = 1; k <= terms; ++k) {
    BigMat next(n * n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        BigComplex acc;
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto& x = at(term, r, j);
          const auto& y = at(A, j, c);
          acc.re += x.re * y.re - x.im * y.im;
          acc.im += x.re * y.im + x.im * y.re;
        }
        acc.re /= k;
        acc.im /= k;
        at(next, r, c) = acc;
        at(sum, r, c).re += acc.re;
        at(sum, r, c).im += acc.im;
      }
    }
    term = std::move(next);
  }
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      out(r, c) = {static_cast<double>(at(sum, r, c).re), static_cast<double>(at(sum, r, c).im)};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase matrix by tensor-product quadrature over the coherent-state plane:
//   (1/pi) int_0^inf dr int_{-pi}^{pi} dtheta  r theta <m|alpha><alpha|n>
// with <m|alpha><alpha|n> = e^{-r^2} r^{m+n} e^{i(m-n)theta} / sqrt(m! n!).
// Radial part by exp-sinh, angular part by 30-point Gauss on sub-intervals.
// ---------------------------------------------------------------------------

inline std::complex<double> phase_element(std::size_t m, std::size_t n, bool with_inv_pi = true) {
  const double power = static_cast<double>(m + n + 1);
  const double log_norm = 0.5 * (std::lgamma(static_cast<double>(m) + 1.0) + std::lgamma(static_cast<double>(n) + 1.0));
  boost::math::quadrature::exp_sinh<double> radial_rule;
  const double radial = radial_rule.integrate(
      [&](double r) { return r <= 0.0 ? 0.0 : std::exp(-r * r + power * std::log(r) - log_norm); }, 1e-14);

  const double k = static_cast<double>(m) - static_cast<double>(n);
  const std::size_t pieces = 4 + 2 * static_cast<std::size_t>(std::abs(k));
  const double width = 2.0 * std::numbers::pi / static_cast<double>(pieces);
  std::complex<double> angular = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = -std::numbers::pi + width * static_cast<double>(i);
    angular += boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double th) { return std::complex<double>(th * std::cos(k * th), th * std::sin(k * th)); }, a, a + width);
  }
  const std::complex<double> value = radial * angular;
  return with_inv_pi ? value / std::numbers::pi : value;
}

}  // namespace oracle
