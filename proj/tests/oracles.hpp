#pragma once

// Independent reference computations used by the unit and acceptance suites.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "skizze/poly.hpp"

namespace skizze::oracle {

inline std::vector<Complex> random_points(std::mt19937& rng, int n, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Complex> out;
  for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng));
  return out;
}

inline std::vector<Complex> random_zero_sum(std::mt19937& rng, int n, double spread = 1.5) {
  auto x = random_points(rng, n, spread);
  Complex mean = 0.0;
  for (auto z : x) mean += z;
  mean /= double(n);
  for (auto& z : x) z -= mean;
  return x;
}

/// Coefficients (descending) of the antiderivative of (n+1) prod (z - rho_i)
/// with the given constant, by multiplying out the product and integrating
/// term by term.
inline std::vector<Complex> integrate_product(const std::vector<Complex>& rho, Complex constant) {
  std::vector<Complex> prod{Complex(1.0)};
  for (auto r : rho) {
    std::vector<Complex> next(prod.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < prod.size(); ++i) {
      next[i] += prod[i];
      next[i + 1] -= r * prod[i];
    }
    prod = next;
  }
  const std::size_t n = rho.size();
  std::vector<Complex> out(n + 2);
  for (std::size_t i = 0; i < prod.size(); ++i) {
    std::size_t power = n - i;  // of z in prod
    out[i] = double(n + 1) * prod[i] / double(power + 1);
  }
  out[n + 1] = constant;
  return out;
}

/// Newton on P' from a starting point.
inline Complex newton_critical(const Polynomial& p, Complex z) {
  Polynomial d1 = p.derivative(), d2 = d1.derivative();
  for (int it = 0; it < 60; ++it) {
    Complex step = d1(z) / d2(z);
    z -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

/// d eta / d u^i by central differences in the a-coefficient chart of
/// P = z^{n+1} + a_1 z^{n-1} + ... + a_n, critical points followed by Newton.
inline std::vector<Complex> potential_gradient_fd(const Polynomial& p, const std::vector<Complex>& rho) {
  const int deg = p.degree();
  const int n = deg - 1;
  Eigen::MatrixXcd jac(n, n);
  for (int j = 1; j <= n; ++j) {
    std::size_t idx = static_cast<std::size_t>(j + 1);
    Complex aj = p.coeffs()[idx];
    double h = 1.4901161193847656e-8 * std::max(1.0, std::abs(aj));
    auto shifted = [&](double s) {
      auto c = p.coeffs();
      c[idx] += s;
      Polynomial q(c);
      std::vector<Complex> u;
      for (auto r : rho) u.push_back(q(newton_critical(q, r)));
      return u;
    };
    auto up = shifted(h), dn = shifted(-h);
    for (int i = 0; i < n; ++i) jac(i, j - 1) = (up[static_cast<std::size_t>(i)] - dn[static_cast<std::size_t>(i)]) / (2.0 * h);
  }
  Eigen::MatrixXcd inv = jac.inverse();  // d a_j / d u^i
  std::vector<Complex> out;
  for (int i = 0; i < n; ++i) out.push_back(inv(0, i) / double(n + 1));
  return out;
}

}  // namespace skizze::oracle
