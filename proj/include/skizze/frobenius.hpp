#pragma once

// Semisimple Frobenius structure on the space of polynomials
// z^{n+1} + a_1 z^{n-1} + ... + a_n: canonical coordinates u^i = P(rho_i),
// flat metric g = sum (du^i)^2 / P''(rho_i), potential eta = a_1/(n+1).

#include <numeric>
#include <vector>

#include "skizze/poly.hpp"

namespace skizze::frobenius {

struct CanonicalCoordinates {
  std::vector<Complex> rho;  // critical points, lexicographic by (re, im)
  std::vector<Complex> u;    // u^i = P(rho_i)
};

struct MetricData {
  std::vector<Complex> g;  // diagonal entries g_ii = 1 / P''(rho_i)
  Complex eta;
};

/// Profile of the cell e(m_1..m_k): k lines, m_i critical points on line i,
/// j_i distinct collision sets on line i.
struct CellProfile {
  int n = 0;
  std::vector<int> m;
  std::vector<int> j;
};

/// Elementary symmetric polynomials sigma_0..sigma_n of the given points.
inline std::vector<Complex> elementary_symmetric(std::span<const Complex> x) {
  std::vector<Complex> s(x.size() + 1, Complex(0.0));
  s[0] = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t i = k + 1; i > 0; --i) s[i] += x[k] * s[i - 1];
  return s;
}

/// Degree n+1 polynomial with P' = (n+1) prod (z - rho_i) and constant term
/// `constant`, via a_i = (-1)^{i+1} (n+1)/(n-i) sigma_{i+1}(rho).
inline Polynomial coeffs_from_crit(std::span<const Complex> rho, Complex constant) {
  const int n = static_cast<int>(rho.size());
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one critical point");
  double scale = 1.0;
  for (auto r : rho) scale = std::max(scale, std::abs(r));
  Complex sum = std::accumulate(rho.begin(), rho.end(), Complex(0.0));
  if (std::abs(sum) > 1e-9 * scale)
    throw Error(ErrorKind::InvalidArgument, "critical points must sum to zero");
  auto sigma = elementary_symmetric(rho);
  std::vector<Complex> c(static_cast<std::size_t>(n + 2), Complex(0.0));
  c[0] = 1.0;  // z^{n+1}
  // c[k] holds the coefficient of z^{n+1-k}; a_i multiplies z^{n-i}, i.e. c[i+1].
  for (int i = 1; i <= n - 1; ++i) {
    double sign = (i % 2 == 1) ? 1.0 : -1.0;  // (-1)^{i+1}
    c[static_cast<std::size_t>(i + 1)] =
        sign * double(n + 1) / double(n - i) * sigma[static_cast<std::size_t>(i + 1)];
  }
  c[static_cast<std::size_t>(n + 1)] = constant;
  return Polynomial::monic(std::move(c));
}

namespace detail {

inline void require_normalized(const Polynomial& p) {
  if (p.degree() < 2) throw Error(ErrorKind::InvalidArgument, "degree must be at least 2");
  if (!p.is_monic()) throw Error(ErrorKind::InvalidArgument, "polynomial must be monic");
  if (std::abs(p.coeff(p.degree() - 1)) > 1e-9 * p.coefficient_scale())
    throw Error(ErrorKind::InvalidArgument, "z^n coefficient must vanish (critical points sum to zero)");
}

}  // namespace detail

inline CanonicalCoordinates canonical_coords(const Polynomial& p) {
  detail::require_normalized(p);
  auto cd = critical_data(p);
  const double scale = p.coefficient_scale();
  CanonicalCoordinates out;
  for (const auto& c : cd) {
    if (c.multiplicity > 1)
      throw Error(ErrorKind::DegenerateLocus, "repeated critical point at " + format_complex(c.point));
    out.rho.push_back(c.point);
  }
  std::sort(out.rho.begin(), out.rho.end(), [&](Complex a, Complex b) { return lex_less(a, b, 1e-9 * scale); });
  for (auto r : out.rho) out.u.push_back(p(r));
  Complex sum = std::accumulate(out.rho.begin(), out.rho.end(), Complex(0.0));
  if (std::abs(sum) > 1e-9 * scale)
    throw Error(ErrorKind::NumericFailure, "critical points do not sum to zero");
  return out;
}

inline MetricData flat_metric(const Polynomial& p) {
  CanonicalCoordinates cc;
  try {
    cc = canonical_coords(p);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateLocus) throw Error(ErrorKind::DegenerateMetric, e.what());
    throw;
  }
  Polynomial second = p.derivative().derivative();
  const double scale = p.coefficient_scale();
  MetricData out;
  for (auto r : cc.rho) {
    Complex d2 = second(r);
    if (std::abs(d2) < 1e-12 * scale)
      throw Error(ErrorKind::DegenerateMetric, "P'' vanishes at critical point " + format_complex(r));
    out.g.push_back(1.0 / d2);
  }
  const int n = p.degree() - 1;
  out.eta = p.coeff(n - 1) / double(n + 1);
  return out;
}

inline int cell_dimension(const CellProfile& prof) {
  const std::size_t k = prof.m.size();
  if (k == 0 || prof.j.size() != k)
    throw Error(ErrorKind::InvalidArgument, "profile needs k >= 1 lines with matching m and j");
  int total = 0, q = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (prof.m[i] < 1) throw Error(ErrorKind::InvalidArgument, "m_i must be positive");
    if (prof.j[i] < 1 || prof.j[i] > prof.m[i]) throw Error(ErrorKind::InvalidArgument, "need 1 <= j_i <= m_i");
    total += prof.m[i];
    q += prof.j[i];
  }
  if (total != prof.n - 1) throw Error(ErrorKind::InvalidArgument, "m_i must sum to n-1");
  return q + static_cast<int>(k);
}

}  // namespace skizze::frobenius
