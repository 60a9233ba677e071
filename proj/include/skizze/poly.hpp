#pragma once

// Complex polynomial arithmetic: construction from roots, simultaneous root
// finding, critical points and values, containment radii, text format.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "skizze/error.hpp"

namespace skizze {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Lexicographic (re, im) order with a tolerance on the real part.
inline bool lex_less(Complex a, Complex b, double tol = 0.0) {
  if (std::abs(a.real() - b.real()) > tol) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Polynomial with complex coefficients stored from the leading term down to
/// the constant. Points of the configuration space are monic; derivatives and
/// intermediate products need not be.
class Polynomial {
 public:
  Polynomial() : c_{Complex(1.0)} {}
  explicit Polynomial(std::vector<Complex> descending) : c_(std::move(descending)) {
    if (c_.empty()) throw Error(ErrorKind::InvalidArgument, "polynomial with no coefficients");
    for (auto z : c_)
      if (!is_finite(z)) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
  }

  static Polynomial monic(std::vector<Complex> descending) {
    Polynomial p(std::move(descending));
    if (p.c_.size() < 2) throw Error(ErrorKind::InvalidArgument, "degree must be at least 1");
    if (p.c_.front() != Complex(1.0))
      throw Error(ErrorKind::InvalidArgument, "leading coefficient must be exactly 1");
    return p;
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<Complex>& coeffs() const { return c_; }
  Complex leading() const { return c_.front(); }
  bool is_monic() const { return c_.front() == Complex(1.0); }

  /// Coefficient of z^k.
  Complex coeff(int k) const {
    if (k < 0 || k > degree()) return 0.0;
    return c_[static_cast<std::size_t>(degree() - k)];
  }

  Complex operator()(Complex z) const {
    Complex acc = 0.0;
    for (auto c : c_) acc = acc * z + c;
    return acc;
  }

  /// Value and first derivative by one Horner sweep.
  std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
    Complex p = 0.0, dp = 0.0;
    for (auto c : c_) {
      dp = dp * z + p;
      p = p * z + c;
    }
    return {p, dp};
  }

  /// Running error bound for Horner evaluation at z.
  double eval_error_bound(Complex z) const {
    double r = std::abs(z), acc = 0.0;
    for (auto c : c_) acc = acc * r + std::abs(c);
    return 4.0 * (degree() + 1) * std::numeric_limits<double>::epsilon() * acc;
  }

  Polynomial derivative() const {
    int n = degree();
    if (n == 0) return Polynomial({Complex(0.0)});
    std::vector<Complex> d;
    d.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d.push_back(c_[static_cast<std::size_t>(i)] * double(n - i));
    return Polynomial(std::move(d));
  }

  /// Coefficients of P(z0 + w) in powers of w, ascending: entry k is P^(k)(z0)/k!.
  std::vector<Complex> taylor(Complex z0) const {
    std::vector<Complex> work = c_;
    int n = degree();
    std::vector<Complex> out(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
      Complex acc = 0.0;
      for (int i = 0; i <= n - k; ++i) {
        acc = acc * z0 + work[static_cast<std::size_t>(i)];
        work[static_cast<std::size_t>(i)] = acc;
      }
      out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
  }

  /// Divide by the leading coefficient.
  Polynomial normalized() const {
    std::vector<Complex> d = c_;
    Complex lc = c_.front();
    if (lc == Complex(0.0)) throw Error(ErrorKind::InvalidArgument, "zero leading coefficient");
    for (auto& z : d) z /= lc;
    d.front() = 1.0;
    return Polynomial(std::move(d));
  }

  /// 1 + max |c_i| over non-leading coefficients of the monic normalization.
  double coefficient_scale() const {
    double m = 0.0;
    for (std::size_t i = 1; i < c_.size(); ++i) m = std::max(m, std::abs(c_[i] / c_.front()));
    return 1.0 + m;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> r(a.c_.size() + b.c_.size() - 1, Complex(0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  std::vector<Complex> c_;
};

inline Polynomial from_roots(std::span<const Complex> roots) {
  if (roots.empty()) throw Error(ErrorKind::InvalidArgument, "from_roots needs at least one root");
  std::vector<Complex> c{Complex(1.0)};
  for (Complex r : roots) {
    c.push_back(0.0);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
  }
  return Polynomial::monic(std::move(c));
}

/// Synthetic division by (z - r). The remainder is discarded.
inline Polynomial deflate(const Polynomial& p, Complex r) {
  if (p.degree() < 1) throw Error(ErrorKind::InvalidArgument, "cannot deflate a constant");
  const auto& c = p.coeffs();
  std::vector<Complex> q(c.size() - 1);
  Complex acc = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    acc = acc * r + c[i];
    q[i] = acc;
  }
  return Polynomial(std::move(q));
}

/// Cauchy-type bound for the roots of a polynomial: 1 + max |c_i / c_n|.
inline double cauchy_bound(const Polynomial& p) { return p.coefficient_scale(); }

/// Fujiwara bound 2 max(|c_1|, |c_2|^{1/2}, ..., |c_n / 2|^{1/n}) of a
/// normalized polynomial; scales with the roots, unlike the Cauchy bound.
inline double fujiwara_bound(const Polynomial& p) {
  const int n = p.degree();
  const auto& c = p.coeffs();
  double b = 0.0;
  for (int i = 1; i <= n; ++i) {
    double a = std::abs(c[static_cast<std::size_t>(i)] / c[0]);
    if (i == n) a *= 0.5;
    b = std::max(b, std::pow(a, 1.0 / i));
  }
  return 2.0 * b;
}

/// Trace radius: all roots of P and of P' lie strictly inside |z| = R.
/// Uses the smaller of the Cauchy and Fujiwara bounds; 1.5 when P = z^n.
inline double root_bound(const Polynomial& p) {
  auto bound = [](const Polynomial& q) { return q.degree() < 1 ? 0.0 : std::min(cauchy_bound(q), fujiwara_bound(q)); };
  double b = bound(p);
  if (p.degree() >= 2) b = std::max(b, bound(p.derivative()));
  if (b == 0.0) b = 1.0;
  return 1.5 * b;
}

struct Root {
  Complex point;
  int multiplicity = 1;
};

using RootSet = std::vector<Root>;

struct CriticalPoint {
  Complex point;
  Complex value;
  int multiplicity = 1;
};

using CriticalData = std::vector<CriticalPoint>;

/// Numeric failure carrying the best available iterate.
class RootFindingFailure : public Error {
 public:
  RootFindingFailure(const std::string& what, std::vector<Complex> best)
      : Error(ErrorKind::NumericFailure, what), best_(std::move(best)) {}
  const std::vector<Complex>& best_iterate() const { return best_; }

 private:
  std::vector<Complex> best_;
};

struct RootOptions {
  double tol = 1e-9;
  /// Clustering radius; negative selects 1e-6 * root_bound(P).
  double cluster_radius = -1.0;
  int max_iterations = 500;
};

namespace detail {

// Aberth-Ehrlich simultaneous iteration from a deterministic circle.
inline std::vector<Complex> aberth(const Polynomial& monic_p, int max_iterations, bool& converged) {
  const int n = monic_p.degree();
  const double radius = root_bound(monic_p);
  const double scale = radius;  // size of the roots, for step thresholds
  std::vector<Complex> z(static_cast<std::size_t>(n));
  constexpr double kPi = 3.14159265358979323846;
  for (int k = 0; k < n; ++k)
    z[static_cast<std::size_t>(k)] = std::polar(radius, 2.0 * kPi * k / n + 0.4);
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  converged = false;
  for (int it = 0; it < max_iterations; ++it) {
    double max_step = 0.0;
    bool all_done = true;
    for (int k = 0; k < n; ++k) {
      auto ku = static_cast<std::size_t>(k);
      if (done[ku]) continue;
      auto [p, dp] = monic_p.eval_with_derivative(z[ku]);
      if (std::abs(p) <= monic_p.eval_error_bound(z[ku])) {
        done[ku] = true;
        continue;
      }
      all_done = false;
      Complex s = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != k) {
          Complex d = z[ku] - z[static_cast<std::size_t>(j)];
          if (d != Complex(0.0)) s += 1.0 / d;
        }
      Complex w = dp == Complex(0.0) ? Complex(1e-3 * scale) : p / dp;
      Complex denom = 1.0 - w * s;
      Complex step = denom == Complex(0.0) ? w : w / denom;
      z[ku] -= step;
      max_step = std::max(max_step, std::abs(step));
      if (std::abs(step) < 1e-14 * scale) done[ku] = true;
    }
    if (all_done || max_step < 1e-14 * scale) {
      converged = true;
      break;
    }
  }
  return z;
}

// Merge approximations into clusters: tight single linkage at `radius`, and
// looser groups whose spread is explained by rounding at a multiple root.
inline RootSet cluster_roots(const Polynomial& monic_p, std::vector<Complex> z, double radius) {
  const std::size_t n = z.size();
  const double loose = std::max(radius, 1e-3 * root_bound(monic_p));
  auto components = [&](double r) {
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (comp[i] >= 0) continue;
      std::vector<std::size_t> stack{i};
      comp[i] = next;
      while (!stack.empty()) {
        std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < n; ++b)
          if (comp[b] < 0 && std::abs(z[a] - z[b]) <= r) {
            comp[b] = next;
            stack.push_back(b);
          }
      }
      ++next;
    }
    return std::pair{comp, next};
  };

  RootSet out;
  auto [loose_comp, loose_count] = components(loose);
  auto [tight_comp, tight_count] = components(radius);
  std::vector<bool> taken(n, false);
  for (int g = 0; g < loose_count; ++g) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (loose_comp[i] == g) members.push_back(i);
    const int k = static_cast<int>(members.size());
    if (k >= 2) {
      Complex c = 0.0;
      for (auto i : members) c += z[i];
      c /= double(k);
      double spread = 0.0;
      for (auto i : members) spread = std::max(spread, std::abs(z[i] - c));
      auto t = monic_p.taylor(c);
      double ak = std::abs(t[static_cast<std::size_t>(k)]);
      double rounding = monic_p.eval_error_bound(c) * 4.0;
      double explained = ak > 0.0 ? 4.0 * std::pow(rounding / ak, 1.0 / k) : 0.0;
      if (spread <= std::max(explained, radius)) {
        // a k-fold root is a simple root of P^(k-1)
        Polynomial d = monic_p;
        for (int j = 0; j < k - 1; ++j) d = d.derivative();
        Polynomial dd = d.derivative();
        for (int it = 0; it < 3; ++it) {
          Complex den = dd(c);
          if (den == Complex(0.0)) break;
          Complex step = d(c) / den;
          if (std::abs(step) > spread + radius) break;
          c -= step;
        }
        out.push_back({c, k});
        for (auto i : members) taken[i] = true;
        continue;
      }
    }
  }
  for (int g = 0; g < tight_count; ++g) {
    Complex c = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (tight_comp[i] == g && !taken[i]) {
        c += z[i];
        ++k;
      }
    if (k > 0) out.push_back({c / double(k), k});
  }
  std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) { return lex_less(a.point, b.point); });
  return out;
}

}  // namespace detail

/// All roots with multiplicity. Works on the monic normalization of `p`.
inline RootSet find_roots(const Polynomial& p, const RootOptions& opt = {}) {
  if (p.degree() < 1) throw Error(ErrorKind::InvalidArgument, "find_roots needs degree >= 1");
  Polynomial mp = p.normalized();
  const double scale = mp.coefficient_scale();
  if (mp.degree() == 1) return {{-mp.coeffs()[1], 1}};
  bool converged = false;
  auto z = detail::aberth(mp, opt.max_iterations, converged);
  double radius = opt.cluster_radius > 0.0 ? opt.cluster_radius : 1e-6 * root_bound(mp);
  RootSet roots = detail::cluster_roots(mp, z, radius);
  for (const auto& r : roots) {
    // an explicitly requested cluster of distinct roots does not vanish at its center
    if (r.multiplicity > 1 && opt.cluster_radius > 0.0) continue;
    if (std::abs(mp(r.point)) > opt.tol * scale) {
      if (!converged)
        throw RootFindingFailure("root iteration did not converge within the iteration cap", z);
      throw RootFindingFailure("root residual above tolerance", z);
    }
  }
  return roots;
}

/// Roots of P' with the values of P there. Empty for degree 1.
inline CriticalData critical_data(const Polynomial& p, const RootOptions& opt = {}) {
  if (p.degree() < 2) return {};
  Polynomial dp = p.derivative().normalized();
  RootOptions o = opt;
  if (o.cluster_radius <= 0.0) o.cluster_radius = 1e-6 * root_bound(p);
  CriticalData out;
  for (const auto& r : find_roots(dp, o)) out.push_back({r.point, p(r.point), r.multiplicity});
  return out;
}

/// Discriminant of a monic-normalized polynomial up to a nonzero constant
/// factor, computed as the Sylvester resultant of P and P'.
inline Complex discriminant(const Polynomial& p) {
  Polynomial mp = p.normalized();
  const int n = mp.degree();
  if (n < 2) return 1.0;
  Polynomial dp = mp.derivative();
  const int m = n - 1;
  const int size = n + m;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(size, size);
  for (int r = 0; r < m; ++r)
    for (int j = 0; j <= n; ++j) s(r, r + j) = mp.coeffs()[static_cast<std::size_t>(j)];
  for (int r = 0; r < n; ++r)
    for (int j = 0; j <= m; ++j) s(m + r, r + j) = dp.coeffs()[static_cast<std::size_t>(j)];
  return s.partialPivLu().determinant();
}

// --- text format: "re:im" pairs from leading to constant, comma separated ---

inline std::string format_real(double x) {
  if (x == 0.0) x = 0.0;  // no "-0"
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string format_complex(Complex z) { return format_real(z.real()) + ":" + format_real(z.imag()); }

inline Complex parse_complex(std::string_view s) {
  auto colon = s.find(':');
  auto num = [&](std::string_view t) {
    std::string str(t);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "bad number '" + str + "'");
    }
    if (used != str.size()) throw Error(ErrorKind::ParseError, "bad number '" + str + "'");
    return v;
  };
  if (colon == std::string_view::npos) throw Error(ErrorKind::ParseError, "expected re:im, got '" + std::string(s) + "'");
  return {num(s.substr(0, colon)), num(s.substr(colon + 1))};
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline Polynomial parse_polynomial(std::string_view text) {
  std::vector<Complex> c;
  for (auto part : split(trim(text), ',')) c.push_back(parse_complex(trim(part)));
  if (c.size() < 2) throw Error(ErrorKind::ParseError, "polynomial needs degree >= 1");
  if (c.front() != Complex(1.0)) throw Error(ErrorKind::ParseError, "leading pair must be 1:0");
  return Polynomial::monic(std::move(c));
}

inline std::string format_polynomial(const Polynomial& p) {
  std::string out;
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
    if (i) out += ',';
    out += format_complex(p.coeffs()[i]);
  }
  return out;
}

}  // namespace skizze
