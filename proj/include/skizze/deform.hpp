#pragma once

// Deformation of the skizze along a path P(z, t), t in [0, 1]: wall events
// located on event functions (critical values crossing an axis, collisions),
// stratum timelines, and level-set front advection with normal velocity.

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "skizze/error.hpp"
#include "skizze/gauss_graph.hpp"
#include "skizze/moves.hpp"
#include "skizze/poly.hpp"
#include "skizze/tracer.hpp"

namespace skizze {

enum class PathMode { Coefficient, Root, Custom };

inline std::string_view to_string(PathMode m) {
  switch (m) {
    case PathMode::Coefficient: return "coeff";
    case PathMode::Root: return "root";
    case PathMode::Custom: return "custom";
  }
  return "?";
}

inline std::vector<Complex> expand_roots(const RootSet& rs) {
  std::vector<Complex> out;
  for (const auto& r : rs)
    for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.point);
  return out;
}

namespace detail {

// Greedy nearest matching: cur is permuted so cur[i] continues prev[i].
inline std::vector<Complex> match_points(const std::vector<Complex>& prev, std::vector<Complex> cur) {
  const std::size_t n = prev.size();
  if (cur.size() != n || n == 0) return cur;
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(std::abs(prev[i] - cur[j]), i, j);
  std::sort(pairs.begin(), pairs.end());
  std::vector<Complex> out(n);
  std::vector<bool> ui(n, false), uj(n, false);
  for (auto [d, i, j] : pairs) {
    if (ui[i] || uj[j]) continue;
    ui[i] = uj[j] = true;
    out[i] = cur[j];
  }
  return out;
}

// Exact minimum-cost assignment for the small degrees we trace; greedy above 8.
inline std::vector<Complex> assign_points(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() > 8) return match_points(a, b);
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  std::vector<std::size_t> arg = perm;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[perm[i]]);
    if (s < best) {
      best = s;
      arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<Complex> out;
  for (auto j : arg) out.push_back(b[j]);
  return out;
}

}  // namespace detail

/// Monic path of fixed degree. Coefficient mode interpolates coefficients,
/// root mode interpolates matched roots, custom mode takes coefficient and
/// t-derivative functions (descending, leading 1 and 0).
class CoeffPath {
 public:
  using CoeffFn = std::function<std::vector<Complex>(double)>;

  static CoeffPath linear(const Polynomial& p0, const Polynomial& p1) {
    check_ends(p0, p1);
    CoeffPath c;
    c.mode_ = PathMode::Coefficient;
    c.p0_ = p0;
    c.p1_ = p1;
    return c;
  }

  static CoeffPath root_linear(std::vector<Complex> r0, std::vector<Complex> r1) {
    if (r0.empty() || r0.size() != r1.size())
      throw Error(ErrorKind::InvalidArgument, "root path needs equally many roots at both ends");
    CoeffPath c;
    c.mode_ = PathMode::Root;
    c.r0_ = std::move(r0);
    c.r1_ = std::move(r1);
    c.p0_ = from_roots(c.r0_);
    c.p1_ = from_roots(c.r1_);
    return c;
  }

  /// Roots of both ends, matched by minimum total squared displacement.
  static CoeffPath root_linear(const Polynomial& p0, const Polynomial& p1) {
    check_ends(p0, p1);
    auto a = expand_roots(find_roots(p0));
    auto b = detail::assign_points(a, expand_roots(find_roots(p1)));
    auto c = root_linear(a, b);
    c.p0_ = p0;
    c.p1_ = p1;
    return c;
  }

  static CoeffPath custom(int n, CoeffFn coeffs, CoeffFn dcoeffs) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "path degree must be at least 1");
    CoeffPath c;
    c.mode_ = PathMode::Custom;
    c.n_ = n;
    c.f_ = std::move(coeffs);
    c.df_ = std::move(dcoeffs);
    c.p0_ = c.at(0.0);
    c.p1_ = c.at(1.0);
    return c;
  }

  PathMode mode() const { return mode_; }
  int degree() const { return mode_ == PathMode::Custom ? n_ : p0_.degree(); }
  const Polynomial& start() const { return p0_; }
  const Polynomial& end() const { return p1_; }

  Polynomial at(double t) const {
    switch (mode_) {
      case PathMode::Coefficient: {
        if (t == 0.0) return p0_;
        if (t == 1.0) return p1_;
        std::vector<Complex> c(p0_.coeffs().size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = (1.0 - t) * p0_.coeffs()[i] + t * p1_.coeffs()[i];
        c.front() = 1.0;
        return Polynomial::monic(std::move(c));
      }
      case PathMode::Root: {
        if (t == 0.0) return p0_;
        if (t == 1.0) return p1_;
        return from_roots(roots_at(t));
      }
      case PathMode::Custom: {
        auto c = f_(t);
        if (static_cast<int>(c.size()) != n_ + 1) throw Error(ErrorKind::InvalidArgument, "custom path returned wrong degree");
        c.front() = 1.0;
        return Polynomial::monic(std::move(c));
      }
    }
    return p0_;
  }

  /// dP/dt as a polynomial in z of degree < n (stored with a zero leading term).
  Polynomial dt(double t) const {
    const int n = degree();
    std::vector<Complex> d(static_cast<std::size_t>(n + 1), Complex(0.0));
    switch (mode_) {
      case PathMode::Coefficient:
        for (std::size_t i = 1; i < d.size(); ++i) d[i] = p1_.coeffs()[i] - p0_.coeffs()[i];
        break;
      case PathMode::Root: {
        auto r = roots_at(t);
        // d/dt prod (z - r_k) = -sum_j r_j' prod_{k != j} (z - r_k)
        for (std::size_t j = 0; j < r.size(); ++j) {
          std::vector<Complex> others;
          for (std::size_t k = 0; k < r.size(); ++k)
            if (k != j) others.push_back(r[k]);
          Polynomial q = from_roots(others);
          Complex rate = r1_[j] - r0_[j];
          for (std::size_t i = 0; i < q.coeffs().size(); ++i) d[i + 1] -= rate * q.coeffs()[i];
        }
        break;
      }
      case PathMode::Custom: {
        auto c = df_(t);
        if (c.size() != d.size()) throw Error(ErrorKind::InvalidArgument, "custom path derivative has wrong degree");
        d = std::move(c);
        d.front() = 0.0;
        break;
      }
    }
    return Polynomial(std::move(d));
  }

  std::vector<Complex> roots_at(double t) const {
    std::vector<Complex> r(r0_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = (1.0 - t) * r0_[i] + t * r1_[i];
    return r;
  }

 private:
  static void check_ends(const Polynomial& p0, const Polynomial& p1) {
    if (!p0.is_monic() || !p1.is_monic()) throw Error(ErrorKind::InvalidArgument, "path endpoints must be monic");
    if (p0.degree() != p1.degree()) throw Error(ErrorKind::InvalidArgument, "path endpoints differ in degree");
  }

  PathMode mode_ = PathMode::Coefficient;
  Polynomial p0_ = Polynomial::monic({1.0, 0.0});
  Polynomial p1_ = Polynomial::monic({1.0, 0.0});
  std::vector<Complex> r0_, r1_;
  int n_ = 0;
  CoeffFn f_, df_;
};

// ---------------------------------------------------------------- walls ---

enum class WallKind { CriticalValueReal, CriticalValueImaginary, RootCollision, CriticalPointCollision };

inline std::string_view to_string(WallKind k) {
  switch (k) {
    case WallKind::CriticalValueReal: return "critical-value-real";
    case WallKind::CriticalValueImaginary: return "critical-value-imaginary";
    case WallKind::RootCollision: return "root-collision";
    case WallKind::CriticalPointCollision: return "critical-point-collision";
  }
  return "?";
}

inline WallKind parse_wall_kind(std::string_view s) {
  for (auto k : {WallKind::CriticalValueReal, WallKind::CriticalValueImaginary, WallKind::RootCollision,
                 WallKind::CriticalPointCollision})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::ParseError, "unknown wall kind '" + std::string(s) + "'");
}

struct WallEvent {
  double t = 0.0;
  WallKind kind = WallKind::CriticalValueReal;
  std::vector<int> indices;  // critical point index, or the colliding roots / critical points
  CanonicalCode wall_code;   // empty when the wall could not be classified
};

struct DeformOptions {
  double tol_t = 1e-10;
  int samples = 256;
  int refinements = 3;       // grid doublings allowed while event counts disagree
  double zero_tol = 1e-11;   // event function ~0, relative to the size of the terms of P
  bool classify_walls = true;
  TraceConfig trace;
  bool parallel = true;
};

struct WallScan {
  std::vector<WallEvent> events;
  std::vector<std::string> warnings;
  int samples = 0;           // grid actually used
  int unresolved_cells = 0;  // cells whose end values cannot rule out a hidden pair of crossings
};

namespace detail {

struct PathSample {
  double t = 0.0;
  std::vector<Complex> roots, crit, values, rates;  // rates: d/dt of each critical value
  std::vector<double> terms;  // size of the terms of P at each critical point
  double disc = 0.0, disc_d = 0.0;
  double scale = 1.0;  // coefficient scale of P, an absolute floor for the ~0 tests
};

inline double term_size(const Polynomial& p, Complex z) {
  double r = std::abs(z), acc = 0.0;
  for (auto c : p.coeffs()) acc = acc * r + std::abs(c);
  return acc;
}

inline PathSample raw_sample(const CoeffPath& path, double t) {
  PathSample s;
  s.t = t;
  Polynomial p = path.at(t);
  s.roots = expand_roots(find_roots(p));
  s.disc = std::abs(discriminant(p));
  if (p.degree() >= 2) {
    Polynomial dp = p.derivative().normalized();
    s.crit = expand_roots(find_roots(dp));
    s.disc_d = dp.degree() >= 2 ? std::abs(discriminant(dp)) : 1.0;
  }
  return s;
}

inline void finish_sample(const CoeffPath& path, PathSample& s) {
  Polynomial p = path.at(s.t);
  Polynomial pt = path.dt(s.t);
  s.scale = p.coefficient_scale();
  s.values.clear();
  s.rates.clear();
  s.terms.clear();
  for (auto z : s.crit) {
    s.values.push_back(p(z));
    s.rates.push_back(pt(z));  // P'(rho) = 0, so du/dt = dP/dt at rho
    s.terms.push_back(term_size(p, z));
  }
}

inline std::vector<PathSample> sample_path(const CoeffPath& path, int N, bool parallel) {
  std::vector<PathSample> s(static_cast<std::size_t>(N + 1));
  auto work = [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) s[static_cast<std::size_t>(k)] = raw_sample(path, double(k) / N);
  };
  unsigned hw = parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
  int chunks = static_cast<int>(std::min<unsigned>(hw, 16u));
  std::vector<std::future<void>> jobs;
  for (int c = 0; c < chunks; ++c) {
    int lo = (N + 1) * c / chunks, hi = (N + 1) * (c + 1) / chunks;
    if (chunks == 1) work(lo, hi);
    else jobs.push_back(std::async(std::launch::async, work, lo, hi));
  }
  for (auto& j : jobs) j.get();
  for (std::size_t k = 1; k < s.size(); ++k) {
    s[k].roots = match_points(s[k - 1].roots, s[k].roots);
    s[k].crit = match_points(s[k - 1].crit, s[k].crit);
  }
  for (auto& x : s) finish_sample(path, x);
  return s;
}

// Critical point of P(., t) continued from z by Newton on P'.
inline Complex continue_crit(const CoeffPath& path, double t, Complex z) {
  Polynomial p = path.at(t);
  Polynomial dp = p.derivative();
  Polynomial ddp = dp.derivative();
  Complex start = z;
  for (int it = 0; it < 60; ++it) {
    Complex d2 = ddp(z);
    if (std::abs(d2) == 0.0) break;
    Complex step = dp(z) / d2;
    z -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) return z;
  }
  // Newton stalled (nearby critical point): take the nearest fresh root of P'
  auto fresh = expand_roots(find_roots(dp.normalized()));
  return *std::min_element(fresh.begin(), fresh.end(),
                           [&](Complex a, Complex b) { return std::abs(a - start) < std::abs(b - start); });
}

inline double axis_part(Complex v, WallKind k) { return k == WallKind::CriticalValueImaginary ? v.real() : v.imag(); }

// Bisection on Re or Im of critical value i across [a, b].
inline double bisect_value(const CoeffPath& path, WallKind kind, double a, double b, Complex za, double fa, double tol_t) {
  while (b - a > tol_t) {
    double m = 0.5 * (a + b);
    Complex zm = continue_crit(path, m, za);
    double fm = axis_part(path.at(m)(zm), kind);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      za = zm;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Golden-section minimum of |disc| on [a, b]; returns (t*, certified).
inline std::pair<double, bool> locate_collision(const std::function<double(double)>& D, double a, double b, double tol_t) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = D(x1), f2 = D(x2);
  while (b - a > tol_t) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = D(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = D(x2);
    }
  }
  double t = 0.5 * (a + b);
  // |D(t*)| against the local slope: a simple zero gives |t - t_zero|, a
  // zero of order k gives |t - t_zero|^k / delta^(k-1)
  const double delta = 1e-6;
  double slope = std::max(D(std::max(0.0, t - delta)), D(std::min(1.0, t + delta))) / delta;
  double dt = D(t);
  bool certified = dt == 0.0 || (slope > 0.0 && dt / slope <= 10.0 * tol_t);
  return {t, certified};
}

inline std::vector<int> cluster_indices(const std::vector<Complex>& z, double& dmin, double floor) {
  dmin = 1e300;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) dmin = std::min(dmin, std::abs(z[i] - z[j]));
  double r = std::max(4.0 * dmin, floor);
  std::vector<int> out;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z.size(); ++j)
      if (i != j && std::abs(z[i] - z[j]) <= r) {
        out.push_back(static_cast<int>(i));
        break;
      }
  return out;
}

inline std::string fmt_t(double t) {
  std::ostringstream os;
  os.precision(6);
  os << t;
  return os.str();
}

inline WallScan scan_once(const CoeffPath& path, const DeformOptions& opt, int N) {
  WallScan out;
  out.samples = N;
  auto s = sample_path(path, N, opt.parallel);
  const std::size_t nc = s.front().crit.size();

  for (std::size_t i = 0; i < nc; ++i) {
    for (auto kind : {WallKind::CriticalValueImaginary, WallKind::CriticalValueReal}) {
      std::string what = std::string(kind == WallKind::CriticalValueImaginary ? "Re" : "Im") + " of critical value " +
                         std::to_string(i);
      int last = -1, zero_run = 0, run_start = 0;
      auto close_run = [&](int upto) {
        if (zero_run >= 2)
          out.warnings.push_back("persistent-degeneracy: " + what + " ~ 0 on [" + fmt_t(s[std::size_t(run_start)].t) +
                                 ", " + fmt_t(s[std::size_t(upto)].t) + "]");
      };
      for (int k = 0; k <= N; ++k) {
        const auto& sk = s[static_cast<std::size_t>(k)];
        double f = axis_part(sk.values[i], kind);
        if (k > 0) {
          // a slope this steep against small end values could hide two crossings
          const auto& sp = s[static_cast<std::size_t>(k - 1)];
          double fp = axis_part(sp.values[i], kind);
          double slope = std::max(std::abs(axis_part(sk.rates[i], kind)), std::abs(axis_part(sp.rates[i], kind)));
          if (slope * (sk.t - sp.t) > 4.0 * (std::abs(f) + std::abs(fp)) + opt.zero_tol * (sk.terms[i] + 1e-3 * sk.scale))
            ++out.unresolved_cells;
        }
        if (std::abs(f) <= opt.zero_tol * sk.terms[i]) {
          if (zero_run++ == 0) run_start = k;
          continue;
        }
        if (last >= 0) {
          const auto& sl = s[static_cast<std::size_t>(last)];
          double fl = axis_part(sl.values[i], kind);
          if (zero_run >= 2) {
            close_run(k - 1);
          } else if ((f > 0) != (fl > 0)) {
            double t = bisect_value(path, kind, sl.t, sk.t, sl.crit[i], fl, opt.tol_t);
            // a value passing through 0 flips both signs at once: the critical
            // point is then a multiple root, reported as a root collision
            Polynomial pt = path.at(t);
            Complex zt = continue_crit(path, t, sl.crit[i]);
            if (std::abs(pt(zt)) > 1e-7 * term_size(pt, zt)) out.events.push_back({t, kind, {static_cast<int>(i)}, {}});
          } else if (zero_run == 1) {
            out.warnings.push_back("tangential-contact: " + what + " touches 0 at t=" + fmt_t(s[std::size_t(run_start)].t));
          }
        } else if (zero_run > 0) {
          close_run(k - 1);
          out.warnings.push_back("endpoint-not-generic: " + what + " ~ 0 at t=0");
        }
        zero_run = 0;
        last = k;
      }
      if (zero_run > 0) {
        close_run(N);
        out.warnings.push_back("endpoint-not-generic: " + what + " ~ 0 at t=1");
      }
    }
  }

  // collisions: local minima of |disc| certified as zeros
  for (bool of_roots : {true, false}) {
    if (!of_roots && nc < 2) continue;
    auto D = [&](double t) {
      Polynomial p = path.at(t);
      return std::abs(discriminant(of_roots ? p : p.derivative().normalized()));
    };
    auto val = [&](std::size_t k) { return of_roots ? s[k].disc : s[k].disc_d; };
    double dmax = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) dmax = std::max(dmax, val(k));
    int run = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (val(k) <= 1e-12 * dmax) {
        if (++run == 3)
          out.warnings.push_back(std::string("persistent-degeneracy: ") + (of_roots ? "roots" : "critical points") +
                                 " coincide near t=" + fmt_t(s[k].t));
      } else {
        run = 0;
      }
    }
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
      if (!(val(k) <= val(k - 1) && val(k) < val(k + 1))) continue;
      if (val(k) <= 1e-12 * dmax && val(k - 1) <= 1e-12 * dmax) continue;  // inside a persistent run
      auto [t, ok] = locate_collision(D, s[k - 1].t, s[k + 1].t, opt.tol_t);
      if (!ok || t <= 0.0 || t >= 1.0) continue;
      Polynomial p = path.at(t);
      auto& ref = of_roots ? s[k].roots : s[k].crit;
      auto fresh = expand_roots(find_roots(of_roots ? p : p.derivative().normalized()));
      auto pts = match_points(ref, fresh);
      double dmin = 0.0;
      auto idx = cluster_indices(pts, dmin, 1e-6 * root_bound(p));
      out.events.push_back({t, of_roots ? WallKind::RootCollision : WallKind::CriticalPointCollision, idx, {}});
    }
  }

  std::sort(out.events.begin(), out.events.end(), [](const WallEvent& a, const WallEvent& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.indices < b.indices;
  });
  return out;
}

// One classification per group of simultaneous events, with the tracer
// tolerances widened to cover the residual distance from the wall.
inline void classify_walls(const CoeffPath& path, const DeformOptions& opt, WallScan& scan) {
  for (std::size_t a = 0; a < scan.events.size();) {
    std::size_t b = a;
    while (b < scan.events.size() && scan.events[b].t - scan.events[a].t <= 10.0 * opt.tol_t) ++b;
    double t = scan.events[a].t;
    Polynomial p = path.at(t);
    TraceConfig cfg = opt.trace;
    for (std::size_t e = a; e < b; ++e) {
      const auto& ev = scan.events[e];
      if (ev.kind == WallKind::RootCollision) {
        double dmin = 0.0;
        auto pts = expand_roots(find_roots(p));
        cluster_indices(pts, dmin, 0.0);
        cfg.cluster_radius = std::max(cfg.cluster_radius, 4.0 * dmin);
      }
      if (ev.kind == WallKind::CriticalValueReal || ev.kind == WallKind::CriticalValueImaginary) {
        for (const auto& c : critical_data(p)) {
          double terms = term_size(p, c.point);
          double f = std::abs(axis_part(c.value, ev.kind));
          if (f <= 1e-6 * terms) cfg.axis_floor = std::max(cfg.axis_floor, 4.0 * f / terms);
        }
      }
    }
    CanonicalCode code;
    try {
      code = classify(p, cfg).code;
    } catch (const Error& e) {
      scan.warnings.push_back("wall-unclassified at t=" + fmt_t(t) + ": " + e.what());
    }
    for (std::size_t e = a; e < b; ++e) scan.events[e].wall_code = code;
    a = b;
  }
}

}  // namespace detail

/// Wall events along the path, each localized to tol_t. The grid is doubled
/// until two consecutive grids agree on the event count.
inline WallScan track_walls(const CoeffPath& path, const DeformOptions& opt = {}) {
  if (opt.samples < 2 || opt.tol_t <= 0.0) throw Error(ErrorKind::InvalidArgument, "need samples >= 2 and tol_t > 0");
  int N = opt.samples;
  WallScan prev = detail::scan_once(path, opt, N);
  for (int r = 0; r <= opt.refinements; ++r) {
    WallScan next = detail::scan_once(path, opt, 2 * N);
    bool same = prev.unresolved_cells == 0 && next.events.size() == prev.events.size();
    for (std::size_t i = 0; same && i < next.events.size(); ++i)
      same = next.events[i].kind == prev.events[i].kind && std::abs(next.events[i].t - prev.events[i].t) <= 10.0 * opt.tol_t;
    if (same) {
      if (opt.classify_walls) detail::classify_walls(path, opt, prev);
      return prev;
    }
    prev = std::move(next);
    N *= 2;
  }
  throw Error(ErrorKind::UnresolvedCluster,
              "event list still changing at " + std::to_string(N) + " samples; events closer than the grid");
}

// ------------------------------------------------------------- timeline ---

struct Segment {
  double t0 = 0.0, t1 = 1.0;
  CanonicalCode code;
};

struct OrderCheck {
  bool checked = false;
  bool before_ok = false;  // segment before the wall is below (or equal to) the wall code
  bool after_ok = false;
};

struct Timeline {
  int n = 0;
  std::vector<WallEvent> events;
  std::vector<Segment> segments;
  std::vector<OrderCheck> order;  // per event
  std::vector<std::string> warnings;
};

struct TimelineOptions {
  DeformOptions deform;
  int poset_cap = 3;  // order checks against build_poset for n <= cap
};

/// Segments between walls, labeled by classification at their midpoints;
/// neighboring segments with one code are merged (trivial crossings).
inline Timeline stratum_timeline(const CoeffPath& path, const TimelineOptions& opt = {}) {
  Timeline tl;
  tl.n = path.degree();
  auto scan = track_walls(path, opt.deform);
  tl.events = scan.events;
  tl.warnings = scan.warnings;

  std::vector<double> cuts{0.0};
  for (const auto& e : tl.events)
    if (e.t - cuts.back() > 10.0 * opt.deform.tol_t) cuts.push_back(e.t);
  cuts.push_back(1.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    auto code = classify(path.at(mid), opt.deform.trace).code;
    if (!tl.segments.empty() && tl.segments.back().code == code) tl.segments.back().t1 = cuts[i + 1];
    else tl.segments.push_back({cuts[i], cuts[i + 1], code});
  }

  tl.order.assign(tl.events.size(), {});
  if (tl.n <= opt.poset_cap && !tl.events.empty()) {
    Poset poset = build_poset(tl.n);
    auto code_at = [&](double t) -> const CanonicalCode& {
      for (const auto& s : tl.segments)
        if (t >= s.t0 && t <= s.t1) return s.code;
      return tl.segments.back().code;
    };
    auto below_or_equal = [&](const CanonicalCode& a, const CanonicalCode& w) {
      return a == w || (poset.nodes.count(a) && poset.nodes.count(w) && poset.below(a, w));
    };
    for (std::size_t i = 0; i < tl.events.size(); ++i) {
      const auto& e = tl.events[i];
      if (e.wall_code.empty()) continue;
      double eps = 20.0 * opt.deform.tol_t;
      tl.order[i] = {true, below_or_equal(code_at(std::max(0.0, e.t - eps)), e.wall_code),
                     below_or_equal(code_at(std::min(1.0, e.t + eps)), e.wall_code)};
    }
  }
  return tl;
}

/// Line-oriented export; a code is always the last field and runs to the end
/// of its line.
inline std::string format_timeline(const Timeline& tl) {
  std::ostringstream os;
  os << "timeline n:" << tl.n << " events:" << tl.events.size() << " segments:" << tl.segments.size() << "\n";
  for (const auto& e : tl.events) {
    os << "event t:" << format_real(e.t) << " kind:" << to_string(e.kind) << " indices:";
    for (std::size_t i = 0; i < e.indices.size(); ++i) os << (i ? "," : "") << e.indices[i];
    os << " wall:" << e.wall_code << "\n";
  }
  for (const auto& s : tl.segments)
    os << "segment from:" << format_real(s.t0) << " to:" << format_real(s.t1) << " code:" << s.code << "\n";
  for (const auto& w : tl.warnings) os << "warning " << w << "\n";
  return os.str();
}

inline Timeline parse_timeline(std::string_view text) {
  Timeline tl;
  auto field = [](std::string_view line, std::string_view key) -> std::string_view {
    auto pos = line.find(" " + std::string(key) + ":");
    if (pos == std::string_view::npos) throw Error(ErrorKind::ParseError, "missing field " + std::string(key));
    auto start = pos + key.size() + 2;
    auto stop = line.find(' ', start);
    return line.substr(start, stop == std::string_view::npos ? std::string_view::npos : stop - start);
  };
  auto rest = [](std::string_view line, std::string_view key) {
    auto pos = line.find(" " + std::string(key) + ":");
    if (pos == std::string_view::npos) throw Error(ErrorKind::ParseError, "missing field " + std::string(key));
    return std::string(line.substr(pos + key.size() + 2));
  };
  auto num = [](std::string_view s) { return parse_complex(std::string(s) + ":0").real(); };
  bool header = false;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    if (line.starts_with("timeline ")) {
      tl.n = static_cast<int>(num(field(line, "n")));
      header = true;
    } else if (line.starts_with("event ")) {
      WallEvent e;
      e.t = num(field(line, "t"));
      e.kind = parse_wall_kind(field(line, "kind"));
      auto idx = field(line, "indices");
      if (!idx.empty())
        for (auto part : split(idx, ',')) e.indices.push_back(static_cast<int>(num(part)));
      e.wall_code = rest(line, "wall");
      tl.events.push_back(std::move(e));
    } else if (line.starts_with("segment ")) {
      tl.segments.push_back({num(field(line, "from")), num(field(line, "to")), rest(line, "code")});
    } else if (line.starts_with("warning ")) {
      tl.warnings.emplace_back(line.substr(8));
    } else {
      throw Error(ErrorKind::ParseError, "unexpected timeline line '" + std::string(line) + "'");
    }
  }
  if (!header) throw Error(ErrorKind::ParseError, "missing timeline header");
  return tl;
}

// ------------------------------------------------------------ advection ---

/// Level function of a color: Re P for blue, Im P for red.
inline double level(Color c, Complex w) { return c == Color::Blue ? w.real() : w.imag(); }

/// Gradient of the level function as a complex number, from P' by Cauchy-Riemann.
inline Complex level_gradient(Color c, Complex dp) {
  return c == Color::Blue ? std::conj(dp) : Complex(0.0, 1.0) * std::conj(dp);
}

/// Normal velocity -Phi_t grad Phi / |grad Phi|^2 (no tangential part).
inline Complex front_velocity(const CoeffPath& path, Color c, Complex x, double t) {
  auto [w, dp] = path.at(t).eval_with_derivative(x);
  (void)w;
  Complex g = level_gradient(c, dp);
  double phit = level(c, path.dt(t)(x));
  return -phit * g / std::norm(g);
}

/// |Phi_t + v . grad Phi| at x.
inline double hj_residual(const CoeffPath& path, Color c, Complex x, Complex v, double t) {
  Complex dp = path.at(t).derivative()(x);
  double phit = level(c, path.dt(t)(x));
  return std::abs(phit + (v * std::conj(level_gradient(c, dp))).real());
}

struct MarkerFront {
  Color color = Color::Blue;
  double t = 0.0;
  std::vector<Complex> markers;
  std::vector<Complex> velocity;  // front velocity at each marker at time t
  double drift = 0.0;  // max |Phi| / term size before re-projection, over the steps into this front
};

struct AdvectOptions {
  int substeps = 8;              // RK4 steps per interval of the time grid
  double singular_tol = 1e-7;    // |P'| relative to the size of the terms of P over 1+|z|
  double level_tol = 1e-12;      // projection target, relative to the term size of P
  int markers_per_arc = 12;
  bool parallel = true;
};

/// Markers spread along the traced arcs of one color, endpoints excluded.
inline std::vector<Complex> seed_markers(const Polynomial& p, Color color, int per_arc, const TraceConfig& cfg = {}) {
  auto s = trace(p, cfg);
  std::vector<Complex> out;
  for (const auto& a : s.arcs) {
    if (a.color != color || a.polyline.size() < 3) continue;
    // by arc length, avoiding both ends
    std::vector<double> len{0.0};
    for (std::size_t i = 1; i < a.polyline.size(); ++i) len.push_back(len.back() + std::abs(a.polyline[i] - a.polyline[i - 1]));
    for (int k = 1; k <= per_arc; ++k) {
      double target = len.back() * k / (per_arc + 1);
      auto it = std::lower_bound(len.begin(), len.end(), target);
      std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - len.begin()), 1, len.size() - 1);
      double u = (target - len[j - 1]) / std::max(1e-300, len[j] - len[j - 1]);
      out.push_back(a.polyline[j - 1] + u * (a.polyline[j] - a.polyline[j - 1]));
    }
  }
  return out;
}

namespace detail {

inline Complex project_to_level(const Polynomial& p, Color c, Complex x) {
  for (int it = 0; it < 8; ++it) {
    auto [w, dp] = p.eval_with_derivative(x);
    Complex g = level_gradient(c, dp);
    double f = level(c, w);
    if (std::abs(f) <= 1e-15 * term_size(p, x)) break;
    x -= f * g / std::norm(g);
  }
  return x;
}

inline void check_regular(const CoeffPath& path, double t, Complex x, double tol) {
  // |P'| against |P| / |z|, both measured by the size of their terms
  Polynomial p = path.at(t);
  if (std::abs(p.derivative()(x)) < tol * term_size(p, x) / (1.0 + std::abs(x)))
    throw Error(ErrorKind::AdvectionSingular, "|P'| vanishing at " + format_complex(x) + ", t=" + format_real(t));
}

}  // namespace detail

/// Advects markers on {Phi(., t) = 0} across the time grid; one front per grid time.
inline std::vector<MarkerFront> advect_markers(const CoeffPath& path, Color color, std::vector<Complex> markers,
                                               const std::vector<double>& times, const AdvectOptions& opt = {}) {
  if (times.empty()) return {};
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error(ErrorKind::InvalidArgument, "time grid must increase");
  if (opt.substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be positive");

  auto velocities = [&](const std::vector<Complex>& xs, double t) {
    std::vector<Complex> v;
    for (auto x : xs) v.push_back(front_velocity(path, color, x, t));
    return v;
  };
  std::vector<MarkerFront> fronts;
  {
    Polynomial p0 = path.at(times.front());
    for (auto& x : markers) {
      x = detail::project_to_level(p0, color, x);
      detail::check_regular(path, times.front(), x, opt.singular_tol);
    }
    fronts.push_back({color, times.front(), markers, velocities(markers, times.front()), 0.0});
  }

  for (std::size_t k = 1; k < times.size(); ++k) {
    double t0 = times[k - 1], h = (times[k] - t0) / opt.substeps;
    std::vector<double> drift(markers.size(), 0.0);
    auto advance = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        Complex x = markers[m];
        for (int s = 0; s < opt.substeps; ++s) {
          double t = t0 + s * h;
          detail::check_regular(path, t, x, opt.singular_tol);
          Complex k1 = front_velocity(path, color, x, t);
          Complex k2 = front_velocity(path, color, x + 0.5 * h * k1, t + 0.5 * h);
          Complex k3 = front_velocity(path, color, x + 0.5 * h * k2, t + 0.5 * h);
          Complex k4 = front_velocity(path, color, x + h * k3, t + h);
          x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          Polynomial p = path.at(t + h);
          drift[m] = std::max(drift[m], std::abs(level(color, p(x))) / detail::term_size(p, x));
          x = detail::project_to_level(p, color, x);
        }
        markers[m] = x;
      }
    };
    unsigned hw = opt.parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1u;
    std::size_t chunks = markers.size() < 64 ? 1 : std::min<std::size_t>(hw, 16);
    std::vector<std::future<void>> jobs;
    for (std::size_t c = 0; c < chunks; ++c) {
      std::size_t lo = markers.size() * c / chunks, hi = markers.size() * (c + 1) / chunks;
      if (chunks == 1) advance(lo, hi);
      else jobs.push_back(std::async(std::launch::async, advance, lo, hi));
    }
    for (auto& j : jobs) j.get();

    Polynomial p = path.at(times[k]);
    for (auto x : markers)
      if (std::abs(level(color, p(x))) > opt.level_tol * detail::term_size(p, x) + 1e-300)
        throw Error(ErrorKind::AdvectionSingular, "marker left the level set at " + format_complex(x));
    double d = drift.empty() ? 0.0 : *std::max_element(drift.begin(), drift.end());
    fronts.push_back({color, times[k], markers, velocities(markers, times[k]), d});
  }
  return fronts;
}

/// Seeds markers from the trace at the first grid time and advects them.
inline std::vector<MarkerFront> advect_front(const CoeffPath& path, Color color, const std::vector<double>& times,
                                             const AdvectOptions& opt = {}) {
  if (times.empty()) return {};
  return advect_markers(path, color, seed_markers(path.at(times.front()), color, opt.markers_per_arc), times, opt);
}

}  // namespace skizze
