#pragma once

// Numerical extraction of the Gauss-skizze: the curves Im P = 0 (red) and
// Re P = 0 (blue) traced by predictor-corrector continuation between the
// roots and on-skizze critical points, which are known in advance. Tracing
// only discovers connectivity; the result is handed to gauss-graph.

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "skizze/error.hpp"
#include "skizze/gauss_graph.hpp"
#include "skizze/poly.hpp"

namespace skizze {

/// Zero entries select defaults scaled by the trace radius R.
struct TraceConfig {
  double h0 = 0.0;             // R/100
  double min_step = 0.0;       // 1e-11 R
  double max_step = 0.0;       // R/20
  double corrector_tol = 1e-10;  // distance to the level curve, relative to 1+|z|
  double snap_radius = 0.0;    // 1e-6 R
  int max_steps = 200000;
  double axis_tol = 1e-9;      // on-skizze test for critical values, relative to |value|
  double axis_floor = 1e-13;   // absolute part, relative to the terms of P at the point (rounding)
  double cluster_radius = -1.0;  // root clustering; negative: poly-core default
  bool parallel = true;
};

enum class EndKind { Vertex, Leaf };

struct ArcEnd {
  EndKind kind = EndKind::Vertex;
  int id = -1;      // vertex id, or leaf slot
  int branch = -1;  // branch index at the vertex
};

struct Arc {
  Color color = Color::Red;
  std::vector<Complex> polyline;
  ArcEnd start, end;
};

struct SkizzeVertex {
  Complex position;
  VertexKind kind = VertexKind::Root;
  int multiplicity = 1;       // root multiplicity, or order of P - P(z0) at a crit
  Color color = Color::Red;   // crit vertices
  double snap = 0.0;
  std::vector<double> branch_angle;  // increasing, in [0, 2pi)
  std::vector<Color> branch_color;
};

struct Skizze {
  Polynomial source = Polynomial::monic({1.0, 0.0});
  double radius = 0.0;
  std::vector<SkizzeVertex> vertices;
  std::vector<Arc> arcs;                       // one per edge
  std::vector<std::vector<int>> order;         // per vertex: arc index per branch (counterclockwise)
  std::vector<double> leaf_angle;              // boundary crossing angle per slot
  std::vector<Arc> reverse_arcs;               // inner edges traced from their other end
};

namespace detail {

inline double wrap_angle(double a) {
  a = std::fmod(a, 2 * std::numbers::pi);
  return a < 0 ? a + 2 * std::numbers::pi : a;
}

inline double angle_gap(double a, double b) {
  double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, 2 * std::numbers::pi - d);
}

struct Tracer {
  const Polynomial& p;
  Polynomial dp;
  TraceConfig cfg;
  double R;
  std::vector<SkizzeVertex> verts;
  std::vector<Complex> obstacles;  // every root and critical point

  double level(Complex z, Color c) const {
    Complex w = p(z);
    return c == Color::Red ? w.imag() : w.real();
  }
  // Unit tangent of the level curve; zero at critical points.
  Complex tangent(Complex z, Color c) const {
    Complex d = dp(z);
    double a = std::abs(d);
    if (a == 0.0) return 0.0;
    Complex t = std::conj(d) / a;
    return c == Color::Red ? t : Complex(0.0, 1.0) * t;
  }
  Complex gradient(Complex z, Color c) const {
    Complex d = dp(z);
    return c == Color::Red ? Complex(0.0, 1.0) * std::conj(d) : std::conj(d);
  }
  bool correct(Complex& z, Color c) const {
    for (int it = 0; it < 12; ++it) {
      Complex g = gradient(z, c);
      double g2 = std::norm(g);
      if (g2 == 0.0) return false;
      double f = level(z, c);
      double dist = std::abs(f) / std::sqrt(g2);
      if (dist <= cfg.corrector_tol * (1.0 + std::abs(z))) return true;
      z -= f * g / g2;
    }
    double f = level(z, c);
    return std::abs(f) / std::abs(gradient(z, c)) <= cfg.corrector_tol * (1.0 + std::abs(z));
  }
  Complex oriented(Complex t, Complex dir) const { return (t * std::conj(dir)).real() < 0 ? -t : t; }

  int nearest_branch(int w, Complex z, Color c) const {
    const auto& v = verts[static_cast<std::size_t>(w)];
    double a = std::arg(z - v.position);
    int best = -1;
    double gap = 1e300;
    for (std::size_t b = 0; b < v.branch_angle.size(); ++b) {
      if (v.branch_color[b] != c) continue;
      double d = angle_gap(a, v.branch_angle[b]);
      if (d < gap) {
        gap = d;
        best = static_cast<int>(b);
      }
    }
    return best;
  }

  double nearest_obstacle(Complex z) const {
    double d = 1e300;
    for (auto o : obstacles) d = std::min(d, std::abs(z - o));
    return d;
  }

  Arc trace_branch(int v, int b) const {
    const auto& sv = verts[static_cast<std::size_t>(v)];
    const Color c = sv.branch_color[static_cast<std::size_t>(b)];
    Complex dir = std::polar(1.0, sv.branch_angle[static_cast<std::size_t>(b)]);
    double dmin = 1e300;
    for (std::size_t w = 0; w < verts.size(); ++w)
      if (static_cast<int>(w) != v) dmin = std::min(dmin, std::abs(verts[w].position - sv.position));
    for (auto o : obstacles)
      if (std::abs(o - sv.position) > sv.snap) dmin = std::min(dmin, std::abs(o - sv.position));
    double delta = std::max(2.0 * sv.snap, std::min(cfg.h0, 0.1 * dmin));
    Arc arc;
    arc.color = c;
    arc.start = {EndKind::Vertex, v, b};
    arc.polyline.push_back(sv.position);
    Complex z = sv.position + delta * dir;
    if (!correct(z, c))
      throw Error(ErrorKind::ConditioningFailure, "corrector failed leaving vertex at " + format_complex(sv.position));
    arc.polyline.push_back(z);
    double h = std::min(cfg.h0, delta);
    for (int step = 0; step < cfg.max_steps; ++step) {
      for (std::size_t w = 0; w < verts.size(); ++w) {
        if (static_cast<int>(w) == v) continue;
        const auto& tv = verts[w];
        if (tv.kind == VertexKind::Crit && tv.color != c) continue;
        if (std::abs(z - tv.position) < tv.snap) {
          arc.end = {EndKind::Vertex, static_cast<int>(w), nearest_branch(static_cast<int>(w), z, c)};
          arc.polyline.push_back(tv.position);
          return arc;
        }
      }
      if (std::abs(z) > R) {
        arc.end = {EndKind::Leaf, -1, -1};
        return arc;
      }
      double hlim = std::max(cfg.min_step, 0.5 * nearest_obstacle(z));
      h = std::min({h, hlim, cfg.max_step});
      for (;;) {
        auto t_at = [&](Complex x) { return oriented(tangent(x, c), dir); };
        Complex k1 = t_at(z);
        Complex k2 = t_at(z + 0.5 * h * k1);
        Complex k3 = t_at(z + 0.5 * h * k2);
        Complex k4 = t_at(z + h * k3);
        Complex pred = z + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        Complex zc = pred;
        bool ok = is_finite(pred) && correct(zc, c) && std::abs(zc - pred) <= 0.25 * h;
        if (ok) {
          Complex t1 = t_at(zc);
          ok = std::abs(t1) > 0.0 && std::abs(std::arg(t1 * std::conj(k1))) < 0.35 &&
               ((zc - z) * std::conj(k1)).real() > 0.0;
          if (ok) {
            z = zc;
            dir = t1;
            arc.polyline.push_back(z);
            h = std::min(1.5 * h, cfg.max_step);
            break;
          }
        }
        h *= 0.5;
        if (h < cfg.min_step)
          throw Error(ErrorKind::ConditioningFailure,
                      "step collapse near " + format_complex(z) + " on the " + (c == Color::Red ? "red" : "blue") + " curve");
      }
    }
    throw Error(ErrorKind::TraceFailure, "arc exceeded the step budget near " + format_complex(z));
  }
};

// Zeros of Re P (blue) and Im P (red) on |z| = r, as (angle, color) sorted by angle.
inline std::vector<std::pair<double, Color>> boundary_zeros(const Polynomial& p, double r, int samples) {
  std::vector<std::pair<double, Color>> out;
  auto f = [&](double th, Color c) {
    Complex w = p(std::polar(r, th));
    return c == Color::Red ? w.imag() : w.real();
  };
  const double step = 2 * std::numbers::pi / samples;
  for (Color c : {Color::Red, Color::Blue}) {
    for (int i = 0; i < samples; ++i) {
      double a = i * step, b = (i + 1) * step;
      double fa = f(a, c), fb = f(b, c);
      if (fa == 0.0) {
        out.emplace_back(a, c);
        continue;
      }
      if ((fa < 0) == (fb < 0) || fb == 0.0) continue;
      for (int it = 0; it < 60; ++it) {
        double m = 0.5 * (a + b), fm = f(m, c);
        if ((fm < 0) == (fa < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      out.emplace_back(0.5 * (a + b), c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Local model c (z - z0)^m: branch directions of each color.
inline void set_branches(SkizzeVertex& v, Complex c, int m, bool red, bool blue) {
  std::vector<std::pair<double, Color>> br;
  double ac = std::arg(c);
  for (int k = 0; k < 2 * m; ++k) {
    if (red) br.emplace_back(wrap_angle((k * std::numbers::pi - ac) / m), Color::Red);
    if (blue) br.emplace_back(wrap_angle((k * std::numbers::pi + std::numbers::pi / 2 - ac) / m), Color::Blue);
  }
  std::sort(br.begin(), br.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  v.branch_angle.clear();
  v.branch_color.clear();
  for (const auto& [a, col] : br) {
    v.branch_angle.push_back(a);
    v.branch_color.push_back(col);
  }
}

// Radius of the root cluster hidden in the Taylor expansion at z0 of order m.
inline double local_spread(const std::vector<Complex>& t, int m) {
  double s = 0.0;
  double am = std::abs(t[static_cast<std::size_t>(m)]);
  if (am == 0.0) return 0.0;
  for (int j = 0; j < m; ++j) s = std::max(s, std::pow(std::abs(t[static_cast<std::size_t>(j)]) / am, 1.0 / (m - j)));
  return s;
}

}  // namespace detail

/// Traces the Gauss-skizze of a monic polynomial.
inline Skizze trace(const Polynomial& p, const TraceConfig& cfg_in = {}) {
  if (!p.is_monic()) throw Error(ErrorKind::InvalidArgument, "trace needs a monic polynomial");
  const int n = p.degree();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "trace needs degree >= 1");

  RootOptions ro;
  ro.cluster_radius = cfg_in.cluster_radius;
  RootSet roots = find_roots(p, ro);
  CriticalData crit = n >= 2 ? critical_data(p) : CriticalData{};

  double R = root_bound(p);
  for (const auto& r : roots) R = std::max(R, 1.5 * std::abs(r.point));
  for (const auto& c : crit) R = std::max(R, 1.5 * std::abs(c.point));

  // seeds on the boundary circle
  std::vector<std::pair<double, Color>> seeds;
  std::vector<int> slot_of_seed;
  bool seeded = false;
  for (int doubling = 0; doubling <= 10 && !seeded; ++doubling, R *= 2.0) {
    seeds = detail::boundary_zeros(p, R, std::max(64, 32 * n));
    if (static_cast<int>(seeds.size()) != 4 * n) continue;
    slot_of_seed.assign(seeds.size(), -1);
    std::vector<bool> used(static_cast<std::size_t>(4 * n), false);
    bool ok = true;
    for (std::size_t i = 0; i < seeds.size() && ok; ++i) {
      int k = static_cast<int>(std::lround(seeds[i].first * 2 * n / std::numbers::pi)) % (4 * n);
      bool red = k % 2 == 0;
      if (used[static_cast<std::size_t>(k)] || red != (seeds[i].second == Color::Red)) ok = false;
      else used[static_cast<std::size_t>(k)] = true;
      slot_of_seed[i] = k;
    }
    for (std::size_t i = 0; i < seeds.size() && ok; ++i)
      ok = seeds[i].second != seeds[(i + 1) % seeds.size()].second;
    if (ok) seeded = true;
    else continue;
    break;
  }
  if (!seeded) throw Error(ErrorKind::TraceFailure, "boundary seed count or alternation wrong after 10 radius doublings");

  TraceConfig cfg = cfg_in;
  if (cfg.h0 <= 0) cfg.h0 = R / 100.0;
  if (cfg.min_step <= 0) cfg.min_step = 1e-11 * R;
  if (cfg.max_step <= 0) cfg.max_step = R / 20.0;
  if (cfg.snap_radius <= 0) cfg.snap_radius = 1e-6 * R;
  if (!(cfg.min_step <= cfg.h0 && cfg.h0 <= cfg.max_step) || cfg.snap_radius <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "trace config needs 0 < min step <= h0 <= max step");

  detail::Tracer tr{p, p.derivative(), cfg, R, {}, {}};
  for (const auto& r : roots) {
    SkizzeVertex v;
    v.position = r.point;
    v.kind = VertexKind::Root;
    v.multiplicity = r.multiplicity;
    auto t = p.taylor(r.point);
    v.snap = std::max(cfg.snap_radius, 8.0 * detail::local_spread(t, r.multiplicity));
    if (cfg.cluster_radius > 0 && r.multiplicity > 1) v.snap = std::max(v.snap, 2.0 * cfg.cluster_radius);
    detail::set_branches(v, t[static_cast<std::size_t>(r.multiplicity)], r.multiplicity, true, true);
    tr.verts.push_back(v);
    tr.obstacles.push_back(r.point);
  }
  for (const auto& c : crit) tr.obstacles.push_back(c.point);
  // a simple root next to a close neighbour must not swallow it
  for (auto& v : tr.verts) {
    if (v.multiplicity > 1) continue;
    double d = 1e300;
    for (auto o : tr.obstacles)
      if (o != v.position) d = std::min(d, std::abs(o - v.position));
    v.snap = std::min(v.snap, 0.1 * d);
  }
  for (const auto& c : crit) {
    bool inside_root = false;
    for (const auto& v : tr.verts)
      if (std::abs(v.position - c.point) < std::max(v.snap, 1e-6 * R)) inside_root = true;
    if (inside_root) continue;
    // relative to the size of the terms of P at the point, so the test does
    // not depend on the overall scale of the roots
    double terms = 0.0;
    for (auto a : p.coeffs()) terms = terms * std::abs(c.point) + std::abs(a);
    double tol = cfg.axis_tol * std::abs(c.value) + cfg.axis_floor * terms;
    bool red = std::abs(c.value.imag()) <= tol;
    bool blue = std::abs(c.value.real()) <= tol;
    if (!red && !blue) continue;
    if (red && blue) continue;  // a root, already registered
    SkizzeVertex v;
    v.position = c.point;
    v.kind = VertexKind::Crit;
    v.color = red ? Color::Red : Color::Blue;
    int m = c.multiplicity + 1;
    v.multiplicity = m;
    auto t = p.taylor(c.point);
    double offset = red ? std::abs(c.value.imag()) : std::abs(c.value.real());
    double a = std::abs(t[static_cast<std::size_t>(m)]);
    v.snap = std::max(cfg.snap_radius, a > 0 ? 10.0 * std::pow(offset / a, 1.0 / m) : 0.0);
    // a multiple critical point may hide a cluster of simple ones
    v.snap = std::max(v.snap, 8.0 * detail::local_spread(std::vector<Complex>(t.begin() + 1, t.end()), m - 1));
    for (const auto& r : roots) v.snap = std::min(v.snap, 0.25 * std::abs(r.point - c.point));
    detail::set_branches(v, t[static_cast<std::size_t>(m)], m, red, blue);
    tr.verts.push_back(v);
  }

  const int nv = static_cast<int>(tr.verts.size());
  std::vector<std::vector<Arc>> from(static_cast<std::size_t>(nv));
  auto run = [&](int v) {
    std::vector<Arc> out;
    for (int b = 0; b < static_cast<int>(tr.verts[static_cast<std::size_t>(v)].branch_angle.size()); ++b)
      out.push_back(tr.trace_branch(v, b));
    return out;
  };
  if (cfg.parallel && nv > 1) {
    std::vector<std::future<std::vector<Arc>>> jobs;
    for (int v = 0; v < nv; ++v) jobs.push_back(std::async(std::launch::async, run, v));
    for (int v = 0; v < nv; ++v) from[static_cast<std::size_t>(v)] = jobs[static_cast<std::size_t>(v)].get();
  } else {
    for (int v = 0; v < nv; ++v) from[static_cast<std::size_t>(v)] = run(v);
  }

  Skizze s;
  s.source = p;
  s.radius = R;
  s.vertices = tr.verts;
  s.order.resize(static_cast<std::size_t>(nv));
  s.leaf_angle.assign(static_cast<std::size_t>(4 * n), 0.0);
  for (std::size_t i = 0; i < seeds.size(); ++i) s.leaf_angle[static_cast<std::size_t>(slot_of_seed[i])] = seeds[i].first;
  std::vector<int> leaf_hits(static_cast<std::size_t>(4 * n), 0);
  for (int v = 0; v < nv; ++v) s.order[static_cast<std::size_t>(v)].assign(from[static_cast<std::size_t>(v)].size(), -1);

  for (int v = 0; v < nv; ++v) {
    for (auto& arc : from[static_cast<std::size_t>(v)]) {
      if (arc.end.kind == EndKind::Leaf) {
        // nearest seed of the arc's color
        double a = std::arg(arc.polyline.back());
        int best = -1;
        double gap = 1e300;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          if (seeds[i].second != arc.color) continue;
          double d = detail::angle_gap(a, seeds[i].first);
          if (d < gap) {
            gap = d;
            best = slot_of_seed[i];
          }
        }
        arc.end.id = best;
        ++leaf_hits[static_cast<std::size_t>(best)];
        s.order[static_cast<std::size_t>(v)][static_cast<std::size_t>(arc.start.branch)] = static_cast<int>(s.arcs.size());
        s.arcs.push_back(std::move(arc));
        continue;
      }
      int w = arc.end.id, bw = arc.end.branch;
      if (bw < 0) throw Error(ErrorKind::TraceFailure, "arc reached a vertex along no branch of its color");
      const auto& back = from[static_cast<std::size_t>(w)][static_cast<std::size_t>(bw)];
      if (back.end.kind != EndKind::Vertex || back.end.id != v || back.end.branch != arc.start.branch)
        throw Error(ErrorKind::TraceFailure, "arc endpoints disagree between " + format_complex(tr.verts[static_cast<std::size_t>(v)].position) +
                                                 " and " + format_complex(tr.verts[static_cast<std::size_t>(w)].position));
      if (v < w) {
        int id = static_cast<int>(s.arcs.size());
        s.order[static_cast<std::size_t>(v)][static_cast<std::size_t>(arc.start.branch)] = id;
        s.order[static_cast<std::size_t>(w)][static_cast<std::size_t>(bw)] = id;
        s.arcs.push_back(arc);
        s.reverse_arcs.push_back(back);
      }
    }
  }
  for (int k = 0; k < 4 * n; ++k)
    if (leaf_hits[static_cast<std::size_t>(k)] != 1)
      throw Error(ErrorKind::TraceFailure, "leaf slot " + std::to_string(k) + " reached by " +
                                               std::to_string(leaf_hits[static_cast<std::size_t>(k)]) + " arcs");
  return s;
}

/// Combinatorial map of a traced skizze: internal vertices keep their ids,
/// leaves follow in slot order.
inline GaussGraph extract_graph(const Skizze& s) {
  GaussGraph g;
  g.n = s.source.degree();
  const int nv = static_cast<int>(s.vertices.size());
  for (const auto& v : s.vertices)
    g.add_vertex(v.kind == VertexKind::Root ? Vertex::root(v.multiplicity, v.position) : Vertex::crit(v.color, v.position));
  for (int k = 0; k < 4 * g.n; ++k) g.add_vertex(Vertex::leaf(k));
  std::vector<int> out_he(s.arcs.size()), in_he(s.arcs.size());
  for (std::size_t a = 0; a < s.arcs.size(); ++a) {
    const auto& arc = s.arcs[a];
    int to = arc.end.kind == EndKind::Leaf ? nv + arc.end.id : arc.end.id;
    int h = g.add_edge(arc.start.id, to, arc.color);
    out_he[a] = h;
    in_he[a] = h + 1;
  }
  for (int v = 0; v < nv; ++v) {
    std::vector<int> r;
    const auto& ord = s.order[static_cast<std::size_t>(v)];
    for (std::size_t b = 0; b < ord.size(); ++b) {
      int a = ord[b];
      if (a < 0) throw Error(ErrorKind::ExtractionFailure, "vertex branch without an arc");
      const auto& arc = s.arcs[static_cast<std::size_t>(a)];
      bool outgoing = arc.start.id == v && arc.start.branch == static_cast<int>(b);
      r.push_back(outgoing ? out_he[static_cast<std::size_t>(a)] : in_he[static_cast<std::size_t>(a)]);
    }
    g.rotation[static_cast<std::size_t>(v)] = r;
  }
  try {
    compute_faces(g);
  } catch (const Error& e) {
    throw Error(ErrorKind::ExtractionFailure, e.what());
  }
  auto report = validate(g);
  if (!report.empty()) throw Error(ErrorKind::ExtractionFailure, report.front().rule + " at " + report.front().location);
  return g;
}

struct Classification {
  GaussGraph graph;
  CanonicalCode code;
};

inline Classification classify(const Polynomial& p, const TraceConfig& cfg = {}) {
  auto g = extract_graph(trace(p, cfg));
  auto code = canonical_code(g);
  return {std::move(g), std::move(code)};
}

}  // namespace skizze
