#pragma once

// Configurations of labeled points and the structure maps between them:
// direction and relative-distance coordinates, insertion of infinitesimal
// parts (weak-partition composition), doubling and forgetting. The
// combinatorial side is checked against the tracer by verify_composition.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skizze/error.hpp"
#include "skizze/gauss_graph.hpp"
#include "skizze/moves.hpp"
#include "skizze/poly.hpp"
#include "skizze/tracer.hpp"

namespace skizze {

struct Configuration {
  std::vector<std::string> labels;
  std::vector<Complex> points;
  bool compactified = false;  // coincident points allowed

  static Configuration make(std::vector<std::string> labels, std::vector<Complex> points, bool compactified = false) {
    Configuration x{std::move(labels), std::move(points), compactified};
    x.check();
    return x;
  }

  static Configuration of(const std::vector<std::pair<std::string, Complex>>& entries, bool compactified = false) {
    Configuration x;
    for (const auto& [l, z] : entries) {
      x.labels.push_back(l);
      x.points.push_back(z);
    }
    x.compactified = compactified;
    x.check();
    return x;
  }

  std::size_t size() const { return points.size(); }

  int index(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    throw Error(ErrorKind::InvalidArgument, "no label '" + std::string(label) + "'");
  }

  Complex at(std::string_view label) const { return points[static_cast<std::size_t>(index(label))]; }

  Polynomial polynomial() const { return from_roots(points); }

  void check() const {
    if (labels.size() != points.size()) throw Error(ErrorKind::InvalidArgument, "labels and points differ in number");
    std::set<std::string> seen;
    for (const auto& l : labels) {
      // labels appear in "label=re:im" lists and in part specs "p:..."
      if (l.empty() || l.find_first_of(",=: \t\n") != std::string::npos)
        throw Error(ErrorKind::InvalidArgument, "bad label '" + l + "'");
      if (!seen.insert(l).second) throw Error(ErrorKind::InvalidArgument, "duplicate label '" + l + "'");
    }
    for (auto z : points)
      if (!is_finite(z)) throw Error(ErrorKind::InvalidArgument, "non-finite point");
    if (!compactified)
      for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
          if (points[i] == points[j])
            throw Error(ErrorKind::InvalidArgument, "points '" + labels[i] + "' and '" + labels[j] + "' coincide");
  }
};

/// Unit direction from x(a) to x(b).
inline Complex theta(const Configuration& x, std::string_view a, std::string_view b) {
  if (a == b) throw Error(ErrorKind::UndefinedDirection, "direction from a point to itself");
  Complex d = x.at(b) - x.at(a);
  if (std::abs(d) == 0.0) throw Error(ErrorKind::UndefinedDirection, "coincident points have no direction");
  return d / std::abs(d);
}

/// |x(a) - x(b)| / |x(a) - x(c)|.
inline double delta(const Configuration& x, std::string_view a, std::string_view b, std::string_view c) {
  double den = std::abs(x.at(a) - x.at(c));
  if (den == 0.0) throw Error(ErrorKind::DivisionDegenerate, "x(a) = x(c)");
  return std::abs(x.at(a) - x.at(b)) / den;
}

/// Rebuild a configuration, up to translation and dilation, from directions
/// and relative distances alone.
inline Configuration from_theta_delta(const Configuration& x) {
  Configuration out{x.labels, std::vector<Complex>(x.size(), Complex(0.0)), x.compactified};
  if (x.size() < 2) return out;
  const auto& a = x.labels[0];
  const auto& b = x.labels[1];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const auto& c = x.labels[i];
    out.points[i] = (c == b ? 1.0 : delta(x, a, c, b)) * theta(x, a, c);
  }
  return out;
}

/// Centroid to 0, largest modulus to 1 (left at 0 when all points coincide).
inline Configuration normalize(const Configuration& x) {
  Configuration y = x;
  if (y.points.empty()) return y;
  Complex c = 0.0;
  for (auto z : y.points) c += z;
  c /= static_cast<double>(y.size());
  double m = 0.0;
  for (auto& z : y.points) {
    z -= c;
    m = std::max(m, std::abs(z));
  }
  if (m > 0.0)
    for (auto& z : y.points) z /= m;
  return y;
}

/// Largest point distance between two labelings of the same set after normalizing both.
inline double similarity_distance(const Configuration& x, const Configuration& y) {
  auto a = normalize(x), b = normalize(y);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.points[i] - b.at(a.labels[i])));
  return d;
}

inline double min_distance(const std::vector<Complex>& z) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) d = std::min(d, std::abs(z[i] - z[j]));
  return d;
}

/// Map S -> Q given in the order of S; fibers inherit that order and may be empty.
struct WeakPartition {
  std::vector<std::pair<std::string, std::string>> assignment;  // (s, q)

  std::vector<std::string> fiber(std::string_view q) const {
    std::vector<std::string> out;
    for (const auto& [s, t] : assignment)
      if (t == q) out.push_back(s);
    return out;
  }

  /// Partition read off the parts, fibers in base order.
  static WeakPartition from_parts(const Configuration& base, const std::map<std::string, Configuration>& parts) {
    WeakPartition v;
    for (const auto& q : base.labels) {
      auto it = parts.find(q);
      if (it == parts.end()) continue;
      for (const auto& s : it->second.labels) v.assignment.emplace_back(s, q);
    }
    return v;
  }
};

/// Admissible scale for inserting parts of largest modulus `reach` into `base`.
inline double max_admissible_epsilon(const Configuration& base, double reach = 1.0) {
  double d = min_distance(base.points);
  return std::isfinite(d) ? d / (8.0 * std::max(reach, 1e-300)) : std::numeric_limits<double>::infinity();
}

/// x0(p) + eps * part_p(a) for a in the fiber of p, with no normalization of
/// the parts; labels follow the ordered sum of the fibers over Q.
inline Configuration compose_raw(const Configuration& base, const std::map<std::string, Configuration>& parts,
                                 const WeakPartition& v, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(ErrorKind::InvalidArgument, "composition scale must be positive and finite");
  std::set<std::string> targets(base.labels.begin(), base.labels.end());
  for (const auto& [s, q] : v.assignment)
    if (!targets.count(q)) throw Error(ErrorKind::InvalidArgument, "label '" + s + "' maps outside the base");
  double reach = 0.0;
  for (const auto& q : base.labels) {
    auto fib = v.fiber(q);
    auto it = parts.find(q);
    if (fib.empty() != (it == parts.end()))
      throw Error(ErrorKind::InvalidArgument, "part at '" + q + "' present iff its fiber is nonempty");
    if (it == parts.end()) continue;
    std::set<std::string> have(it->second.labels.begin(), it->second.labels.end());
    if (have != std::set<std::string>(fib.begin(), fib.end()))
      throw Error(ErrorKind::InvalidArgument, "part at '" + q + "' is not labeled by its fiber");
    for (auto z : it->second.points) reach = std::max(reach, std::abs(z));
  }
  double limit = max_admissible_epsilon(base, reach);
  if (eps > limit)
    throw Error(ErrorKind::InvalidArgument, "composition scale " + format_real(eps) + " makes clusters overlap; max admissible " +
                                                format_real(limit));
  Configuration out;
  for (const auto& q : base.labels) {
    auto it = parts.find(q);
    if (it == parts.end()) continue;
    Complex c = base.at(q);
    for (const auto& s : v.fiber(q)) {
      out.labels.push_back(s);
      out.points.push_back(c + eps * it->second.at(s));
    }
  }
  out.compactified = base.compactified;
  out.check();
  return out;
}

/// Composition with each part normalized (translation and dilation quotient).
inline Configuration compose(const Configuration& base, const std::map<std::string, Configuration>& parts,
                             const WeakPartition& v, double eps) {
  std::map<std::string, Configuration> norm;
  for (const auto& [q, x] : parts) norm.emplace(q, normalize(x));
  return compose_raw(base, norm, v, eps);
}

/// Inserts x(i) + eps v right after i.
inline Configuration doubling(const Configuration& x, std::string_view i, Complex v, double eps, std::string new_label = {}) {
  if (new_label.empty()) new_label = std::string(i) + "'";
  if (std::abs(v) == 0.0) throw Error(ErrorKind::UndefinedDirection, "doubling direction is zero");
  v /= std::abs(v);
  int k = x.index(i);
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < x.size(); ++j)
    if (static_cast<int>(j) != k) nearest = std::min(nearest, std::abs(x.points[j] - x.points[static_cast<std::size_t>(k)]));
  if (!(eps > 0.0) || eps >= 0.5 * nearest)
    throw Error(ErrorKind::InvalidArgument, "doubling scale must lie in (0, " + format_real(0.5 * nearest) + ")");
  Configuration y = x;
  y.labels.insert(y.labels.begin() + k + 1, new_label);
  y.points.insert(y.points.begin() + k + 1, x.points[static_cast<std::size_t>(k)] + eps * v);
  y.check();
  return y;
}

inline Configuration forgetting(const Configuration& x, std::string_view j) {
  if (x.size() < 2) throw Error(ErrorKind::InvalidArgument, "cannot forget the only point");
  int k = x.index(j);
  Configuration y = x;
  y.labels.erase(y.labels.begin() + k);
  y.points.erase(y.points.begin() + k);
  return y;
}

// ------------------------------------------------------------ text form ---

/// "label=re:im" entries, comma separated, in label order.
inline std::string format_configuration(const Configuration& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ',';
    out += x.labels[i] + "=" + format_complex(x.points[i]);
  }
  return out;
}

inline Configuration parse_configuration(std::string_view text) {
  Configuration x;
  for (auto part : split(trim(text), ',')) {
    part = trim(part);
    auto eq = part.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw Error(ErrorKind::ParseError, "expected label=re:im, got '" + std::string(part) + "'");
    x.labels.emplace_back(trim(part.substr(0, eq)));
    x.points.push_back(parse_complex(trim(part.substr(eq + 1))));
  }
  try {
    x.check();
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return x;
}

// ---------------------------------------------------------- verification ---

struct PartCheck {
  std::string base_label;
  double disc_radius = 0.0;
  CanonicalCode in_disc;   // sub-forest seen inside the disc, leaves slotted by angle
  CanonicalCode expected;  // part polynomial, rotated by the constant of the outer factor
  bool match = false;
};

struct CompositionReport {
  bool passed = false;
  bool inconclusive = false;
  double epsilon = 0.0;
  int halvings = 0;
  CanonicalCode composed;
  CanonicalCode contracted;  // composed polynomial classified with each cluster merged
  CanonicalCode base;        // the degenerate base polynomial
  bool contraction_ok = false;
  bool case3_reachable = false;  // base reached from `composed` by Case3 moves alone
  std::vector<PartCheck> parts;
  std::vector<std::string> diagnostics;
};

struct ComposeOptions {
  int degree_cap = 4;
  int max_halvings = 8;
  TraceConfig trace;
};

namespace detail {

// Sub-forest of the traced skizze inside |z - c| < rho; arcs leaving the
// disc end in leaves, slotted by crossing angle minus `rot` for degree m.
inline GaussGraph disc_subforest(const Skizze& s, Complex c, double rho, double rot, int m) {
  const int nv = static_cast<int>(s.vertices.size());
  std::vector<int> local(static_cast<std::size_t>(nv), -1);
  GaussGraph g;
  g.n = m;
  for (int v = 0; v < nv; ++v) {
    const auto& sv = s.vertices[static_cast<std::size_t>(v)];
    if (std::abs(sv.position - c) >= rho) continue;
    local[static_cast<std::size_t>(v)] = g.add_vertex(sv.kind == VertexKind::Root ? Vertex::root(sv.multiplicity, sv.position)
                                                                                : Vertex::crit(sv.color, sv.position));
  }
  struct Crossing {
    int arc;
    double angle;
  };
  std::vector<Crossing> cross;
  for (std::size_t a = 0; a < s.arcs.size(); ++a) {
    const auto& arc = s.arcs[a];
    const auto& pl = arc.polyline;
    int count = 0;
    Complex where = 0.0;
    for (std::size_t i = 0; i + 1 < pl.size(); ++i) {
      double d0 = std::abs(pl[i] - c) - rho, d1 = std::abs(pl[i + 1] - c) - rho;
      if ((d0 < 0) != (d1 < 0)) {
        ++count;
        where = pl[i] + (d0 / (d0 - d1)) * (pl[i + 1] - pl[i]);
      }
    }
    bool in0 = local[static_cast<std::size_t>(arc.start.id)] >= 0;
    bool in1 = arc.end.kind == EndKind::Vertex && local[static_cast<std::size_t>(arc.end.id)] >= 0;
    if (in0 && in1 && count == 0) continue;
    if (in0 != in1 && count == 1) {
      cross.push_back({static_cast<int>(a), std::arg(where - c)});
      continue;
    }
    if (!in0 && !in1 && count == 0) continue;
    throw Error(ErrorKind::ExtractionFailure, "arc crosses the disc boundary " + std::to_string(count) + " times");
  }
  if (static_cast<int>(cross.size()) != 4 * m)
    throw Error(ErrorKind::ExtractionFailure,
                std::to_string(cross.size()) + " arcs leave the disc, expected " + std::to_string(4 * m));
  std::vector<int> slot_arc(static_cast<std::size_t>(4 * m), -1);
  for (const auto& x : cross) {
    double phi = x.angle - rot;
    int k = static_cast<int>(std::lround(phi * 2 * m / std::numbers::pi));
    k = ((k % (4 * m)) + 4 * m) % (4 * m);
    if (slot_arc[static_cast<std::size_t>(k)] >= 0) throw Error(ErrorKind::ExtractionFailure, "two arcs leave at one slot");
    slot_arc[static_cast<std::size_t>(k)] = x.arc;
  }
  std::map<int, int> leaf_of_arc;
  for (int k = 0; k < 4 * m; ++k) leaf_of_arc[slot_arc[static_cast<std::size_t>(k)]] = g.add_vertex(Vertex::leaf(k));

  // edges in arc order; remember the half-edge leaving each inside vertex
  std::map<std::pair<int, int>, int> he_at;  // (arc, original vertex) -> half-edge out of it
  for (std::size_t a = 0; a < s.arcs.size(); ++a) {
    const auto& arc = s.arcs[a];
    int u = local[static_cast<std::size_t>(arc.start.id)];
    int w = arc.end.kind == EndKind::Vertex ? local[static_cast<std::size_t>(arc.end.id)] : -1;
    auto leaf = leaf_of_arc.find(static_cast<int>(a));
    if (u >= 0 && w >= 0) {
      int h = g.add_edge(u, w, arc.color);
      he_at[{static_cast<int>(a), arc.start.id}] = h;
      he_at[{static_cast<int>(a), arc.end.id}] = h + 1;
    } else if (leaf != leaf_of_arc.end()) {
      int inside = u >= 0 ? arc.start.id : arc.end.id;
      int h = g.add_edge(local[static_cast<std::size_t>(inside)], leaf->second, arc.color);
      he_at[{static_cast<int>(a), inside}] = h;
    }
  }
  for (int v = 0; v < nv; ++v) {
    int lv = local[static_cast<std::size_t>(v)];
    if (lv < 0) continue;
    std::vector<int> r;
    for (int a : s.order[static_cast<std::size_t>(v)]) {
      auto it = he_at.find({a, v});
      if (it == he_at.end()) throw Error(ErrorKind::ExtractionFailure, "vertex branch without an arc");
      r.push_back(it->second);
    }
    g.rotation[static_cast<std::size_t>(lv)] = r;
  }
  compute_faces(g);
  auto report = validate(g);
  if (!report.empty()) throw Error(ErrorKind::ExtractionFailure, "disc sub-forest: " + report.front().rule);
  return g;
}

inline bool case3_reaches(const CanonicalCode& from, const CanonicalCode& target, int depth) {
  std::set<CanonicalCode> frontier{from}, seen{from};
  for (int d = 0; d <= depth; ++d) {
    if (frontier.count(target)) return true;
    std::set<CanonicalCode> next;
    for (const auto& c : frontier) {
      auto g = decode(c);
      for (const auto& mv : enumerate_moves(g)) {
        if (mv.kind != MoveKind::Case3) continue;
        auto code = canonical_code(apply_contract(g, mv));
        if (seen.insert(code).second) next.insert(code);
      }
    }
    frontier = std::move(next);
  }
  return false;
}

struct Attempt {
  bool admissible = true;
  bool contraction_ok = false, case3_ok = false;
  CanonicalCode composed, contracted;
  std::vector<PartCheck> parts;
  std::vector<std::string> notes;

  bool ok() const {
    return contraction_ok && case3_ok && std::all_of(parts.begin(), parts.end(), [](const PartCheck& p) { return p.match; });
  }
  bool same_outcome(const Attempt& o) const {
    if (composed != o.composed || contracted != o.contracted || ok() != o.ok() || parts.size() != o.parts.size()) return false;
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (parts[i].in_disc != o.parts[i].in_disc || parts[i].match != o.parts[i].match) return false;
    return true;
  }
};

}  // namespace detail

/// Checks that composing with the given parts is compatible with contraction:
/// merging each cluster recovers the degenerate base, and each cluster's disc
/// carries the skizze of its part. eps is halved until two consecutive scales agree.
inline CompositionReport verify_composition(const Configuration& base, const std::map<std::string, Configuration>& parts,
                                            double eps0, const ComposeOptions& opt = {}) {
  CompositionReport rep;
  WeakPartition v = WeakPartition::from_parts(base, parts);
  const int n = static_cast<int>(v.assignment.size());
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "composition has no points");
  if (n > opt.degree_cap)
    throw Error(ErrorKind::CapExceeded, "total degree " + std::to_string(n) + " above cap " + std::to_string(opt.degree_cap));

  std::vector<Complex> degenerate;
  std::vector<std::string> used;
  for (const auto& q : base.labels) {
    auto fib = v.fiber(q);
    for (std::size_t k = 0; k < fib.size(); ++k) degenerate.push_back(base.at(q));
    if (!fib.empty()) used.push_back(q);
  }
  rep.base = classify(from_roots(degenerate), opt.trace).code;

  std::map<std::string, Configuration> norm;
  for (const auto& [q, x] : parts) norm.emplace(q, normalize(x));
  std::map<std::string, std::string> owner(v.assignment.begin(), v.assignment.end());

  auto attempt = [&](double eps) {
    detail::Attempt at;
    Configuration x = compose_raw(base, norm, v, eps);
    Polynomial P = x.polynomial();

    auto clustered = std::async(std::launch::async, [&] {
      TraceConfig cfg = opt.trace;
      cfg.cluster_radius = 2.5 * eps;
      return classify(P, cfg).code;
    });
    Skizze sk = trace(P, opt.trace);
    at.composed = canonical_code(extract_graph(sk));

    for (const auto& q : used) {
      const auto& part = norm.at(q);
      const int m = static_cast<int>(part.size());
      Complex c = base.at(q);
      // P(c + eps w) ~ lambda S(w): the disc shows S rotated so lambda mu^m > 0
      Complex lambda = std::pow(eps, m);
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i)
        if (owner.at(x.labels[i]) != q) lambda *= c - x.points[i];
      for (const auto& r : base.labels)
        if (r != q) nearest = std::min(nearest, std::abs(base.at(r) - c));
      double rot = -std::arg(lambda) / m;
      Complex mu = std::polar(1.0, rot);
      std::vector<Complex> rotated;
      for (auto z : part.points) rotated.push_back(z / mu);
      Skizze ps = trace(from_roots(rotated), opt.trace);
      PartCheck pc;
      pc.base_label = q;
      pc.expected = canonical_code(extract_graph(ps));
      double diam = 0.0;
      for (auto a : part.points)
        for (auto b : part.points) diam = std::max(diam, std::abs(a - b));
      pc.disc_radius = eps * std::max(2.0 * diam, ps.radius);
      if (pc.disc_radius + eps >= 0.5 * nearest) {
        at.admissible = false;
        at.notes.push_back("disc at '" + q + "' reaches the next cluster at eps " + format_real(eps));
      } else {
        try {
          pc.in_disc = canonical_code(detail::disc_subforest(sk, c, pc.disc_radius, rot, m));
        } catch (const Error& e) {
          at.notes.push_back("disc at '" + q + "': " + e.what());
        }
      }
      pc.match = !pc.in_disc.empty() && pc.in_disc == pc.expected;
      at.parts.push_back(pc);
    }
    at.contracted = clustered.get();
    at.contraction_ok = at.contracted == rep.base;
    at.case3_ok = detail::case3_reaches(at.composed, rep.base, n - static_cast<int>(used.size()));
    return at;
  };

  double eps = eps0;
  std::optional<detail::Attempt> prev;
  for (int h = 0; h <= opt.max_halvings; ++h, eps *= 0.5) {
    detail::Attempt at;
    try {
      at = attempt(eps);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidArgument) throw;
      at.admissible = false;
      at.notes.push_back(std::string("eps ") + format_real(eps) + ": " + e.what());
    }
    for (auto& note : at.notes) rep.diagnostics.push_back(note);
    if (!at.admissible) {
      prev.reset();
      continue;
    }
    if (prev && prev->same_outcome(at)) {
      rep.epsilon = eps;
      rep.halvings = h;
      rep.composed = at.composed;
      rep.contracted = at.contracted;
      rep.contraction_ok = at.contraction_ok;
      rep.case3_reachable = at.case3_ok;
      rep.parts = at.parts;
      rep.passed = at.ok();
      return rep;
    }
    prev = std::move(at);
  }
  rep.inconclusive = true;
  rep.halvings = opt.max_halvings;
  rep.epsilon = eps * 2.0;
  if (prev) {
    rep.composed = prev->composed;
    rep.contracted = prev->contracted;
    rep.parts = prev->parts;
  }
  rep.diagnostics.push_back("outcome did not settle within " + std::to_string(opt.max_halvings) + " halvings");
  return rep;
}

}  // namespace skizze
