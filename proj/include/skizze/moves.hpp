#pragma once

// Contracting Whitehead moves on Gauss-graphs and the degeneration poset.
// A move inserts ghost edges inside one face and shrinks them to a point:
//   Case1: k same-colored boundary edges pinched into a crit of valency 2k
//   Case2: an edge between two same-colored crit vertices shrunk away
//   Case3: k roots on one face merged into a root of summed multiplicity
// Generic strata come from pairs of non-crossing chord systems.

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "skizze/gauss_graph.hpp"

namespace skizze {

enum class MoveKind { Case1, Case2, Case3 };

inline std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::Case1: return "case1";
    case MoveKind::Case2: return "case2";
    case MoveKind::Case3: return "case3";
  }
  return "?";
}

struct MoveDescriptor {
  MoveKind kind = MoveKind::Case1;
  int face = -1;            // Case1, Case3 (-1: roots of one tree merged along it)
  std::vector<int> edges;   // Case1: half-edges with `face` on their left, walk order; Case2: one half-edge
  Color color = Color::Red; // Case1
  std::vector<int> roots;   // Case3, walk order

  bool operator==(const MoveDescriptor&) const = default;
};

namespace detail {

// Mutable view for surgery: dead half-edges and vertices are dropped by compact().
struct Surgery {
  GaussGraph g;
  std::vector<bool> dead_he;
  std::vector<bool> dead_v;

  explicit Surgery(GaussGraph base) : g(std::move(base)) {
    g.faces.clear();
    g.face_of.clear();
    dead_he.assign(static_cast<std::size_t>(g.half_edge_count()), false);
    dead_v.assign(static_cast<std::size_t>(g.vertex_count()), false);
  }

  int add_vertex(Vertex v) {
    dead_v.push_back(false);
    return g.add_vertex(v);
  }

  // New edge x - y; the caller places the half-edges in the rotations.
  int add_floating_edge(int x, int y, Color c) {
    int h = g.add_edge(x, y, c);
    g.rotation[static_cast<std::size_t>(x)].pop_back();
    g.rotation[static_cast<std::size_t>(y)].pop_back();
    dead_he.push_back(false);
    dead_he.push_back(false);
    return h;
  }

  void replace_in_rotation(int v, int old_h, int new_h) {
    auto& r = g.rotation[static_cast<std::size_t>(v)];
    *std::find(r.begin(), r.end(), old_h) = new_h;
  }

  void insert_after(int v, int after_h, int new_h) {
    auto& r = g.rotation[static_cast<std::size_t>(v)];
    r.insert(std::find(r.begin(), r.end(), after_h) + 1, new_h);
  }

  // Merges the head of h into its tail; the rotation of the head is spliced in
  // place of h, starting after twin(h).
  void contract(int h) {
    int u = g.he(h).from, v = g.he(h).to, t = g.he(h).twin;
    auto rv = g.rot(v);
    auto it = std::find(rv.begin(), rv.end(), t);
    std::vector<int> splice(it + 1, rv.end());
    splice.insert(splice.end(), rv.begin(), it);
    auto& ru = g.rotation[static_cast<std::size_t>(u)];
    auto pos = std::find(ru.begin(), ru.end(), h);
    pos = ru.erase(pos);
    ru.insert(pos, splice.begin(), splice.end());
    for (int x : splice) {
      g.half_edges[static_cast<std::size_t>(x)].from = u;
      g.half_edges[static_cast<std::size_t>(g.he(x).twin)].to = u;
    }
    g.rotation[static_cast<std::size_t>(v)].clear();
    dead_he[static_cast<std::size_t>(h)] = dead_he[static_cast<std::size_t>(t)] = true;
    dead_v[static_cast<std::size_t>(v)] = true;
  }

  // Removes a loop at its vertex; only legal when its two ends are adjacent
  // in the rotation (nothing enclosed).
  bool remove_loop(int h) {
    int u = g.he(h).from, t = g.he(h).twin;
    auto& r = g.rotation[static_cast<std::size_t>(u)];
    int s = static_cast<int>(r.size());
    int i = static_cast<int>(std::find(r.begin(), r.end(), h) - r.begin());
    int j = static_cast<int>(std::find(r.begin(), r.end(), t) - r.begin());
    if ((i + 1) % s != j && (j + 1) % s != i) return false;
    r.erase(std::remove_if(r.begin(), r.end(), [&](int x) { return x == h || x == t; }), r.end());
    dead_he[static_cast<std::size_t>(h)] = dead_he[static_cast<std::size_t>(t)] = true;
    return true;
  }

  GaussGraph compact() const {
    GaussGraph out;
    out.n = g.n;
    std::vector<int> vmap(static_cast<std::size_t>(g.vertex_count()), -1);
    for (int v = 0; v < g.vertex_count(); ++v)
      if (!dead_v[static_cast<std::size_t>(v)]) vmap[static_cast<std::size_t>(v)] = out.add_vertex(g.vertex(v));
    std::vector<int> hmap(static_cast<std::size_t>(g.half_edge_count()), -1);
    for (int h = 0; h < g.half_edge_count(); ++h) {
      if (dead_he[static_cast<std::size_t>(h)] || hmap[static_cast<std::size_t>(h)] >= 0) continue;
      const auto& e = g.he(h);
      int nh = out.add_edge(vmap[static_cast<std::size_t>(e.from)], vmap[static_cast<std::size_t>(e.to)], e.color);
      hmap[static_cast<std::size_t>(h)] = nh;
      hmap[static_cast<std::size_t>(e.twin)] = nh + 1;
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
      if (dead_v[static_cast<std::size_t>(v)]) continue;
      auto& r = out.rotation[static_cast<std::size_t>(vmap[static_cast<std::size_t>(v)])];
      r.clear();
      for (int h : g.rot(v)) r.push_back(hmap[static_cast<std::size_t>(h)]);
    }
    return out;
  }

  // Some cycle edge at m (an edge m - w such that w reaches m without it), or -1.
  int cycle_edge_at(int m) const {
    for (int h : g.rot(m)) {
      int w = g.he(h).to;
      if (w == m) return h;
      std::vector<int> stack{w};
      std::set<int> seen{w};
      bool back = false;
      while (!stack.empty() && !back) {
        int x = stack.back();
        stack.pop_back();
        for (int e : g.rot(x)) {
          if (e == g.he(h).twin) continue;
          int y = g.he(e).to;
          if (y == m) {
            back = true;
            break;
          }
          if (seen.insert(y).second) stack.push_back(y);
        }
      }
      if (back) return h;
    }
    return -1;
  }
};

inline std::vector<int> tree_ids(const GaussGraph& g) {
  std::vector<int> comp(static_cast<std::size_t>(g.vertex_count()), -1);
  int c = 0;
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = c;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int h : g.rot(v)) {
        int w = g.he(h).to;
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = c;
          stack.push_back(w);
        }
      }
    }
    ++c;
  }
  return comp;
}

// Half-edges along the tree path a -> b, empty if disconnected.
inline std::vector<int> tree_path(const GaussGraph& g, int a, int b) {
  std::vector<int> via(static_cast<std::size_t>(g.vertex_count()), -1);
  std::vector<bool> seen(static_cast<std::size_t>(g.vertex_count()), false);
  std::vector<int> stack{a};
  seen[static_cast<std::size_t>(a)] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int h : g.rot(v)) {
      int w = g.he(h).to;
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = true;
      via[static_cast<std::size_t>(w)] = h;
      stack.push_back(w);
    }
  }
  if (!seen[static_cast<std::size_t>(b)] || a == b) return {};
  std::vector<int> out;
  for (int v = b; v != a; v = g.he(via[static_cast<std::size_t>(v)]).from) out.push_back(via[static_cast<std::size_t>(v)]);
  std::reverse(out.begin(), out.end());
  return out;
}

[[noreturn]] inline void refuse(const std::string& why) { throw Error(ErrorKind::RefusedMove, why); }

inline const GaussGraph& with_faces(const GaussGraph& g, GaussGraph& scratch) {
  if (!g.faces.empty() && g.face_of.size() == static_cast<std::size_t>(g.half_edge_count())) return g;
  scratch = g;
  compute_faces(scratch);
  return scratch;
}

}  // namespace detail

/// Applies a contracting move. The result validates and has strictly larger
/// codim (Case1, Case3) or the same codim with one edge fewer (Case2);
/// otherwise the move is refused.
inline GaussGraph apply_contract(const GaussGraph& g0, const MoveDescriptor& d) {
  GaussGraph scratch;
  const GaussGraph& g = detail::with_faces(g0, scratch);
  detail::Surgery s(g);
  const int n = g.n;

  if (d.kind == MoveKind::Case1) {
    const int k = static_cast<int>(d.edges.size());
    if (k < 2) detail::refuse("case1 needs at least two edges");
    if (2 * k > 2 * n) detail::refuse("crit valency " + std::to_string(2 * k) + " would exceed 2n");
    auto comp = detail::tree_ids(g);
    std::set<int> trees;
    for (int h : d.edges) {
      if (h < 0 || h >= g.half_edge_count() || g.face_of[static_cast<std::size_t>(h)] != d.face || g.he(h).color != d.color)
        detail::refuse("case1 edge not on the face boundary with the stated color");
      if (!trees.insert(comp[static_cast<std::size_t>(g.he(h).from)]).second)
        detail::refuse("case1 edges from one tree would close a cycle");
    }
    int x = s.add_vertex(Vertex::crit(d.color));
    std::vector<int> rx;
    for (int h : d.edges) {
      int u = g.he(h).from, v = g.he(h).to;
      int xu = s.add_floating_edge(x, u, d.color);
      int xv = s.add_floating_edge(x, v, d.color);
      s.replace_in_rotation(u, h, s.g.he(xu).twin);
      s.replace_in_rotation(v, g.he(h).twin, s.g.he(xv).twin);
      s.dead_he[static_cast<std::size_t>(h)] = s.dead_he[static_cast<std::size_t>(g.he(h).twin)] = true;
      rx.push_back(xu);
      rx.push_back(xv);
    }
    s.g.rotation[static_cast<std::size_t>(x)] = rx;
  } else if (d.kind == MoveKind::Case2) {
    if (d.edges.size() != 1) detail::refuse("case2 needs one edge");
    int h = d.edges[0];
    if (h < 0 || h >= g.half_edge_count()) detail::refuse("case2 edge out of range");
    const auto& a = g.vertex(g.he(h).from);
    const auto& b = g.vertex(g.he(h).to);
    if (a.kind != VertexKind::Crit || b.kind != VertexKind::Crit || a.color != b.color)
      detail::refuse("case2 endpoints must be crit vertices of one color");
    int val = g.valency(g.he(h).from) + g.valency(g.he(h).to) - 2;
    if (val > 2 * n) detail::refuse("crit valency " + std::to_string(val) + " would exceed 2n");
    s.contract(h);
  } else if (d.face < 0) {
    // roots of one tree joined through crit vertices collapse with the paths between them
    const int k = static_cast<int>(d.roots.size());
    if (k < 2) detail::refuse("case3 needs at least two roots");
    int mult = 0;
    for (int r : d.roots) {
      if (r < 0 || r >= g.vertex_count() || g.vertex(r).kind != VertexKind::Root) detail::refuse("case3 vertex is not a root");
      mult += g.vertex(r).multiplicity;
    }
    std::vector<int> path_edges;
    std::set<int> path_vertices;
    const int r0 = d.roots[0];
    for (int i = 1; i < k; ++i) {
      auto path = detail::tree_path(g, r0, d.roots[static_cast<std::size_t>(i)]);
      if (path.empty()) detail::refuse("case3 roots lie in different trees and no face was given");
      for (int h : path) {
        path_edges.push_back(h);
        path_vertices.insert(g.he(h).to);
      }
    }
    for (int v : path_vertices) {
      bool selected = std::find(d.roots.begin(), d.roots.end(), v) != d.roots.end();
      if (!selected && g.vertex(v).kind != VertexKind::Crit) detail::refuse("case3 path passes an unselected root");
    }
    // contract edges into r0 until none of the path is left
    std::set<int> pending(path_edges.begin(), path_edges.end());
    for (int h : path_edges) pending.insert(g.he(h).twin);
    bool progress = true;
    while (progress) {
      progress = false;
      for (int h : s.g.rot(r0))
        if (pending.count(h)) {
          pending.erase(h);
          pending.erase(s.g.he(h).twin);
          s.contract(h);
          progress = true;
          break;
        }
    }
    s.g.vertices[static_cast<std::size_t>(r0)].multiplicity = mult;
    if (s.g.valency(r0) != 4 * mult) detail::refuse("case3 merged root has valency " + std::to_string(s.g.valency(r0)));
  } else {
    const int k = static_cast<int>(d.roots.size());
    if (k < 2) detail::refuse("case3 needs at least two roots");
    if (d.face >= static_cast<int>(g.faces.size())) detail::refuse("case3 face out of range");
    int mult = 0;
    int x = s.add_vertex(Vertex::root(0));
    std::vector<int> rx;
    for (int r : d.roots) {
      if (r < 0 || r >= g.vertex_count() || g.vertex(r).kind != VertexKind::Root) detail::refuse("case3 vertex is not a root");
      mult += g.vertex(r).multiplicity;
      int wedge = -1;
      for (int h : g.rot(r))
        if (g.face_of[static_cast<std::size_t>(h)] == d.face) wedge = h;
      if (wedge < 0) detail::refuse("case3 root not on the face boundary");
      int xr = s.add_floating_edge(x, r, Color::Red);
      s.insert_after(r, wedge, s.g.he(xr).twin);
      rx.push_back(xr);
    }
    s.g.rotation[static_cast<std::size_t>(x)] = rx;
    for (int h : rx) s.contract(h);
    s.g.vertices[static_cast<std::size_t>(x)].multiplicity = mult;
    // paths between merged roots collapse with them
    for (int guard = 0; guard < 4 * g.vertex_count(); ++guard) {
      int h = s.cycle_edge_at(x);
      if (h < 0) break;
      int w = s.g.he(h).to;
      if (w == x) {
        if (!s.remove_loop(h)) detail::refuse("case3 collapse would enclose part of the forest");
        continue;
      }
      if (s.g.vertex(w).kind != VertexKind::Crit) detail::refuse("case3 collapse would swallow an unselected root");
      s.contract(h);
    }
    if (s.g.valency(x) != 4 * mult) detail::refuse("case3 merged root has valency " + std::to_string(s.g.valency(x)));
  }

  GaussGraph out = s.compact();
  auto report = validate(out);
  if (!report.empty()) detail::refuse("result violates '" + report.front().rule + "' at " + report.front().location);
  compute_faces(out);
  int before = codim(g), after = codim(out);
  if (d.kind == MoveKind::Case2 ? (after != before || out.edge_count() >= g.edge_count()) : after <= before)
    detail::refuse("move does not raise the stratum");
  return out;
}

namespace detail {

template <typename F>
void for_each_subset(int size, int min_k, F&& f) {
  for (unsigned mask = 0; mask < (1u << size); ++mask) {
    if (std::popcount(mask) < min_k) continue;
    std::vector<int> pick;
    for (int i = 0; i < size; ++i)
      if (mask & (1u << i)) pick.push_back(i);
    f(pick);
  }
}

}  // namespace detail

/// Every applicable contracting move, deterministic order.
inline std::vector<MoveDescriptor> enumerate_moves(const GaussGraph& g0) {
  GaussGraph scratch;
  const GaussGraph& g = detail::with_faces(g0, scratch);
  auto comp = detail::tree_ids(g);
  std::vector<MoveDescriptor> candidates;
  for (int f = 0; f < static_cast<int>(g.faces.size()); ++f) {
    const auto& walk = g.faces[static_cast<std::size_t>(f)].walk;
    for (Color c : {Color::Red, Color::Blue}) {
      std::vector<int> edges;
      for (int h : walk)
        if (g.he(h).color == c) edges.push_back(h);
      if (edges.size() > 16) throw Error(ErrorKind::CapExceeded, "face boundary too long for move enumeration");
      detail::for_each_subset(static_cast<int>(edges.size()), 2, [&](const std::vector<int>& pick) {
        std::set<int> trees;
        MoveDescriptor d{MoveKind::Case1, f, {}, c, {}};
        for (int i : pick) {
          int h = edges[static_cast<std::size_t>(i)];
          if (!trees.insert(comp[static_cast<std::size_t>(g.he(h).from)]).second) return;
          d.edges.push_back(h);
        }
        if (static_cast<int>(d.edges.size()) <= g.n) candidates.push_back(d);
      });
    }
    std::vector<int> roots;
    for (int h : walk) {
      int v = g.he(h).from;
      if (g.vertex(v).kind == VertexKind::Root && std::find(roots.begin(), roots.end(), v) == roots.end()) roots.push_back(v);
    }
    detail::for_each_subset(static_cast<int>(roots.size()), 2, [&](const std::vector<int>& pick) {
      MoveDescriptor d{MoveKind::Case3, f, {}, Color::Red, {}};
      for (int i : pick) d.roots.push_back(roots[static_cast<std::size_t>(i)]);
      candidates.push_back(d);
    });
  }
  // roots of one tree, collapsing along the tree
  {
    std::map<int, std::vector<int>> by_tree;
    for (int v = 0; v < g.vertex_count(); ++v)
      if (g.vertex(v).kind == VertexKind::Root) by_tree[comp[static_cast<std::size_t>(v)]].push_back(v);
    for (const auto& [tree, roots] : by_tree) {
      if (roots.size() > 16) throw Error(ErrorKind::CapExceeded, "too many roots in one tree for move enumeration");
      detail::for_each_subset(static_cast<int>(roots.size()), 2, [&](const std::vector<int>& pick) {
        MoveDescriptor d{MoveKind::Case3, -1, {}, Color::Red, {}};
        for (int i : pick) d.roots.push_back(roots[static_cast<std::size_t>(i)]);
        candidates.push_back(d);
      });
    }
  }
  for (int h = 0; h < g.half_edge_count(); h += 2) {
    const auto& a = g.vertex(g.he(h).from);
    const auto& b = g.vertex(g.he(h).to);
    if (a.kind == VertexKind::Crit && b.kind == VertexKind::Crit && a.color == b.color)
      candidates.push_back({MoveKind::Case2, -1, {h}, a.color, {}});
  }
  std::vector<MoveDescriptor> out;
  for (auto& d : candidates) {
    try {
      apply_contract(g, d);
      out.push_back(std::move(d));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RefusedMove) throw;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generic strata.

using Matching = std::vector<std::pair<int, int>>;

namespace detail {

inline void matchings_rec(std::vector<int> pts, Matching& cur, std::vector<Matching>& out) {
  if (pts.empty()) {
    out.push_back(cur);
    return;
  }
  // pair the first point with a partner leaving an even block inside
  for (std::size_t j = 1; j < pts.size(); j += 2) {
    std::vector<int> inside(pts.begin() + 1, pts.begin() + static_cast<long>(j));
    std::vector<int> outside(pts.begin() + static_cast<long>(j) + 1, pts.end());
    cur.emplace_back(pts[0], pts[j]);
    std::vector<Matching> in_m;
    Matching tmp;
    matchings_rec(inside, tmp, in_m);
    for (const auto& m : in_m) {
      std::size_t mark = cur.size();
      cur.insert(cur.end(), m.begin(), m.end());
      matchings_rec(outside, cur, out);
      cur.resize(mark);
    }
    cur.pop_back();
  }
}

}  // namespace detail

/// Non-crossing perfect matchings of the given increasing points.
inline std::vector<Matching> noncrossing_matchings(const std::vector<int>& pts) {
  std::vector<Matching> out;
  Matching cur;
  detail::matchings_rec(pts, cur, out);
  return out;
}

inline bool interleave(std::pair<int, int> a, std::pair<int, int> b) {
  auto inside = [&](int x) { return a.first < x && x < a.second; };
  return inside(b.first) != inside(b.second);
}

/// Forest of X-trees for a red matching of even slots and a blue matching of
/// odd slots. Throws InvalidArgument unless interleaving is a bijection.
inline GaussGraph forest_from_matchings(int n, const Matching& red, const Matching& blue) {
  GaussGraph g;
  g.n = n;
  std::vector<int> leaf(static_cast<std::size_t>(4 * n));
  for (int k = 0; k < 4 * n; ++k) leaf[static_cast<std::size_t>(k)] = g.add_vertex(Vertex::leaf(k));
  for (const auto& r : red) {
    int partners = 0;
    std::pair<int, int> mate;
    for (const auto& b : blue)
      if (interleave(r, b)) {
        ++partners;
        mate = b;
      }
    if (partners != 1) throw Error(ErrorKind::InvalidArgument, "red chord interleaves " + std::to_string(partners) + " blue chords");
    for (const auto& r2 : red)
      if (r2 != r && interleave(r2, mate)) throw Error(ErrorKind::InvalidArgument, "blue chord interleaves two red chords");
    int root = g.add_vertex(Vertex::root(1));
    std::vector<int> slots{r.first, r.second, mate.first, mate.second};
    std::sort(slots.begin(), slots.end());
    for (int k : slots) g.add_edge(root, leaf[static_cast<std::size_t>(k)], k % 2 == 0 ? Color::Red : Color::Blue);
  }
  compute_faces(g);
  return g;
}

/// Codes of all generic strata of degree n.
inline std::vector<CanonicalCode> enumerate_generic(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  std::vector<int> even, odd;
  for (int k = 0; k < 4 * n; ++k) (k % 2 == 0 ? even : odd).push_back(k);
  auto reds = noncrossing_matchings(even);
  auto blues = noncrossing_matchings(odd);
  std::set<CanonicalCode> codes;
  for (const auto& r : reds)
    for (const auto& b : blues) {
      try {
        codes.insert(canonical_code(forest_from_matchings(n, r, b)));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidArgument) throw;
      }
    }
  return {codes.begin(), codes.end()};
}

inline GaussGraph star_graph(int n) {
  GaussGraph g;
  g.n = n;
  int root = g.add_vertex(Vertex::root(n));
  for (int k = 0; k < 4 * n; ++k) g.add_edge(root, g.add_vertex(Vertex::leaf(k)), k % 2 == 0 ? Color::Red : Color::Blue);
  compute_faces(g);
  return g;
}

inline CanonicalCode maximal_element(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  return canonical_code(star_graph(n));
}

// ---------------------------------------------------------------------------
// Poset.

struct Cover {
  CanonicalCode child;
  CanonicalCode parent;
  MoveKind kind;
  MoveDescriptor witness;  // in the ids of decode(child)
};

struct Poset {
  int n = 0;
  std::set<CanonicalCode> nodes;
  std::vector<Cover> covers;
  CanonicalCode maximal;

  std::vector<const Cover*> parents_of(const CanonicalCode& c) const {
    std::vector<const Cover*> out;
    for (const auto& e : covers)
      if (e.child == c) out.push_back(&e);
    return out;
  }
  std::vector<const Cover*> children_of(const CanonicalCode& c) const {
    std::vector<const Cover*> out;
    for (const auto& e : covers)
      if (e.parent == c) out.push_back(&e);
    return out;
  }
  std::vector<CanonicalCode> maximal_nodes() const {
    std::set<CanonicalCode> has_parent;
    for (const auto& e : covers) has_parent.insert(e.child);
    std::vector<CanonicalCode> out;
    for (const auto& c : nodes)
      if (!has_parent.count(c)) out.push_back(c);
    return out;
  }
  /// a <= b in the reflexive-transitive closure of the covers.
  bool below(const CanonicalCode& a, const CanonicalCode& b) const {
    std::set<CanonicalCode> seen{a};
    std::vector<CanonicalCode> stack{a};
    while (!stack.empty()) {
      auto c = stack.back();
      stack.pop_back();
      if (c == b) return true;
      for (const auto* e : parents_of(c))
        if (seen.insert(e->parent).second) stack.push_back(e->parent);
    }
    return false;
  }
};

struct PosetOptions {
  int cap = 4;
};

/// Rough node-count estimate used in the cap refusal message.
inline double poset_size_estimate(int n) {
  double generic = static_cast<double>(enumerate_generic(std::min(n, 4)).size());
  for (int k = 5; k <= n; ++k) generic *= 12.0;
  return generic * std::pow(4.0, n);
}

/// Closure of the generic strata under contracting moves.
inline Poset build_poset(int n, PosetOptions opt = {}) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  if (n > opt.cap) {
    std::ostringstream os;
    os << "n=" << n << " exceeds cap " << opt.cap << " (estimated ~" << static_cast<long long>(poset_size_estimate(n)) << " nodes)";
    throw Error(ErrorKind::CapExceeded, os.str());
  }
  Poset p;
  p.n = n;
  std::vector<CanonicalCode> frontier = enumerate_generic(n);
  p.nodes.insert(frontier.begin(), frontier.end());
  std::set<std::pair<CanonicalCode, CanonicalCode>> seen_cover;
  while (!frontier.empty()) {
    std::vector<CanonicalCode> next;
    for (const auto& code : frontier) {
      GaussGraph g = decode(code);
      for (const auto& d : enumerate_moves(g)) {
        auto parent = canonical_code(apply_contract(g, d));
        if (seen_cover.insert({code, parent}).second) p.covers.push_back({code, parent, d.kind, d});
        if (p.nodes.insert(parent).second) next.push_back(parent);
      }
    }
    frontier = std::move(next);
  }
  std::sort(p.covers.begin(), p.covers.end(), [](const Cover& a, const Cover& b) {
    return std::tie(a.child, a.parent) < std::tie(b.child, b.parent);
  });
  auto tops = p.maximal_nodes();
  auto star = maximal_element(n);
  if (tops.size() != 1 || tops.front() != star)
    throw Error(ErrorKind::StructuralError, "poset has " + std::to_string(tops.size()) + " maximal nodes");
  p.maximal = star;
  return p;
}

/// Catalog: one line per node, `code TAB parent,parent TAB kind,kind`, sorted.
inline std::string format_catalog(const Poset& p) {
  std::ostringstream os;
  for (const auto& c : p.nodes) {
    os << c << '\t';
    auto ps = p.parents_of(c);
    for (std::size_t i = 0; i < ps.size(); ++i) os << (i ? "," : "") << ps[i]->parent;
    os << '\t';
    for (std::size_t i = 0; i < ps.size(); ++i) os << (i ? "," : "") << to_string(ps[i]->kind);
    os << '\n';
  }
  return os.str();
}

inline MoveKind parse_move_kind(std::string_view s) {
  if (s == "case1") return MoveKind::Case1;
  if (s == "case2") return MoveKind::Case2;
  if (s == "case3") return MoveKind::Case3;
  throw Error(ErrorKind::ParseError, "unknown move kind '" + std::string(s) + "'");
}

/// Reads a catalog back (covers carry kinds but no witnesses).
inline Poset parse_catalog(const std::string& text) {
  Poset p;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw Error(ErrorKind::ParseError, "catalog line needs three columns");
    CanonicalCode child(cols[0]);
    p.nodes.insert(child);
    if (p.n == 0) p.n = decode(child).n;
    if (cols[1].empty()) continue;
    auto parents = split(cols[1], ',');
    auto kinds = split(cols[2], ',');
    if (parents.size() != kinds.size()) throw Error(ErrorKind::ParseError, "parent and kind lists differ in length");
    for (std::size_t i = 0; i < parents.size(); ++i)
      p.covers.push_back({child, CanonicalCode(parents[i]), parse_move_kind(kinds[i]), {}});
  }
  auto tops = p.maximal_nodes();
  if (tops.size() == 1) p.maximal = tops.front();
  return p;
}

}  // namespace skizze
