#pragma once

// Decorated planar forests: vertices (roots, monochromatic critical points,
// 4n leaves at fixed asymptotic slots), colored edges, a rotation system, and
// the A/B/C/D-colored faces of the complement. Validation against the
// coloring rules, face computation, canonical text codes and their decoding.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skizze/error.hpp"
#include "skizze/poly.hpp"

namespace skizze {

enum class Color { Red, Blue };  // Red: Im P = 0, Blue: Re P = 0

inline Color opposite(Color c) { return c == Color::Red ? Color::Blue : Color::Red; }
inline char color_char(Color c) { return c == Color::Red ? 'R' : 'B'; }

/// Face colors, A = preimage of the first quadrant, then counterclockwise.
enum class FaceColor { A = 0, B = 1, C = 2, D = 3 };

inline char face_char(FaceColor f) { return static_cast<char>('A' + static_cast<int>(f)); }

/// Crossing a Blue edge swaps A<->B and C<->D; crossing Red swaps A<->D and B<->C.
inline FaceColor cross(FaceColor f, Color edge) {
  int c = static_cast<int>(f);
  return static_cast<FaceColor>(edge == Color::Blue ? (c ^ 1) : (3 - c));
}

enum class VertexKind { Root, Crit, Leaf };

struct Vertex {
  VertexKind kind = VertexKind::Leaf;
  int multiplicity = 0;       // roots
  Color color = Color::Red;   // critical vertices
  int slot = -1;              // leaves, 0..4n-1
  std::optional<Complex> position;

  static Vertex root(int mult, std::optional<Complex> pos = {}) { return {VertexKind::Root, mult, Color::Red, -1, pos}; }
  static Vertex crit(Color c, std::optional<Complex> pos = {}) { return {VertexKind::Crit, 0, c, -1, pos}; }
  static Vertex leaf(int slot) { return {VertexKind::Leaf, 0, Color::Red, slot, {}}; }
};

struct HalfEdge {
  int from = -1;
  int to = -1;
  int twin = -1;
  Color color = Color::Red;
};

struct Face {
  FaceColor color = FaceColor::A;
  std::vector<int> walk;     // half-edges with the face on their left
  std::vector<int> sectors;  // boundary sectors k (between leaf slots k and k+1)
};

struct GaussGraph {
  int n = 0;
  std::vector<Vertex> vertices;
  std::vector<HalfEdge> half_edges;
  std::vector<std::vector<int>> rotation;  // outgoing half-edges per vertex, counterclockwise
  std::vector<Face> faces;                 // empty until compute_faces
  std::vector<int> face_of;                // face to the left of each half-edge
  bool has_infinity_marker = true;         // the point * gluing all leaves; no rotation data

  int add_vertex(Vertex v) {
    vertices.push_back(v);
    rotation.emplace_back();
    return static_cast<int>(vertices.size()) - 1;
  }

  /// Adds an edge and returns the half-edge u -> v. Both half-edges are appended
  /// at the end of their rotation lists; callers arrange the cyclic order.
  int add_edge(int u, int v, Color c) {
    int h = static_cast<int>(half_edges.size());
    half_edges.push_back({u, v, h + 1, c});
    half_edges.push_back({v, u, h, c});
    rotation[static_cast<std::size_t>(u)].push_back(h);
    rotation[static_cast<std::size_t>(v)].push_back(h + 1);
    return h;
  }

  const HalfEdge& he(int h) const { return half_edges[static_cast<std::size_t>(h)]; }
  const Vertex& vertex(int v) const { return vertices[static_cast<std::size_t>(v)]; }
  const std::vector<int>& rot(int v) const { return rotation[static_cast<std::size_t>(v)]; }
  int valency(int v) const { return static_cast<int>(rot(v).size()); }
  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int half_edge_count() const { return static_cast<int>(half_edges.size()); }
  int edge_count() const { return half_edge_count() / 2; }

  bool is_internal(int v) const { return vertex(v).kind != VertexKind::Leaf; }

  /// Position of a half-edge in the rotation of its origin.
  int rotation_index(int h) const {
    const auto& r = rot(he(h).from);
    auto it = std::find(r.begin(), r.end(), h);
    return it == r.end() ? -1 : static_cast<int>(it - r.begin());
  }
  int rot_next(int h) const {
    const auto& r = rot(he(h).from);
    int i = rotation_index(h);
    return r[static_cast<std::size_t>((i + 1) % static_cast<int>(r.size()))];
  }
  int rot_prev(int h) const {
    const auto& r = rot(he(h).from);
    int s = static_cast<int>(r.size());
    int i = rotation_index(h);
    return r[static_cast<std::size_t>((i + s - 1) % s)];
  }

  std::vector<int> leaves_by_slot() const {
    std::vector<int> out(static_cast<std::size_t>(4 * n), -1);
    for (int v = 0; v < vertex_count(); ++v) {
      const auto& x = vertex(v);
      if (x.kind == VertexKind::Leaf && x.slot >= 0 && x.slot < 4 * n) out[static_cast<std::size_t>(x.slot)] = v;
    }
    return out;
  }

  int count(VertexKind k) const {
    return static_cast<int>(std::count_if(vertices.begin(), vertices.end(), [k](const Vertex& v) { return v.kind == k; }));
  }
};

struct Violation {
  std::string rule;
  std::string location;
};

using ValidationReport = std::vector<Violation>;

inline std::string vertex_label(const GaussGraph& g, int v) {
  const auto& x = g.vertex(v);
  switch (x.kind) {
    case VertexKind::Root: return "root#" + std::to_string(v);
    case VertexKind::Crit: return "crit#" + std::to_string(v);
    case VertexKind::Leaf: return "leaf" + std::to_string(x.slot);
  }
  return "?";
}

/// Throws StructuralError unless twins pair up and rotations are permutations
/// of each vertex's outgoing half-edges.
inline void check_structure(const GaussGraph& g) {
  if (g.n < 1) throw Error(ErrorKind::StructuralError, "n must be positive");
  if (g.rotation.size() != g.vertices.size()) throw Error(ErrorKind::StructuralError, "rotation table size mismatch");
  const int m = g.half_edge_count();
  std::vector<int> seen(static_cast<std::size_t>(m), 0);
  for (int h = 0; h < m; ++h) {
    const auto& e = g.he(h);
    if (e.from < 0 || e.from >= g.vertex_count() || e.to < 0 || e.to >= g.vertex_count())
      throw Error(ErrorKind::StructuralError, "half-edge " + std::to_string(h) + " has an invalid endpoint");
    if (e.twin < 0 || e.twin >= m) throw Error(ErrorKind::StructuralError, "half-edge " + std::to_string(h) + " has no twin");
    const auto& t = g.he(e.twin);
    if (t.twin != h || t.from != e.to || t.to != e.from || t.color != e.color)
      throw Error(ErrorKind::StructuralError, "half-edge " + std::to_string(h) + " twin mismatch");
  }
  for (int v = 0; v < g.vertex_count(); ++v)
    for (int h : g.rot(v)) {
      if (h < 0 || h >= m || g.he(h).from != v)
        throw Error(ErrorKind::StructuralError, "rotation of vertex " + std::to_string(v) + " lists a foreign half-edge");
      ++seen[static_cast<std::size_t>(h)];
    }
  for (int h = 0; h < m; ++h)
    if (seen[static_cast<std::size_t>(h)] != 1)
      throw Error(ErrorKind::StructuralError, "half-edge " + std::to_string(h) + " appears " +
                                                  std::to_string(seen[static_cast<std::size_t>(h)]) + " times in rotations");
}

/// Face traversal of the rotation system, closing the forest at infinity by
/// the boundary sectors between consecutive leaf slots. Colors propagate
/// from the sector 0 face (A) across edges; an inconsistency throws
/// ColoringContradiction.
inline void compute_faces(GaussGraph& g) {
  check_structure(g);
  const int m = g.half_edge_count();
  auto leaves = g.leaves_by_slot();
  std::vector<int> present;
  for (int k = 0; k < 4 * g.n; ++k)
    if (leaves[static_cast<std::size_t>(k)] >= 0) present.push_back(k);
  if (present.empty()) throw Error(ErrorKind::StructuralError, "graph has no leaves");
  for (int k : present)
    if (g.valency(leaves[static_cast<std::size_t>(k)]) != 1)
      throw Error(ErrorKind::StructuralError, "leaf " + std::to_string(k) + " must have valency 1");

  auto next_present = [&](int k) {
    auto it = std::upper_bound(present.begin(), present.end(), k);
    return it == present.end() ? present.front() : *it;
  };

  g.faces.clear();
  g.face_of.assign(static_cast<std::size_t>(m), -1);
  for (int start = 0; start < m; ++start) {
    if (g.face_of[static_cast<std::size_t>(start)] >= 0) continue;
    Face f;
    int id = static_cast<int>(g.faces.size());
    int h = start;
    int guard = 0;
    do {
      if (g.face_of[static_cast<std::size_t>(h)] >= 0)
        throw Error(ErrorKind::StructuralError, "face traversal revisited a half-edge");
      g.face_of[static_cast<std::size_t>(h)] = id;
      f.walk.push_back(h);
      int v = g.he(h).to;
      if (g.vertex(v).kind == VertexKind::Leaf) {
        int k = g.vertex(v).slot;
        f.sectors.push_back(k);
        int nxt = leaves[static_cast<std::size_t>(next_present(k))];
        h = g.rot(nxt).front();
      } else {
        h = g.rot_prev(g.he(h).twin);
      }
      if (++guard > m + 1) throw Error(ErrorKind::StructuralError, "face traversal does not close");
    } while (h != start);
    g.faces.push_back(std::move(f));
  }

  // color propagation
  const int nf = static_cast<int>(g.faces.size());
  std::vector<int> color(static_cast<std::size_t>(nf), -1);
  int seed_face = -1;
  for (int f = 0; f < nf && seed_face < 0; ++f)
    for (int k : g.faces[static_cast<std::size_t>(f)].sectors)
      if (k == present.front()) seed_face = f;
  color[static_cast<std::size_t>(seed_face)] = present.front() % 4;
  std::vector<int> queue{seed_face};
  while (!queue.empty()) {
    int f = queue.back();
    queue.pop_back();
    for (int h : g.faces[static_cast<std::size_t>(f)].walk) {
      int other = g.face_of[static_cast<std::size_t>(g.he(h).twin)];
      int want = static_cast<int>(cross(static_cast<FaceColor>(color[static_cast<std::size_t>(f)]), g.he(h).color));
      int& oc = color[static_cast<std::size_t>(other)];
      if (oc < 0) {
        oc = want;
        queue.push_back(other);
      } else if (oc != want) {
        throw Error(ErrorKind::ColoringContradiction,
                    "face across edge " + vertex_label(g, g.he(h).from) + "-" + vertex_label(g, g.he(h).to) + " must be " +
                        face_char(static_cast<FaceColor>(want)) + " but is " + face_char(static_cast<FaceColor>(oc)));
      }
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (color[static_cast<std::size_t>(f)] < 0) throw Error(ErrorKind::StructuralError, "face not reachable from sector 0");
    g.faces[static_cast<std::size_t>(f)].color = static_cast<FaceColor>(color[static_cast<std::size_t>(f)]);
  }
}

/// Number of connected components containing at least one edge.
inline int tree_count(const GaussGraph& g) {
  std::vector<int> comp(static_cast<std::size_t>(g.vertex_count()), -1);
  int trees = 0;
  for (int s = 0; s < g.vertex_count(); ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0 || g.valency(s) == 0) continue;
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = trees;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int h : g.rot(v)) {
        int w = g.he(h).to;
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = trees;
          stack.push_back(w);
        }
      }
    }
    ++trees;
  }
  return trees;
}

/// Every violated rule, with location. Structural malformation throws instead.
inline ValidationReport validate(const GaussGraph& g) {
  check_structure(g);
  ValidationReport out;
  auto add = [&](std::string rule, std::string where) { out.push_back({std::move(rule), std::move(where)}); };
  const int n = g.n;

  // leaves
  int leaf_count = g.count(VertexKind::Leaf);
  if (leaf_count != 4 * n) add("leaf count != 4n", std::to_string(leaf_count) + " leaves for n=" + std::to_string(n));
  std::set<int> slots;
  bool slots_ok = true;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto& x = g.vertex(v);
    if (x.kind != VertexKind::Leaf) continue;
    if (x.slot < 0 || x.slot >= 4 * n || !slots.insert(x.slot).second) {
      add("leaf slot", vertex_label(g, v));
      slots_ok = false;
      continue;
    }
    if (g.valency(v) != 1) {
      add("leaf valency", vertex_label(g, v));
      slots_ok = false;
      continue;
    }
    Color want = x.slot % 2 == 0 ? Color::Red : Color::Blue;
    if (g.he(g.rot(v).front()).color != want) add("leaf color parity", vertex_label(g, v));
  }

  // loops, multi-edges, cycles
  std::vector<int> parent(static_cast<std::size_t>(g.vertex_count()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  std::set<std::pair<int, int>> pairs;
  bool forest = true;
  for (int h = 0; h < g.half_edge_count(); h += 2) {
    int u = g.he(h).from, v = g.he(h).to;
    if (u == v) {
      add("loop", vertex_label(g, u));
      forest = false;
      continue;
    }
    if (!pairs.insert({std::min(u, v), std::max(u, v)}).second) {
      add("multi-edge", vertex_label(g, u) + "-" + vertex_label(g, v));
      forest = false;
      continue;
    }
    int a = find(u), b = find(v);
    if (a == b) {
      add("cycle", vertex_label(g, u) + "-" + vertex_label(g, v));
      forest = false;
    } else {
      parent[static_cast<std::size_t>(a)] = b;
    }
  }

  // internal vertices
  int mass = 0, crit_count = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto& x = g.vertex(v);
    const int val = g.valency(v);
    if (x.kind == VertexKind::Root) {
      mass += x.multiplicity;
      if (x.multiplicity < 1) add("root multiplicity", vertex_label(g, v));
      if (val != 4 * x.multiplicity) add("root valency != 4k", vertex_label(g, v) + " valency " + std::to_string(val));
      for (int i = 0; i < val; ++i) {
        int a = g.rot(v)[static_cast<std::size_t>(i)], b = g.rot(v)[static_cast<std::size_t>((i + 1) % val)];
        if (g.he(a).color == g.he(b).color) {
          add("root color alternation", vertex_label(g, v));
          break;
        }
      }
    } else if (x.kind == VertexKind::Crit) {
      ++crit_count;
      if (val % 2 != 0) add("odd monochromatic valency", vertex_label(g, v) + " valency " + std::to_string(val));
      else if (val < 4 || val > 2 * n) add("crit valency bound", vertex_label(g, v) + " valency " + std::to_string(val));
      for (int h : g.rot(v))
        if (g.he(h).color != x.color) {
          add("crit monochromatic", vertex_label(g, v));
          break;
        }
    }
  }
  if (mass != n) add("root mass != n", std::to_string(mass));
  if (crit_count > n - 1) add("crit count > n-1", std::to_string(crit_count));

  // faces
  if (!slots_ok || leaf_count != 4 * n || !forest) return out;
  GaussGraph f = g;
  try {
    compute_faces(f);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ColoringContradiction) {
      add("face coloring", e.what());
      return out;
    }
    throw;
  }
  for (const auto& face : f.faces)
    for (int k : face.sectors)
      if (static_cast<int>(face.color) != k % 4) add("sector color", "sector " + std::to_string(k));
  for (int h = 0; h < f.half_edge_count(); h += 2) {
    auto a = f.faces[static_cast<std::size_t>(f.face_of[static_cast<std::size_t>(h)])].color;
    auto b = f.faces[static_cast<std::size_t>(f.face_of[static_cast<std::size_t>(h + 1)])].color;
    std::set<FaceColor> pair{a, b};
    bool ok = f.he(h).color == Color::Red
                  ? (pair == std::set{FaceColor::A, FaceColor::D} || pair == std::set{FaceColor::B, FaceColor::C})
                  : (pair == std::set{FaceColor::A, FaceColor::B} || pair == std::set{FaceColor::C, FaceColor::D});
    if (!ok) add("edge face colors", vertex_label(f, f.he(h).from) + "-" + vertex_label(f, f.he(h).to));
  }
  int expected_faces = f.edge_count() - (f.vertex_count() - leaf_count) + 1;
  if (static_cast<int>(f.faces.size()) != expected_faces)
    add("euler face count", std::to_string(f.faces.size()) + " != " + std::to_string(expected_faces));
  for (int v = 0; v < f.vertex_count(); ++v) {
    const auto& x = f.vertex(v);
    if (x.kind == VertexKind::Leaf) continue;
    const auto& r = f.rot(v);
    for (std::size_t i = 0; i < r.size(); ++i) {
      int cur = static_cast<int>(f.faces[static_cast<std::size_t>(f.face_of[static_cast<std::size_t>(r[i])])].color);
      int nxt = static_cast<int>(f.faces[static_cast<std::size_t>(f.face_of[static_cast<std::size_t>(r[(i + 1) % r.size()])])].color);
      bool ok = x.kind == VertexKind::Root ? nxt == (cur + 1) % 4 : nxt == static_cast<int>(cross(static_cast<FaceColor>(cur), x.color));
      if (!ok) {
        add(x.kind == VertexKind::Root ? "root faces not A,B,C,D counterclockwise" : "crit faces not alternating",
            vertex_label(f, v));
        break;
      }
    }
  }
  return out;
}

inline bool is_valid(const GaussGraph& g) {
  try {
    return validate(g).empty();
  } catch (const Error&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Canonical codes.
//
//   code  := "n" <n> "|" tree ("|" tree)*
//   tree  := "T[" token (" " token)* "]"
//   token := "L"<slot> | "r:"<R|B><valency> | "c:"<R|B><valency> | "^"
//
// Trees appear in increasing order of their minimal leaf slot. Each tree is a
// depth-first walk from that leaf; at every internal vertex the children
// follow the rotation counterclockwise from the edge of arrival, and "^"
// closes each internal vertex other than the first one. A root token carries
// the color of its arrival edge; a critical token carries its single color.

using CanonicalCode = std::string;

namespace detail {

inline void encode_from(const GaussGraph& g, int v, int back, bool top, std::string& out) {
  const auto& x = g.vertex(v);
  out += ' ';
  if (x.kind == VertexKind::Leaf) {
    out += 'L' + std::to_string(x.slot);
    return;
  }
  out += x.kind == VertexKind::Root ? "r:" : "c:";
  out += color_char(x.kind == VertexKind::Root ? g.he(back).color : x.color);
  out += std::to_string(g.valency(v));
  const auto& r = g.rot(v);
  int i0 = g.rotation_index(back);
  for (int i = 1; i < static_cast<int>(r.size()); ++i) {
    int h = r[static_cast<std::size_t>((i0 + i) % static_cast<int>(r.size()))];
    encode_from(g, g.he(h).to, g.he(h).twin, false, out);
  }
  if (!top) out += " ^";
}

}  // namespace detail

inline CanonicalCode canonical_code(const GaussGraph& g) {
  auto leaves = g.leaves_by_slot();
  std::vector<bool> used(static_cast<std::size_t>(g.vertex_count()), false);
  std::string code = "n" + std::to_string(g.n);
  for (int k = 0; k < 4 * g.n; ++k) {
    int leaf = leaves[static_cast<std::size_t>(k)];
    if (leaf < 0 || used[static_cast<std::size_t>(leaf)] || g.valency(leaf) != 1) continue;
    // mark the tree
    std::vector<int> stack{leaf};
    used[static_cast<std::size_t>(leaf)] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int h : g.rot(v)) {
        int w = g.he(h).to;
        if (!used[static_cast<std::size_t>(w)]) {
          used[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
      }
    }
    std::string walk = "L" + std::to_string(k);
    int h = g.rot(leaf).front();
    int child = g.he(h).to;
    if (g.vertex(child).kind == VertexKind::Leaf) {
      walk += " L" + std::to_string(g.vertex(child).slot);
    } else {
      detail::encode_from(g, child, g.he(h).twin, true, walk);
    }
    code += "|T[" + walk + "]";
  }
  return code;
}

/// Rebuilds the graph of a code, with faces computed. Throws ParseError on
/// malformed text.
inline GaussGraph decode(const CanonicalCode& code) {
  auto fail = [&](const std::string& why) -> void { throw Error(ErrorKind::ParseError, why + " in code '" + code + "'"); };
  auto parts = split(code, '|');
  if (parts.empty() || parts[0].size() < 2 || parts[0][0] != 'n') fail("missing n<k> header");
  GaussGraph g;
  try {
    g.n = std::stoi(std::string(parts[0].substr(1)));
  } catch (const std::exception&) {
    fail("bad degree");
  }
  if (g.n < 1) fail("bad degree");
  for (std::size_t t = 1; t < parts.size(); ++t) {
    auto tree = parts[t];
    if (tree.size() < 4 || tree.substr(0, 2) != "T[" || tree.back() != ']') fail("bad tree");
    auto tokens_sv = split(tree.substr(2, tree.size() - 3), ' ');
    std::vector<std::string> tokens;
    for (auto s : tokens_sv)
      if (!s.empty()) tokens.emplace_back(s);
    std::size_t pos = 0;
    auto parse_int = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) fail("bad integer");
        return v;
      } catch (const Error&) {
        throw;
      } catch (const std::exception&) {
        fail("bad integer");
      }
      return 0;
    };
    // returns vertex id; `arrival` is the color of the edge from the parent
    auto make_vertex = [&](const std::string& tok, std::optional<Color>& first_color, int& val) {
      if (tok[0] == 'L') {
        val = 1;
        return g.add_vertex(Vertex::leaf(parse_int(tok.substr(1))));
      }
      if (tok.size() < 4 || (tok.substr(0, 2) != "r:" && tok.substr(0, 2) != "c:") || (tok[2] != 'R' && tok[2] != 'B'))
        fail("bad token '" + tok + "'");
      Color c = tok[2] == 'R' ? Color::Red : Color::Blue;
      val = parse_int(tok.substr(3));
      if (val < 2) fail("bad valency");
      first_color = c;
      if (tok[0] == 'r') {
        if (val % 4 != 0) fail("root valency not a multiple of 4");
        return g.add_vertex(Vertex::root(val / 4));
      }
      return g.add_vertex(Vertex::crit(c));
    };
    std::function<void(int, Color)> build = [&](int parent, Color arrival) {
      if (pos >= tokens.size()) fail("truncated walk");
      std::string tok = tokens[pos++];
      std::optional<Color> first;
      int val = 0;
      int v = make_vertex(tok, first, val);
      int h = g.add_edge(parent, v, arrival);
      (void)h;
      if (tok[0] == 'L') return;
      if (first && *first != arrival) fail("arrival color mismatch at '" + tok + "'");
      bool is_root = tok[0] == 'r';
      for (int i = 1; i < val; ++i) {
        Color c = is_root ? (i % 2 == 0 ? arrival : opposite(arrival)) : arrival;
        build(v, c);
      }
      if (pos >= tokens.size() || tokens[pos] != "^") fail("missing backtrack after '" + tok + "'");
      ++pos;
    };
    if (tokens.size() < 2 || tokens[0][0] != 'L') fail("tree must start with a leaf");
    std::optional<Color> dummy;
    int v0val = 0;
    int leaf = make_vertex(tokens[0], dummy, v0val);
    Color leaf_color = g.vertex(leaf).slot % 2 == 0 ? Color::Red : Color::Blue;
    pos = 1;
    std::string tok = tokens[pos++];
    std::optional<Color> first;
    int val = 0;
    int v = make_vertex(tok, first, val);
    g.add_edge(leaf, v, leaf_color);
    if (tok[0] != 'L') {
      if (first && *first != leaf_color) fail("arrival color mismatch at '" + tok + "'");
      bool is_root = tok[0] == 'r';
      for (int i = 1; i < val; ++i) {
        Color c = is_root ? (i % 2 == 0 ? leaf_color : opposite(leaf_color)) : leaf_color;
        build(v, c);
      }
    }
    if (pos != tokens.size()) fail("trailing tokens");
  }
  compute_faces(g);
  return g;
}

/// Codimension proxy: sum over critical vertices of (val/2 - 1) plus twice the
/// excess multiplicity of roots.
inline int codim(const GaussGraph& g) {
  int c = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const auto& x = g.vertex(v);
    if (x.kind == VertexKind::Crit) c += g.valency(v) / 2 - 1;
    if (x.kind == VertexKind::Root) c += 2 * (x.multiplicity - 1);
  }
  return c;
}

inline bool is_generic(const GaussGraph& g) { return codim(g) == 0; }

}  // namespace skizze
