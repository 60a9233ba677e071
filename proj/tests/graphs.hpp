#pragma once

// Hand-built graphs for the unit tests. Vertices are given with their
// counterclockwise neighbor lists; the builder pairs half-edges up.

#include <map>
#include <utility>
#include <vector>

#include "skizze/gauss_graph.hpp"

namespace skizze::fixtures {

struct Nb {
  int to;
  Color color;
};

inline GaussGraph build(int n, const std::vector<Vertex>& verts, const std::vector<std::vector<Nb>>& around) {
  GaussGraph g;
  g.n = n;
  for (const auto& v : verts) g.add_vertex(v);
  std::map<std::pair<int, int>, int> he;
  for (int u = 0; u < static_cast<int>(around.size()); ++u)
    for (const auto& nb : around[static_cast<std::size_t>(u)])
      if (u < nb.to) he[{u, nb.to}] = g.add_edge(u, nb.to, nb.color);
  for (int u = 0; u < static_cast<int>(around.size()); ++u) {
    std::vector<int> r;
    for (const auto& nb : around[static_cast<std::size_t>(u)]) {
      int h = u < nb.to ? he.at({u, nb.to}) : g.he(he.at({nb.to, u})).twin;
      r.push_back(h);
    }
    g.rotation[static_cast<std::size_t>(u)] = r;
  }
  return g;
}

constexpr Color R = Color::Red;
constexpr Color B = Color::Blue;

/// P = z: one root, leaves 0..3.
inline GaussGraph identity_graph() {
  std::vector<Vertex> v{Vertex::root(1), Vertex::leaf(0), Vertex::leaf(1), Vertex::leaf(2), Vertex::leaf(3)};
  return build(1, v, {{{1, R}, {2, B}, {3, R}, {4, B}}, {{0, R}}, {{0, B}}, {{0, R}}, {{0, B}}});
}

/// P = z^2 - 1: roots at +-1, red crit at 0, blue hyperbola branches.
/// `shift` rotates every rotation list, which must not change anything.
inline GaussGraph z2_minus_1(int shift = 0) {
  // 0: root +1, 1: root -1, 2: crit 0, 3..10: leaves 0..7
  std::vector<Vertex> v{Vertex::root(1), Vertex::root(1), Vertex::crit(R)};
  for (int k = 0; k < 8; ++k) v.push_back(Vertex::leaf(k));
  auto L = [](int k) { return 3 + k; };
  std::vector<std::vector<Nb>> a(11);
  a[0] = {{L(0), R}, {L(1), B}, {2, R}, {L(7), B}};
  a[1] = {{2, R}, {L(3), B}, {L(4), R}, {L(5), B}};
  a[2] = {{0, R}, {L(2), R}, {1, R}, {L(6), R}};
  a[static_cast<std::size_t>(L(0))] = {{0, R}};
  a[static_cast<std::size_t>(L(1))] = {{0, B}};
  a[static_cast<std::size_t>(L(2))] = {{2, R}};
  a[static_cast<std::size_t>(L(3))] = {{1, B}};
  a[static_cast<std::size_t>(L(4))] = {{1, R}};
  a[static_cast<std::size_t>(L(5))] = {{1, B}};
  a[static_cast<std::size_t>(L(6))] = {{2, R}};
  a[static_cast<std::size_t>(L(7))] = {{0, B}};
  for (int u = 0; u < 3; ++u) std::rotate(a[static_cast<std::size_t>(u)].begin(), a[static_cast<std::size_t>(u)].begin() + (shift + u) % 4, a[static_cast<std::size_t>(u)].end());
  return build(2, v, a);
}

/// Generic n = 2 forest with red chords {0,2},{4,6} and blue chords {1,7},{3,5}:
/// an X-tree in the right half plane and one in the left.
inline GaussGraph generic_n2() {
  std::vector<Vertex> v{Vertex::root(1), Vertex::root(1)};
  for (int k = 0; k < 8; ++k) v.push_back(Vertex::leaf(k));
  auto L = [](int k) { return 2 + k; };
  std::vector<std::vector<Nb>> a(10);
  // right tree: leaves 7 (B), 0 (R), 1 (B), 2 (R) counterclockwise
  a[0] = {{L(7), B}, {L(0), R}, {L(1), B}, {L(2), R}};
  a[1] = {{L(3), B}, {L(4), R}, {L(5), B}, {L(6), R}};
  for (int k = 0; k < 8; ++k) {
    int root = (k == 7 || k <= 2) ? 0 : 1;
    a[static_cast<std::size_t>(L(k))] = {{root, k % 2 == 0 ? R : B}};
  }
  return build(2, v, a);
}

/// The 4n star of z^n.
inline GaussGraph star(int n) {
  std::vector<Vertex> v{Vertex::root(n)};
  std::vector<std::vector<Nb>> a(static_cast<std::size_t>(4 * n + 1));
  for (int k = 0; k < 4 * n; ++k) {
    v.push_back(Vertex::leaf(k));
    Color c = k % 2 == 0 ? R : B;
    a[0].push_back({k + 1, c});
    a[static_cast<std::size_t>(k + 1)] = {{0, c}};
  }
  return build(n, v, a);
}

inline bool has_rule(const ValidationReport& r, const std::string& rule) {
  for (const auto& v : r)
    if (v.rule == rule) return true;
  return false;
}

}  // namespace skizze::fixtures
