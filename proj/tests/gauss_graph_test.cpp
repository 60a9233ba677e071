#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "graphs.hpp"
#include "skizze/gauss_graph.hpp"

using namespace skizze;
using namespace skizze::fixtures;

namespace {

// Quadrant of P at a far point in the middle of boundary sector k.
int sector_quadrant(const Polynomial& p, int n, int k) {
  double theta = (k + 0.5) * std::numbers::pi / (2.0 * n);
  Complex w = p(std::polar(50.0, theta));
  double a = std::atan2(w.imag(), w.real());
  if (a < 0) a += 2 * std::numbers::pi;
  return static_cast<int>(a / (std::numbers::pi / 2));
}

}  // namespace

TEST(GaussGraph, IdentityGraphValidatesAndHasQuadrantFaces) {
  auto g = identity_graph();
  EXPECT_TRUE(validate(g).empty());
  compute_faces(g);
  ASSERT_EQ(g.faces.size(), 4u);
  for (const auto& f : g.faces) {
    ASSERT_EQ(f.sectors.size(), 1u);
    EXPECT_EQ(static_cast<int>(f.color), f.sectors[0]);
  }
  EXPECT_EQ(canonical_code(g), "n1|T[L0 r:R4 L1 L2 L3]");
}

TEST(GaussGraph, Z2Minus1FacesMatchSignSampling) {
  auto g = z2_minus_1();
  EXPECT_TRUE(validate(g).empty());
  compute_faces(g);
  EXPECT_EQ(g.faces.size(), 8u);
  auto p = Polynomial::monic({1.0, 0.0, -1.0});
  for (const auto& f : g.faces)
    for (int k : f.sectors) EXPECT_EQ(static_cast<int>(f.color), sector_quadrant(p, 2, k)) << "sector " << k;
}

TEST(GaussGraph, FaceCountIsEdgesMinusInternalPlusOne) {
  for (auto g : {identity_graph(), z2_minus_1(), generic_n2(), star(3)}) {
    compute_faces(g);
    int internal = g.vertex_count() - g.count(VertexKind::Leaf);
    EXPECT_EQ(static_cast<int>(g.faces.size()), g.edge_count() - internal + 1);
  }
}

TEST(GaussGraph, CodeIgnoresIdsAndRotationStart) {
  auto a = z2_minus_1(0);
  auto b = z2_minus_1(1);
  auto c = z2_minus_1(3);
  EXPECT_EQ(canonical_code(a), canonical_code(b));
  EXPECT_EQ(canonical_code(a), canonical_code(c));
}

TEST(GaussGraph, CodeDistinguishesStrata) {
  EXPECT_NE(canonical_code(z2_minus_1()), canonical_code(generic_n2()));
  EXPECT_NE(canonical_code(star(2)), canonical_code(generic_n2()));
}

TEST(GaussGraph, DecodeRoundTrips) {
  for (const auto& g : {identity_graph(), z2_minus_1(), generic_n2(), star(2), star(4)}) {
    auto code = canonical_code(g);
    auto d = decode(code);
    EXPECT_EQ(canonical_code(d), code);
    EXPECT_TRUE(validate(d).empty()) << code;
    EXPECT_EQ(d.vertex_count(), g.vertex_count());
    EXPECT_EQ(d.edge_count(), g.edge_count());
  }
}

TEST(GaussGraph, DecodeRejectsGarbage) {
  for (std::string s : {"", "x1|T[L0]", "n1|T[L0 r:R4 L1 L2]", "n1|T[L0 q:R4 L1 L2 L3]", "n1|T[L0 r:R4 L1 L2 L3 L4]",
                        "n1|L0 r:R4 L1 L2 L3"})
    EXPECT_THROW(decode(s), Error) << s;
}

TEST(GaussGraph, MissingLeafIsReported) {
  // the identity graph without leaf 3
  std::vector<Vertex> v{Vertex::root(1), Vertex::leaf(0), Vertex::leaf(1), Vertex::leaf(2)};
  auto h = build(1, v, {{{1, R}, {2, B}, {3, R}}, {{0, R}}, {{0, B}}, {{0, R}}});
  auto rep = validate(h);
  EXPECT_TRUE(has_rule(rep, "leaf count != 4n"));
  EXPECT_TRUE(has_rule(rep, "root valency != 4k"));
}

TEST(GaussGraph, OddCritValencyIsReported) {
  // n = 2 forest with a red crit of valency 3 hanging off the right root
  std::vector<Vertex> v{Vertex::root(2), Vertex::crit(R)};
  for (int k = 0; k < 8; ++k) v.push_back(Vertex::leaf(k));
  std::vector<std::vector<Nb>> a(11);
  a[0] = {{2, R}, {3, B}, {1, R}, {5, B}, {6, R}, {7, B}, {8, R}, {9, B}};
  a[1] = {{0, R}, {4, R}, {10, R}};
  for (int k = 0; k < 8; ++k) a[static_cast<std::size_t>(2 + k)] = {{k == 2 || k == 8 ? 1 : 0, k % 2 == 0 ? R : B}};
  a[4] = {{1, R}};
  std::vector<Vertex> vv = v;
  vv.push_back(Vertex::leaf(8));  // slot out of range on purpose
  a[10] = {{1, R}};
  auto g = build(2, vv, a);
  auto rep = validate(g);
  EXPECT_TRUE(has_rule(rep, "odd monochromatic valency"));
  EXPECT_TRUE(has_rule(rep, "leaf slot"));
}

TEST(GaussGraph, MiscoloredEdgeIsAContradiction) {
  auto g = z2_minus_1();
  // recolor one crit-to-root edge blue
  for (auto& e : g.half_edges)
    if ((e.from == 2 && e.to == 0) || (e.from == 0 && e.to == 2)) e.color = Color::Blue;
  EXPECT_THROW(compute_faces(g), Error);
  try {
    compute_faces(g);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ColoringContradiction);
  }
  EXPECT_FALSE(validate(g).empty());
}

TEST(GaussGraph, LeafParityViolation) {
  auto g = identity_graph();
  for (auto& e : g.half_edges) e.color = opposite(e.color);
  auto rep = validate(g);
  EXPECT_TRUE(has_rule(rep, "leaf color parity"));
}

TEST(GaussGraph, BrokenTwinsAreStructuralErrors) {
  auto g = identity_graph();
  g.half_edges[0].twin = 3;
  try {
    validate(g);
    FAIL() << "expected structural error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StructuralError);
  }
  auto h = identity_graph();
  h.rotation[0].push_back(h.rotation[0][0]);
  EXPECT_THROW(validate(h), Error);
}

TEST(GaussGraph, Codim) {
  EXPECT_EQ(codim(generic_n2()), 0);
  EXPECT_EQ(codim(z2_minus_1()), 1);
  EXPECT_EQ(codim(star(2)), 2);
  EXPECT_EQ(codim(star(3)), 4);
}
