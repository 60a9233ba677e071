#include <gtest/gtest.h>

#include <random>

#include "graph_oracles.hpp"
#include "graphs.hpp"
#include "skizze/moves.hpp"

using namespace skizze;
using namespace skizze::fixtures;

namespace {

bool has_kind(const std::vector<MoveDescriptor>& ms, MoveKind k) {
  return std::any_of(ms.begin(), ms.end(), [k](const MoveDescriptor& d) { return d.kind == k; });
}

}  // namespace

TEST(Generic, CountsMatchBruteForcePairs) {
  EXPECT_EQ(enumerate_generic(1).size(), 1u);
  EXPECT_EQ(enumerate_generic(2).size(), 4u);
  for (int n = 1; n <= 4; ++n)
    EXPECT_EQ(static_cast<int>(enumerate_generic(n).size()), oracle::generic_pair_count(n)) << "n=" << n;
}

TEST(Generic, EveryGenericGraphValidates) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& c : enumerate_generic(n)) {
      auto g = decode(c);
      EXPECT_TRUE(validate(g).empty()) << c;
      EXPECT_TRUE(is_generic(g));
      EXPECT_EQ(tree_count(g), n);
    }
}

TEST(Generic, HandBuiltForestIsAmongThem) {
  auto codes = enumerate_generic(2);
  EXPECT_NE(std::find(codes.begin(), codes.end(), canonical_code(generic_n2())), codes.end());
}

TEST(Moves, IdentityGraphHasNone) { EXPECT_TRUE(enumerate_moves(identity_graph()).empty()); }

TEST(Moves, GenericN2) {
  auto g = generic_n2();
  auto ms = enumerate_moves(g);
  EXPECT_TRUE(has_kind(ms, MoveKind::Case1));
  EXPECT_FALSE(has_kind(ms, MoveKind::Case2));
  bool both_roots = false;
  for (const auto& d : ms) {
    if (d.kind != MoveKind::Case3 || d.roots.size() != 2) continue;
    both_roots = true;
    EXPECT_EQ(canonical_code(apply_contract(g, d)), maximal_element(2));
  }
  EXPECT_TRUE(both_roots);
  for (const auto& d : ms) {
    if (d.kind == MoveKind::Case1) {
      EXPECT_EQ(d.edges.size(), 2u);
    }
  }
}

TEST(Moves, RedPinchOfGenericGivesZ2Minus1) {
  auto g = generic_n2();
  compute_faces(g);
  bool found = false;
  for (const auto& d : enumerate_moves(g)) {
    if (d.kind == MoveKind::Case1 && d.color == Color::Red)
      found = found || canonical_code(apply_contract(g, d)) == canonical_code(z2_minus_1());
  }
  EXPECT_TRUE(found);
}

TEST(Moves, Z2Minus1) {
  auto g = z2_minus_1();
  auto ms = enumerate_moves(g);
  EXPECT_FALSE(has_kind(ms, MoveKind::Case2));
  ASSERT_TRUE(has_kind(ms, MoveKind::Case3));
  for (const auto& d : ms) {
    if (d.kind == MoveKind::Case3) {
      EXPECT_EQ(canonical_code(apply_contract(g, d)), maximal_element(2));
    }
  }
}

TEST(Moves, Case2MergesTwoValencyFourCrits) {
  // search the n=3 closure for adjacent same-colored crit vertices
  auto p = build_poset(3);
  bool seen = false;
  for (const auto& c : p.nodes) {
    auto g = decode(c);
    for (const auto& d : enumerate_moves(g)) {
      if (d.kind != MoveKind::Case2) continue;
      int a = g.valency(g.he(d.edges[0]).from), b = g.valency(g.he(d.edges[0]).to);
      if (a != 4 || b != 4) continue;
      auto r = apply_contract(g, d);
      bool six = false;
      for (int v = 0; v < r.vertex_count(); ++v) six = six || (r.vertex(v).kind == VertexKind::Crit && r.valency(v) == 6);
      EXPECT_TRUE(six);
      EXPECT_EQ(r.edge_count(), g.edge_count() - 1);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Moves, InvalidDescriptorsAreRefused) {
  auto g = z2_minus_1();
  compute_faces(g);
  auto expect_refused = [&](const MoveDescriptor& d) {
    try {
      apply_contract(g, d);
      ADD_FAILURE() << "move accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::RefusedMove);
    }
  };
  expect_refused({MoveKind::Case2, -1, {0}, Color::Red, {}});           // root-to-leaf edge
  expect_refused({MoveKind::Case3, 0, {}, Color::Red, {0}});            // one root
  expect_refused({MoveKind::Case1, 0, {0, 0, 0}, Color::Red, {}});      // valency 6 > 2n
}

TEST(Poset, N1IsASingleNode) {
  auto p = build_poset(1);
  EXPECT_EQ(p.nodes.size(), 1u);
  EXPECT_TRUE(p.covers.empty());
  EXPECT_EQ(p.maximal, maximal_element(1));
}

TEST(Poset, N2GenericMinimaAndStarMaximum) {
  auto p = build_poset(2);
  auto generic = enumerate_generic(2);
  for (const auto& c : generic) {
    EXPECT_TRUE(p.nodes.count(c));
    EXPECT_TRUE(p.children_of(c).empty());
    EXPECT_TRUE(p.below(c, p.maximal));
  }
  EXPECT_EQ(p.maximal_nodes(), std::vector<CanonicalCode>{maximal_element(2)});
  EXPECT_TRUE(p.nodes.count(canonical_code(z2_minus_1())));
}

TEST(Poset, OrderIsAntisymmetricAndCodimMonotone) {
  for (int n = 2; n <= 3; ++n) {
    auto p = build_poset(n);
    EXPECT_EQ(p.maximal_nodes().size(), 1u);
    for (const auto& e : p.covers) {
      int a = codim(decode(e.child)), b = codim(decode(e.parent));
      if (e.kind == MoveKind::Case2) {
        EXPECT_EQ(a, b);
      } else {
        EXPECT_LT(a, b);
      }
      EXPECT_FALSE(p.below(e.parent, e.child)) << e.child << " / " << e.parent;
    }
  }
}

TEST(Poset, CapIsEnforced) {
  try {
    build_poset(5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
    EXPECT_NE(std::string(e.what()).find("estimated"), std::string::npos);
  }
}

TEST(Poset, CatalogRoundTrips) {
  auto p = build_poset(2);
  auto text = format_catalog(p);
  auto q = parse_catalog(text);
  EXPECT_EQ(q.nodes, p.nodes);
  EXPECT_EQ(q.covers.size(), p.covers.size());
  EXPECT_EQ(q.maximal, p.maximal);
  EXPECT_EQ(format_catalog(q), text);
}

TEST(Codes, EqualityMatchesBruteForceIsomorphismAtN2) {
  auto p = build_poset(2);
  std::vector<GaussGraph> graphs;
  std::mt19937 rng(7);
  for (const auto& c : p.nodes) {
    graphs.push_back(decode(c));
    graphs.push_back(oracle::scramble(graphs.back(), rng));
  }
  for (std::size_t i = 0; i < graphs.size(); ++i)
    for (std::size_t j = 0; j < graphs.size(); ++j)
      EXPECT_EQ(canonical_code(graphs[i]) == canonical_code(graphs[j]), oracle::isomorphic(graphs[i], graphs[j]))
          << canonical_code(graphs[i]) << " vs " << canonical_code(graphs[j]);
}

TEST(Codes, DecodeRoundTripsOverClosureN3) {
  auto p = build_poset(3);
  std::mt19937 rng(11);
  for (const auto& c : p.nodes) {
    auto g = decode(c);
    EXPECT_EQ(canonical_code(g), c);
    EXPECT_TRUE(oracle::isomorphic(g, oracle::scramble(g, rng)));
    EXPECT_EQ(canonical_code(oracle::scramble(g, rng)), c);
  }
}
