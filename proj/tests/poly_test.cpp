#include <random>

#include <gtest/gtest.h>

#include "skizze/poly.hpp"

namespace skizze {
namespace {

std::vector<Complex> random_points(std::mt19937& rng, int n, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Complex> out;
  for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng));
  return out;
}

// Greedy multiset match; returns the worst distance.
double multiset_distance(std::vector<Complex> a, const RootSet& b) {
  std::vector<Complex> expanded;
  for (const auto& r : b)
    for (int k = 0; k < r.multiplicity; ++k) expanded.push_back(r.point);
  EXPECT_EQ(a.size(), expanded.size());
  double worst = 0.0;
  for (auto z : expanded) {
    auto it = std::min_element(a.begin(), a.end(), [&](Complex x, Complex y) { return std::abs(x - z) < std::abs(y - z); });
    worst = std::max(worst, std::abs(*it - z));
    a.erase(it);
  }
  return worst;
}

TEST(FromRoots, DifferenceOfSquares) {
  std::vector<Complex> r{1.0, -1.0};
  EXPECT_EQ(from_roots(r), Polynomial::monic({1.0, 0.0, -1.0}));
}

TEST(FromRoots, RepeatedZero) {
  std::vector<Complex> r{0.0, 0.0, 0.0};
  EXPECT_EQ(from_roots(r), Polynomial::monic({1.0, 0.0, 0.0, 0.0}));
}

TEST(FromRoots, EmptyIsInvalid) {
  try {
    from_roots({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(FromRoots, VanishesAtEachRoot) {
  std::mt19937 rng(7);
  auto r = random_points(rng, 6);
  auto p = from_roots(r);
  for (auto z : r) EXPECT_LT(std::abs(p(z)), 1e-9 * p.coefficient_scale());
}

TEST(FindRoots, SimpleAndRepeated) {
  auto roots = find_roots(Polynomial::monic({1.0, 0.0, -1.0}));
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0].point.real(), -1.0, 1e-14);
  EXPECT_NEAR(roots[1].point.real(), 1.0, 1e-14);
  EXPECT_EQ(roots[0].multiplicity, 1);

  auto dbl = find_roots(Polynomial::monic({1.0, 0.0, 0.0}));
  ASSERT_EQ(dbl.size(), 1u);
  EXPECT_EQ(dbl[0].multiplicity, 2);
  EXPECT_LT(std::abs(dbl[0].point), 1e-12);
}

TEST(FindRoots, RoundTripRandom) {
  std::mt19937 rng(11);
  for (int n = 1; n <= 10; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      auto r = random_points(rng, n);
      auto found = find_roots(from_roots(r));
      EXPECT_LT(multiset_distance(r, found), 1e-8) << "n=" << n;
    }
  }
}

TEST(FindRoots, ClustersTripleRoot) {
  Complex a(0.3, -0.7);
  std::vector<Complex> r{a, a, a, Complex(2.0, 1.0)};
  auto found = find_roots(from_roots(r));
  ASSERT_EQ(found.size(), 2u);
  int triple = found[0].multiplicity == 3 ? 0 : 1;
  EXPECT_EQ(found[triple].multiplicity, 3);
  EXPECT_LT(std::abs(found[triple].point - a), 1e-9);
}

TEST(FindRoots, IterationCapReportsBestIterate) {
  RootOptions opt;
  opt.max_iterations = 1;
  opt.tol = 1e-15;
  std::mt19937 rng(3);
  try {
    find_roots(from_roots(random_points(rng, 7)), opt);
    FAIL();
  } catch (const RootFindingFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NumericFailure);
    EXPECT_EQ(e.best_iterate().size(), 7u);
  }
}

TEST(CriticalData, Examples) {
  auto cd = critical_data(Polynomial::monic({1.0, 0.0, -3.0, 0.0}));
  ASSERT_EQ(cd.size(), 2u);
  EXPECT_NEAR(cd[0].point.real(), -1.0, 1e-13);
  EXPECT_NEAR(cd[0].value.real(), 2.0, 1e-12);
  EXPECT_NEAR(cd[1].value.real(), -2.0, 1e-12);

  for (int n = 2; n <= 6; ++n) {
    std::vector<Complex> c(static_cast<std::size_t>(n + 1), 0.0);
    c[0] = 1.0;
    auto z = critical_data(Polynomial::monic(c));
    ASSERT_EQ(z.size(), 1u);
    EXPECT_EQ(z[0].multiplicity, n - 1);
    EXPECT_LT(std::abs(z[0].value), 1e-12);
  }

  Complex c0(0.4, 1.3);
  auto q = critical_data(Polynomial::monic({1.0, 0.0, -c0}));
  ASSERT_EQ(q.size(), 1u);
  EXPECT_LT(std::abs(q[0].value + c0), 1e-14);
  EXPECT_TRUE(critical_data(Polynomial::monic({1.0, 2.0})).empty());
}

TEST(CriticalData, MultiplicitiesSumToDegreeMinusOne) {
  std::mt19937 rng(5);
  for (int n = 2; n <= 9; ++n) {
    auto cd = critical_data(from_roots(random_points(rng, n)));
    int total = 0;
    for (const auto& c : cd) total += c.multiplicity;
    EXPECT_EQ(total, n - 1);
  }
}

TEST(RootBound, Examples) {
  EXPECT_GE(root_bound(Polynomial::monic({1.0, 0.0, -1.0})), 2.0);
  EXPECT_DOUBLE_EQ(root_bound(Polynomial::monic({1.0, 0.0})), 1.5);
}

TEST(RootBound, ContainsRootsAndCriticalPoints) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = from_roots(random_points(rng, 5, 3.0));
    double r = root_bound(p);
    for (const auto& z : find_roots(p)) EXPECT_LT(std::abs(z.point), r);
    for (const auto& z : critical_data(p)) EXPECT_LT(std::abs(z.point), r);
  }
}

TEST(Deflate, MultiplicationOracle) {
  std::vector<Complex> r{0.0, 1.0, 5.0};
  auto q = deflate(from_roots(r), 1.0);
  std::vector<Complex> rest{0.0, 5.0};
  EXPECT_EQ(q, from_roots(rest));
  std::mt19937 rng(2);
  auto pts = random_points(rng, 6);
  auto p = from_roots(pts);
  auto prod = deflate(p, pts[2]) * Polynomial({1.0, -pts[2]});
  for (std::size_t i = 0; i < p.coeffs().size(); ++i)
    EXPECT_LT(std::abs(prod.coeffs()[i] - p.coeffs()[i]), 1e-12 * p.coefficient_scale());
}

TEST(Discriminant, VanishesOnCollision) {
  std::vector<Complex> dbl{1.0, 1.0, -2.0};
  EXPECT_LT(std::abs(discriminant(from_roots(dbl))), 1e-12);
  std::vector<Complex> sep{1.0, -1.0};
  EXPECT_GT(std::abs(discriminant(from_roots(sep))), 1.0);
}

TEST(TextFormat, ParseAndFormat) {
  auto p = parse_polynomial("1:0,0:0,-1:0");
  EXPECT_EQ(p, Polynomial::monic({1.0, 0.0, -1.0}));
  EXPECT_EQ(parse_polynomial(format_polynomial(p)), p);
  EXPECT_THROW(parse_polynomial("2:0,1:0"), Error);
  EXPECT_THROW(parse_polynomial("1:0,x:0"), Error);
  EXPECT_THROW(parse_polynomial("1:0"), Error);
}

}  // namespace
}  // namespace skizze
