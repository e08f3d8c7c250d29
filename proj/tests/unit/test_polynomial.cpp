#include <gtest/gtest.h>

#include <random>

#include "gmmfit/polynomial.hpp"
#include "oracles.hpp"

using gmmfit::Polynomial;

TEST(Polynomial, HornerMatchesTermSum) {
  Polynomial p({1.0, -2.0, 0.5, 3.0});
  for (double x : {-1.5, 0.0, 0.3, 2.0}) EXPECT_NEAR(p(x), 1 - 2 * x + 0.5 * x * x + 3 * x * x * x, 1e-14);
}

TEST(Polynomial, TrimsTrailingZeros) {
  Polynomial p({1.0, 2.0, 0.0, 0.0});
  EXPECT_EQ(p.degree(), 1);
  EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
}

TEST(Polynomial, RejectsNonFiniteAndOverCap) {
  EXPECT_THROW(Polynomial({1.0, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(Polynomial(std::vector<double>(gmmfit::kMaxDegree + 2, 1.0)), std::invalid_argument);
}

TEST(Polynomial, CalculusAgainstQuadrature) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> c(-1, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> cs(7);
    for (auto& x : cs) x = c(rng);
    Polynomial p(cs);
    EXPECT_NEAR(p.integrate(-0.7, 0.9), oracle::quad([&](double x) { return p(x); }, -0.7, 0.9), 1e-13);
    auto d = p.derivative();
    double h = 1e-5, x0 = 0.3;
    EXPECT_NEAR(d(x0), (p(x0 + h) - p(x0 - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(p.antiderivative()(0.0), 0.0, 0.0);
  }
}

TEST(Polynomial, ComposeAffine) {
  Polynomial p({0.5, -1.0, 2.0, 0.25});
  auto q = p.compose_affine(0.7, -1.3);
  for (double u : {-1.0, -0.2, 0.4, 1.0}) EXPECT_NEAR(q(u), p(0.7 - 1.3 * u), 1e-13);
}

TEST(Polynomial, ProductAndSum) {
  Polynomial a({1.0, 1.0}), b({-1.0, 1.0});
  auto p = a * b;
  EXPECT_EQ(p, Polynomial({-1.0, 0.0, 1.0}));
  EXPECT_EQ((a + b), Polynomial({0.0, 2.0}));
}

TEST(Polynomial, SturmCountsKnownRoots) {
  // (x - 0.1)(x - 0.5)(x + 0.3)
  auto p = Polynomial({-0.1, 1.0}) * Polynomial({-0.5, 1.0}) * Polynomial({0.3, 1.0});
  EXPECT_EQ(gmmfit::sturm_root_count(p, -1.0, 1.0), 3);
  EXPECT_EQ(gmmfit::sturm_root_count(p, 0.0, 0.4), 1);
  auto r = gmmfit::sign_change_roots(p, -1.0, 1.0, 1e-13);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], -0.3, 1e-12);
  EXPECT_NEAR(r[1], 0.1, 1e-12);
  EXPECT_NEAR(r[2], 0.5, 1e-12);
}

TEST(Polynomial, DoubleRootIsNotASignChange) {
  auto p = Polynomial({-0.2, 1.0}) * Polynomial({-0.2, 1.0});
  EXPECT_TRUE(gmmfit::sign_change_roots(p, -1.0, 1.0, 1e-13).empty());
}

TEST(Polynomial, RootsMatchGridBisection) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-1, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> cs(1 + t % 12);
    for (auto& x : cs) x = c(rng);
    Polynomial p(cs);
    auto got = gmmfit::sign_change_roots(p, -1.0, 1.0, 1e-13);
    auto want = oracle::grid_roots([&](double x) { return p(x); }, -1.0, 1.0, 200000);
    ASSERT_EQ(got.size(), want.size()) << "trial " << t;
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  }
}
