#include <gtest/gtest.h>

#include <random>

#include <json.hpp>

#include "gmmfit/piecewise_poly.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gmmfit;

namespace {
PiecewisePolynomial global(std::vector<double> cs, double lo, double hi) {
  return PiecewisePolynomial::from_global(Polynomial(std::move(cs)), lo, hi);
}
}  // namespace

TEST(PiecewisePoly, EvaluateExamples) {
  EXPECT_DOUBLE_EQ(evaluate(global({1.0}, 0, 1), 0.5), 1.0);
  EXPECT_NEAR(evaluate(global({0, 0, 1}, -1, 1), 0.5), 0.25, 1e-15);
  auto p = global({1.0, 2.0}, 0, 1);
  EXPECT_EQ(evaluate(p, -0.1), 0.0);
  EXPECT_EQ(evaluate(p, 1.5), 0.0);
}

TEST(PiecewisePoly, HalfOpenConvention) {
  PiecewisePolynomial p({0.0, 1.0, 2.0}, {Polynomial::constant(1.0), Polynomial::constant(5.0)});
  EXPECT_EQ(p(1.0), 5.0);
  EXPECT_EQ(p(0.0), 1.0);
  EXPECT_EQ(p(2.0), 0.0);
}

TEST(PiecewisePoly, IntegrateExamples) {
  EXPECT_NEAR(integrate(global({0, 0, 1}, 0, 1), 0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(integrate(PiecewisePolynomial(), -3, 4), 0.0);
  EXPECT_NEAR(integrate(global({2.0}, 0, 3), 1, 2), 2.0, 1e-15);
  EXPECT_THROW(integrate(global({2.0}, 0, 3), 2, 1), std::invalid_argument);
}

TEST(PiecewisePoly, IntegralAdditivityAndQuadrature) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 4);
  for (int t = 0; t < 50; ++t) {
    auto p = testutil::random_pp(rng, 1 + t % 6, 5);
    double a = u(rng), b = u(rng), c = u(rng);
    std::vector<double> x{a, b, c};
    std::sort(x.begin(), x.end());
    double whole = integrate(p, x[0], x[2]);
    EXPECT_NEAR(integrate(p, x[0], x[1]) + integrate(p, x[1], x[2]), whole, 1e-12 * std::max(1.0, std::abs(whole)));
    std::vector<double> cuts(p.breakpoints().begin(), p.breakpoints().end());
    EXPECT_NEAR(whole, oracle::quad_split([&](double v) { return p(v); }, x[0], x[2], cuts), 1e-11);
  }
}

TEST(PiecewisePoly, SubtractExamples) {
  auto p = global({1.0, -1.0, 0.5}, -1, 2);
  auto z = subtract(p, p);
  for (double x : {-0.5, 0.0, 1.7}) EXPECT_EQ(z(x), 0.0);
  auto d = subtract(global({1.0}, 0, 2), global({1.0}, 1, 3));
  EXPECT_EQ(std::vector<double>(d.breakpoints().begin(), d.breakpoints().end()),
            (std::vector<double>{0, 1, 2, 3}));
  EXPECT_NEAR(d(0.5), 1.0, 1e-15);
  EXPECT_NEAR(d(1.5), 0.0, 1e-15);
  EXPECT_NEAR(d(2.5), -1.0, 1e-15);
}

TEST(PiecewisePoly, SubtractIsPointwise) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 4);
  for (int t = 0; t < 20; ++t) {
    auto p = testutil::random_pp(rng, 3, 6, -2, 2), q = testutil::random_pp(rng, 4, 4, -1, 3);
    auto d = subtract(p, q);
    for (int i = 0; i < 100; ++i) {
      double x = u(rng);
      EXPECT_NEAR(d(x), p(x) - q(x), 1e-10);
    }
  }
}

TEST(PiecewisePoly, RealRootsExamples) {
  auto r = real_roots(global({-1, 0, 1}, -2, 2));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], -1, 1e-11);
  EXPECT_NEAR(r[1], 1, 1e-11);
  EXPECT_TRUE(real_roots(global({2, 0, 1}, -2, 2)).empty());
  auto cubic = global({0, -1, 0, 1}, -2, 2);
  auto want = oracle::grid_roots([&](double x) { return cubic(x); }, -2.0 + 1e-9, 2.0 - 1e-9, 100001);
  auto got = real_roots(cubic);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
}

TEST(PiecewisePoly, SignConstantBetweenRoots) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    auto p = testutil::random_pp(rng, 3, 5);
    auto segs = sign_segments(p);
    for (const auto& s : segs) {
      for (int i = 1; i < 1000; ++i) {
        double x = s.x.lo + s.x.width() * i / 1000.0;
        double v = p(x);
        if (std::abs(v) < 1e-9) continue;
        EXPECT_EQ((v > 0) - (v < 0), s.sign) << "x=" << x;
      }
    }
  }
}

TEST(PiecewisePoly, L1NormExamples) {
  EXPECT_NEAR(l1_norm(global({0, 1}, -1, 1)), 1.0, 1e-14);
  auto pos = global({1, 0, 1}, -1, 2);
  EXPECT_NEAR(l1_norm(pos), integrate(pos), 1e-14);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    auto p = testutil::random_pp(rng, 4, 5);
    // trapezoid per piece, 10^5 points in total
    double trap = 0.0;
    for (std::size_t i = 0; i < p.piece_count(); ++i) {
      const auto& q = p.piece(i);
      double half = 0.5 * p.piece_interval(i).width();
      trap += half * oracle::trapezoid([&](double u) { return std::abs(q(u)); }, -1.0, 1.0, 100000 / p.piece_count());
    }
    double exact = oracle::l1([&](double x) { return p(x); }, -2.0, 3.0,
                              std::vector<double>(p.breakpoints().begin(), p.breakpoints().end()));
    EXPECT_NEAR(l1_norm(p), exact, 1e-10);
    EXPECT_NEAR(l1_norm(p), trap, 1e-6);
  }
}

TEST(PiecewisePoly, RescaleDomain) {
  auto p = global({1, 1, 1}, 0, 2);
  auto r = rescale_domain(p, {-1, 1});
  EXPECT_EQ(r.pp.support(), (Interval{-1, 1}));
  EXPECT_EQ(r.map.alpha, 0.0);
  EXPECT_EQ(r.map.beta, 2.0);
  auto q = global({1, 1}, -1, 1);
  EXPECT_TRUE(rescale_domain(q, {-1, 1}).map.is_identity());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 3);
  auto rp = testutil::random_pp(rng, 3, 4);
  auto rs = rescale_domain(rp, {-1, 1});
  auto back = unscale_domain(rs.pp, rs.map);
  for (int i = 0; i < 100; ++i) {
    double x = u(rng);
    EXPECT_NEAR(rs.pp(rs.map.forward(x)), rp(x), 1e-11);
    EXPECT_NEAR(back(x), rp(x), 1e-11);
  }
  EXPECT_THROW(rescale_domain(PiecewisePolynomial(), {-1, 1}), std::invalid_argument);
}

TEST(PiecewisePoly, LinearCombination) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-3, 4);
  auto a = testutil::random_pp(rng, 3, 4), b = testutil::random_pp(rng, 2, 3, -1, 1),
       c = testutil::random_pp(rng, 5, 2, 0, 4);
  const PiecewisePolynomial* ts[] = {&a, &b, &c};
  double ws[] = {0.3, -1.2, 2.0};
  auto s = linear_combination(ts, ws);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng);
    EXPECT_NEAR(s(x), 0.3 * a(x) - 1.2 * b(x) + 2.0 * c(x), 1e-10);
  }
}

TEST(PiecewisePoly, CoefficientBoundFormula) {
  EXPECT_NEAR(coefficient_bound(0.5, 3), 0.5 * 16 * std::pow(std::sqrt(2.0) + 1, 3), 1e-12);
}

TEST(PiecewisePoly, JsonRoundTripAndShape) {
  std::mt19937_64 rng(23);
  auto p = testutil::random_pp(rng, 3, 4);
  auto text = to_json(p);
  EXPECT_EQ(pp_from_json(text), p);
  auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["breakpoints"].size(), 4u);
  EXPECT_EQ(j["pieces"].size(), 5u);
  EXPECT_EQ(j["pieces"][0]["coeffs"], nlohmann::json::array({0.0}));
  EXPECT_THROW(pp_from_json("{\"breakpoints\":[1,0],\"pieces\":[]}"), std::invalid_argument);
}
