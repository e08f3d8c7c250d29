#include <gtest/gtest.h>

#include <random>

#include "gmmfit/shape_restricted.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gmmfit;

TEST(Shape, TaylorExamples) {
  for (int d : {0, 2, 8, 24}) EXPECT_NEAR(taylor_gaussian(d)(0.0), 0.3989423, 1e-7);
  EXPECT_NEAR(taylor_gaussian(2)(1.0), 0.19947, 1e-5);
  for (int d : {2, 10, 30})
    for (double x : {-2.0, 0.5, 3.0}) EXPECT_NEAR(taylor_gaussian(d)(x), oracle::taylor_value(d, x), 1e-12);
  EXPECT_THROW(taylor_gaussian(3), std::invalid_argument);
}

TEST(Shape, ConfigDegreeAndValidation) {
  for (double eps : {0.1, 0.01, 1e-3}) {
    auto cfg = ShapePolyConfig::make(eps);
    EXPECT_EQ(cfg.degree, 2 * cfg.taylor_quality * static_cast<int>(std::ceil(std::log(1 / eps))));
    EXPECT_NEAR(cfg.half_width, 2 * std::sqrt(std::log(1 / eps)), 1e-14);
    double h = cfg.half_width;
    int d = cfg.degree;
    double err = oracle::l1([&](double x) { return oracle::normal_pdf(x, 0, 1) - oracle::taylor_value(d, x); }, -h, h);
    EXPECT_LT(err, eps / 4);
    EXPECT_NEAR(cfg.validated_error, err, 1e-9);
  }
}

TEST(Shape, TruncatedApproximant) {
  auto cfg = ShapePolyConfig::make(0.01);
  auto p = pw_gaussian_approx(cfg);
  double h = cfg.half_width;
  EXPECT_EQ(p(h + 1), 0.0);
  EXPECT_NEAR(p(0.0), oracle::kInvSqrt2Pi, 1e-12);
  EXPECT_EQ(p.support(), (Interval{-h, h}));
  for (double x : {0.3, 1.1, 2.9}) EXPECT_NEAR(p(x), p(-x), 1e-12);
  double err = oracle::l1([&](double x) { return oracle::normal_pdf(x, 0, 1) - p(x); }, -12, 12, {-h, h});
  EXPECT_LT(err, 0.01 / 2);
}

TEST(Shape, MixtureApproxBreakpoints) {
  auto cfg = ShapePolyConfig::make(0.1);
  auto p = mixture_approx(MixtureParams{Family::gaussian, {{1.0, 0.0, 1.0}}}, cfg);
  ASSERT_EQ(p.breakpoints().size(), 2u);
  EXPECT_NEAR(p.breakpoints()[0], -cfg.half_width, 1e-14);
  EXPECT_NEAR(p.breakpoints()[1], cfg.half_width, 1e-14);
  MixtureParams two{Family::gaussian, {{0.5, -1, 2}, {0.5, 1.5, 0.5}}};
  EXPECT_LE(mixture_approx(two, cfg).breakpoints().size(), 4u);
  MixtureParams zero{Family::gaussian, {{1.0, 0.3, 1.7}, {0.0, 2.0, 1.0}}};
  auto single = component_approx({1.0, 0.3, 1.7}, cfg);
  for (double x : {-1.0, 0.3, 1.0, 2.0}) EXPECT_NEAR(mixture_approx(zero, cfg)(x), single(x), 1e-13);
}

TEST(Shape, LinearInWeights) {
  auto cfg = ShapePolyConfig::make(0.05);
  MixtureParams a{Family::gaussian, {{0.3, -0.5, 1.2}, {0.7, 1.0, 3.0}}};
  MixtureParams b{Family::gaussian, {{0.6, -0.5, 1.2}, {0.4, 1.0, 3.0}}};
  MixtureParams ab{Family::gaussian, {{0.9, -0.5, 1.2}, {1.1, 1.0, 3.0}}};
  auto pa = mixture_approx(a, cfg), pb = mixture_approx(b, cfg), pab = mixture_approx(ab, cfg);
  for (double x = -3; x < 3; x += 0.173) EXPECT_NEAR(pa(x) + pb(x), pab(x), 1e-12);
}

TEST(Shape, GoodApproxBound) {
  std::mt19937_64 rng(37);
  for (double eps : {0.1, 0.05, 0.01}) {
    auto cfg = ShapePolyConfig::make(eps);
    for (int t = 0; t < 10; ++t) {
      auto th = testutil::random_gmm(rng, 1 + t % 3);
      auto P = mixture_approx(th, cfg);
      auto cs = testutil::comps(th);
      auto [lo, hi] = oracle::gmm_range(cs);
      std::vector<double> cuts(P.breakpoints().begin(), P.breakpoints().end());
      double err = oracle::l1([&](double x) { return oracle::gmm_pdf(cs, x) - P(x); }, lo, hi, cuts);
      EXPECT_LE(err, eps + 1e-6);
    }
  }
}

TEST(Shape, RescaledComponents) {
  auto cfg = ShapePolyConfig::make(0.05);
  auto a = rescaled_component(0.6, 2.0, {-1, 1}, cfg);
  auto b = component_approx({1.0, 0.3, 2.0}, cfg);
  for (double x = -2; x < 2; x += 0.11) EXPECT_NEAR(a(x), b(x), 1e-12);
  std::vector<Interval> I{{-1.0, 0.2}, {0.2, 1.0}};
  RescaledParams r{{0.4, 0.1, 1.5, I[0], 0}, {0.6, -0.2, 0.8, I[1], 1}};
  auto P = rescaled_mixture_approx(r, {1, 1}, cfg);
  auto raw = to_raw(r);
  auto cs = testutil::comps(raw);
  auto [lo, hi] = oracle::gmm_range(cs);
  std::vector<double> cuts(P.breakpoints().begin(), P.breakpoints().end());
  EXPECT_LE(oracle::l1([&](double x) { return oracle::gmm_pdf(cs, x) - P(x); }, lo, hi, cuts), 0.05);
  EXPECT_THROW(rescaled_mixture_approx(r, {2, 0}, cfg), std::invalid_argument);
  EXPECT_THROW(rescaled_mixture_approx(r, {1}, cfg), std::invalid_argument);
  RescaledParams one{{1.0, 0.1, 1.5, I[0], 0}};
  auto single = rescaled_mixture_approx(one, {1, 0}, cfg);
  EXPECT_EQ(single.breakpoints().size(), 2u);
}

TEST(Shape, RescaledPerturbation) {
  auto cfg = ShapePolyConfig::make(0.1);
  Interval J{-0.4, 0.6};
  auto p = rescaled_component(0.2, 1.3, J, cfg), q = rescaled_component(0.2 + 1e-6, 1.3 + 1e-6, J, cfg);
  std::vector<double> cuts(p.breakpoints().begin(), p.breakpoints().end());
  cuts.insert(cuts.end(), q.breakpoints().begin(), q.breakpoints().end());
  EXPECT_LE(oracle::l1([&](double x) { return p(x) - q(x); }, -10, 10, cuts), 0.1);
}
