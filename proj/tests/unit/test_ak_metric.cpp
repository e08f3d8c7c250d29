#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gmmfit/ak_metric.hpp"
#include "gmmfit/mixtures.hpp"
#include "gmmfit/shape_restricted.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gmmfit;

namespace {
std::vector<double> prefix_at(const PiecewisePolynomial& p, const std::vector<double>& xs) {
  std::vector<double> F(xs.size(), 0.0);
  std::vector<double> cuts(p.breakpoints().begin(), p.breakpoints().end());
  for (std::size_t i = 1; i < xs.size(); ++i)
    F[i] = F[i - 1] + oracle::quad_split([&](double x) { return p(x); }, xs[i - 1], xs[i], cuts, 1e-12);
  return F;
}

std::vector<double> prefix_on_grid(const PiecewisePolynomial& p, std::size_t n) {
  auto S = p.support();
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = S.lo + S.width() * i / (n - 1);
  return prefix_at(p, xs);
}

// Endpoints of a maximiser lie at sign changes, breakpoints or the ends.
std::vector<double> prefix_at_crossings(const PiecewisePolynomial& p) {
  auto S = p.support();
  auto xs = oracle::grid_roots([&](double x) { return p(x); }, S.lo, S.hi, 200000);
  xs.insert(xs.end(), p.breakpoints().begin(), p.breakpoints().end());
  std::sort(xs.begin(), xs.end());
  return prefix_at(p, xs);
}

PiecewisePolynomial steps(std::vector<double> bp, std::vector<double> vals) {
  std::vector<Polynomial> ps;
  for (double v : vals) ps.push_back(Polynomial::constant(v));
  return PiecewisePolynomial(std::move(bp), std::move(ps));
}
}  // namespace

TEST(AkMetric, SignRunExamples) {
  auto pos = PiecewisePolynomial::from_global(Polynomial({1, 0, 1}), -1, 2);
  auto r = sign_runs(pos);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_NEAR(r.runs[0].integral, integrate(pos), 1e-14);
  auto pm = steps({0, 1, 2}, {1, -1});
  auto r2 = sign_runs(pm);
  ASSERT_EQ(r2.runs.size(), 2u);
  EXPECT_NEAR(r2.runs[0].integral, 1, 1e-14);
  EXPECT_NEAR(r2.runs[1].integral, -1, 1e-14);
}

TEST(AkMetric, SignRunsAdditiveAndAlternating) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 50; ++t) {
    auto p = testutil::random_pp(rng, 4, 5);
    auto d = sign_runs(p);
    double s = 0;
    for (std::size_t i = 0; i < d.runs.size(); ++i) {
      s += d.runs[i].integral;
      if (i) {
        EXPECT_LT(d.runs[i].integral * d.runs[i - 1].integral, 0.0);
        EXPECT_EQ(d.runs[i].x.lo, d.runs[i - 1].x.hi);
      }
    }
    EXPECT_NEAR(s, integrate(p), 1e-10);
  }
}

TEST(AkMetric, NormExamples) {
  auto pos = PiecewisePolynomial::from_global(Polynomial({1, 0, 1}), -1, 2);
  for (int K : {1, 3}) EXPECT_NEAR(ak_norm(pos, K), l1_norm(pos), 1e-13);
  auto alt = steps({0, 1, 2, 3}, {0.5, -0.3, 0.2});
  EXPECT_NEAR(ak_norm(alt, 2), 0.8, 1e-13);
  auto F = prefix_on_grid(alt, 3001);
  EXPECT_NEAR(oracle::ak_from_prefix(F, 2), 0.8, 1e-3);
  EXPECT_NEAR(ak_norm(alt, 3), l1_norm(alt), 1e-13);
  EXPECT_NEAR(ak_norm(alt, 7), l1_norm(alt), 1e-13);
  // merging beats the two largest runs: (+1, -0.1, +1) with K = 1
  auto merge = steps({0, 1, 2, 3}, {1, -0.1, 1});
  EXPECT_NEAR(ak_norm(merge, 1), 1.9, 1e-13);
}

TEST(AkMetric, AgainstGridOracle) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 25; ++t) {
    auto p = testutil::random_pp(rng, 1 + t % 4, 4);
    int K = 1 + t % 4;
    double got = ak_norm(p, K);
    EXPECT_NEAR(got, oracle::ak_from_prefix(prefix_at_crossings(p), K), 1e-8);
    double grid = oracle::ak_from_prefix(prefix_on_grid(p, 601), K);
    EXPECT_GE(got, grid - 1e-9);
    EXPECT_NEAR(ak_brute_force(p, K, 601), grid, 1e-9);
  }
}

TEST(AkMetric, MonotoneInKAndBoundedByL1) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 30; ++t) {
    auto p = testutil::random_pp(rng, 5, 6);
    double prev = 0.0;
    for (int K = 1; K <= 8; ++K) {
      double v = ak_norm(p, K);
      EXPECT_GE(v, prev - 1e-15);
      EXPECT_LE(v, l1_norm(p) + 1e-12);
      prev = v;
    }
  }
}

TEST(AkMetric, DistanceProperties) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 30; ++t) {
    auto p = testutil::random_pp(rng, 3, 4), q = testutil::random_pp(rng, 2, 5), r = testutil::random_pp(rng, 4, 3);
    EXPECT_EQ(ak_distance(p, p, 4), 0.0);
    EXPECT_LE(ak_distance(p, q, 4), l1_norm(subtract(p, q)) + 1e-12);
    EXPECT_LE(ak_distance(p, r, 4), ak_distance(p, q, 4) + ak_distance(q, r, 4) + 1e-9);
  }
}

TEST(AkMetric, ApproximantsNearL1) {
  auto cfg = ShapePolyConfig::make(0.05);
  std::mt19937_64 rng(59);
  for (int t = 0; t < 10; ++t) {
    auto a = testutil::random_gmm(rng, 2), b = testutil::random_gmm(rng, 2);
    double ak = ak_distance(mixture_approx(a, cfg), mixture_approx(b, cfg), 8);
    EXPECT_NEAR(ak, l1_distance(a, b), 10 * 0.05);
  }
}

TEST(AkMetric, ExactMixturesAkEqualsL1) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    auto a = testutil::random_gmm(rng, 2), b = testutil::random_gmm(rng, 2);
    EXPECT_NEAR(ak_from_integrals(difference_run_integrals(a, b), 8), l1_distance(a, b), 1e-6);
  }
}

TEST(AkMetric, FromIntegrals) {
  std::vector<double> v{0.5, -0.3, 0.2};
  EXPECT_NEAR(ak_from_integrals(v, 1), 0.5, 1e-15);
  EXPECT_NEAR(ak_from_integrals(v, 2), 0.8, 1e-15);
  EXPECT_THROW(ak_from_integrals(v, 0), std::invalid_argument);
  std::vector<double> m{1.0, -0.1, 1.0};
  EXPECT_NEAR(ak_from_integrals(m, 1), 1.9, 1e-15);
}
