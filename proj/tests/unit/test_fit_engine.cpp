#include <gtest/gtest.h>

#include "gmmfit/ak_metric.hpp"
#include "gmmfit/fit_engine.hpp"
#include "oracles.hpp"

using namespace gmmfit;

namespace {
FitProblem self_fit_problem(double eps) {
  FitProblem p;
  p.shape = ShapePolyConfig::make(eps);
  p.p_dens = mixture_approx(MixtureParams{Family::gaussian, {{1.0, 0.2, 2.0}}}, p.shape);
  p.K = 4;
  p.box = well_behaved_box(1, 4.0);
  return p;
}

SolveConfig quick(std::uint64_t seed = 1) {
  SolveConfig c;
  c.lambda = 1e-6;
  c.eta = 12;
  c.starts = 20;
  c.seed = seed;
  return c;
}
}  // namespace

TEST(FitEngine, SelfFitIsFeasibleAtEps) {
  auto p = self_fit_problem(0.1);
  FeasibilitySolver s(p, quick());
  auto r = s.solve(0.1);
  ASSERT_TRUE(r.feasible);
  EXPECT_LE(ak_distance(p.p_dens, mixture_approx(r.best.theta, p.shape), 4), 0.1);
}

TEST(FitEngine, NuThreeAlwaysFeasible) {
  FitProblem p;
  p.shape = ShapePolyConfig::make(0.1);
  p.p_dens = PiecewisePolynomial::from_global(Polynomial::constant(0.5), -1, 1);
  p.K = 8;
  p.box = well_behaved_box(2, 2.0);
  EXPECT_TRUE(feasibility_solve(p, [] { auto c = quick(); c.nu = 3.0; return c; }()).feasible);
}

TEST(FitEngine, NuZeroOnNonMixtureIsInfeasible) {
  FitProblem p;
  p.shape = ShapePolyConfig::make(0.1);
  p.p_dens = PiecewisePolynomial::from_global(Polynomial::constant(0.5), -1, 1);
  p.K = 4;
  p.box = well_behaved_box(1, 4.0);
  auto c = quick();
  c.nu = 0.0;
  EXPECT_FALSE(feasibility_solve(p, c).feasible);
}

TEST(FitEngine, SoundDeterministicMonotone) {
  auto p = self_fit_problem(0.05);
  FeasibilitySolver a(p, quick(3)), b(p, quick(3));
  const auto& ma = a.minimum();
  const auto& mb = b.minimum();
  EXPECT_EQ(ma.objective, mb.objective);
  EXPECT_EQ(ma.theta.components[0].mean, mb.theta.components[0].mean);
  auto r = a.solve(0.05);
  if (r.feasible) {
    EXPECT_LE(objective(p, r.best.theta), 0.05 * (1 + 1e-6) + r.slack + 1e-12);
    for (double nu : {0.06, 0.1, 1.0}) EXPECT_TRUE(a.solve(nu).feasible);
  }
  EXPECT_NEAR(objective(p, ma.theta), ma.objective, 1e-12);
}

TEST(FitEngine, ConfigValidation) {
  SolveConfig c;
  c.lambda = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = SolveConfig{};
  c.starts = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  EXPECT_THROW(well_behaved_box(1, 0.0), std::invalid_argument);
}

TEST(FitEngine, RescaledBox) {
  const auto& c = AdmissibilityConstants::standard();
  auto rc = rescaled_box_constants(3, 2, 0.1, 5);
  EXPECT_NEAR(rc.phi, phi_bound(0.1, 2, 5, c), 1e-9 * rc.phi);
  EXPECT_NEAR(rc.mu_t_bound, 2 * 3 * rc.phi / c.omega, 1e-9 * rc.mu_t_bound);
  EXPECT_NEAR(rc.tau_t_lo, std::sqrt(2 * M_PI) * c.omega / 48.0, 1e-15);
  EXPECT_NEAR(rc.tau_t_hi, rc.phi / 2, 1e-9 * rc.phi);
  EXPECT_NEAR(rc.w_min, 0.025, 1e-15);
  std::vector<Interval> I{{-1, 0}, {0, 0.5}, {0.5, 1}};
  auto box = rescaled_box(I, {1, 0, 1}, 0.1, 5);
  EXPECT_EQ(box.k, 2);
  EXPECT_EQ(box.slot_index, (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(rescaled_box(I, {1, 1}, 0.1, 5), std::invalid_argument);
}

TEST(FitEngine, RescaledSelfFit) {
  std::vector<Interval> I{{-1.0, 0.0}, {0.0, 1.0}};
  auto shape = ShapePolyConfig::make(0.1);
  RescaledParams truth{{0.5, 0.0, 1.0, I[0], 0}, {0.5, 0.0, 1.0, I[1], 1}};
  FitProblem p{rescaled_mixture_approx(truth, {1, 1}, shape), shape, 8, rescaled_box(I, {1, 1}, 0.1, 3)};
  auto c = quick(2);
  c.nu = 0.1;
  auto r = feasibility_solve(p, c);
  ASSERT_TRUE(r.feasible);
  ASSERT_EQ(r.best.theta_r.size(), 2u);
  EXPECT_LE(r.best.objective, 0.1);
}
