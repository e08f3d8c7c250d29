#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gmmfit/mixtures.hpp"
#include "gmmfit/piecewise_poly.hpp"
#include "gmmfit/shape_restricted.hpp"

namespace gmmfit {

// Parameter domain searched by the solver. In the well-behaved domain the
// precision range applies to raw precisions on [-1,1]; in the rescaled
// domain it applies to tau_t and every component is tied to an interval.
struct ThetaBox {
  bool rescaled = false;
  int k = 1;
  double w_min = 0.0;
  double prec_lo = 1e-3;
  double prec_hi = 1.0;
  // precisions are sampled on [prec_lo, min(prec_hi, search_prec_hi)]
  double search_prec_hi = 1e3;
  double mu_t_bound = 0.0;
  std::vector<Interval> slots;
  std::vector<std::size_t> slot_index;
};

ThetaBox well_behaved_box(int k, double gamma);

struct RescaledBoxConstants {
  double phi = 0.0;
  double mu_t_bound = 0.0;
  double tau_t_lo = 0.0;
  double tau_t_hi = 0.0;
  double w_min = 0.0;
};
RescaledBoxConstants rescaled_box_constants(std::size_t s, int k, double eps, int m);

ThetaBox rescaled_box(std::span<const Interval> intervals, const Allocation& v, double eps, int m);

struct FitProblem {
  PiecewisePolynomial p_dens;
  ShapePolyConfig shape;
  int K = 4;
  ThetaBox box;
};

struct SolveConfig {
  double lambda = 1e-6;
  double eta = 1e6;
  double nu = 1.0;
  int starts = 50;
  // number of screened starts refined by the local search
  int refine = 4;
  int max_evals_per_refine = 0;  // 0: 200 per search dimension
  std::uint64_t seed = 0;
};

void validate(const SolveConfig& cfg);

struct Candidate {
  MixtureParams theta;    // raw parameters in the frame of p_dens
  RescaledParams theta_r; // filled for rescaled boxes
  double objective = 0.0;
};

struct SolveResult {
  bool feasible = false;
  Candidate best;
  double lipschitz = 0.0;
  double slack = 0.0;
  std::size_t evaluations = 0;
};

// A_K distance between p_dens and the shape approximant of theta.
double objective(const FitProblem& problem, const MixtureParams& theta);

// Minimises the objective over the box once; solve(nu) thresholds the
// memoised minimum, so success is monotone in nu.
class FeasibilitySolver {
 public:
  FeasibilitySolver(FitProblem problem, SolveConfig cfg);
  ~FeasibilitySolver();
  FeasibilitySolver(FeasibilitySolver&&) noexcept;

  SolveResult solve(double nu);
  const Candidate& minimum();
  std::size_t evaluations() const;
  const FitProblem& problem() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult feasibility_solve(const FitProblem& problem, const SolveConfig& cfg);

}  // namespace gmmfit
