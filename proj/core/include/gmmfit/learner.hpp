#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmmfit/density_estimation.hpp"
#include "gmmfit/fit_engine.hpp"
#include "gmmfit/mixtures.hpp"

namespace gmmfit {

struct LearnConfig {
  int k = 1;
  double eps = 0.1;
  // failure probability; recorded only, the estimator has no knob for it
  double delta = 0.1;
  // precision bound for the well-behaved learner, in the [-1,1] frame
  double gamma = 0.0;
  std::uint64_t seed = 0;
  int starts_per_component = 50;
  int refine = 4;
  // worker threads for the allocation loop; 0 reads GMMFIT_THREADS
  int threads = 0;
  double c1 = 1e-2;
  EstimatorConfig estimator;
};

void validate(const LearnConfig& cfg);

// The doubling loop reached nu = 3 without a feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverDiagnostics {
  std::size_t evaluations = 0;
  std::size_t allocations = 0;
  int nu_iterations = 0;
  int max_nu_iterations = 0;
  double lambda = 0.0;
  double eta = 0.0;
  double phi = 0.0;
  double achieved = 0.0;
  double lipschitz = 0.0;
  int K = 0;
  int taylor_degree = 0;
  int estimate_pieces = 0;
  int estimate_degree = 0;
  bool fallback = false;
};

struct FitReport {
  MixtureParams theta;
  double nu = 0.0;
  Allocation allocation;
  double l1_to_estimate = 0.0;
  double ak_to_estimate = 0.0;
  SolverDiagnostics solver;
  DensityEstimate estimate;
};

struct AllocationFit {
  RescaledParams theta_r;
  double nu = 0.0;
  double achieved = 0.0;
  int iterations = 0;
  std::size_t evaluations = 0;
  double lipschitz = 0.0;
};

std::vector<Allocation> enumerate_allocations(int k, int s);

// lambda = min(c1 (eps/(phi k))^2, 1/(16 s), eps/(4k))
double allocation_lambda(double eps, int k, std::size_t s, double phi, double c1 = 1e-2);
// psi = 6 k s phi / omega + 3 k phi / 2 + 1
double allocation_psi(int k, std::size_t s, double phi);

// Weight rounding: w_i -= eps/(2k) clamped to [0,1] for i < k, w_k = 1 - sum.
void round_weights(MixtureParams& theta, double eps);
// Undo the [-1,1] rescaling of the estimate with support [alpha, beta].
MixtureParams descale(const MixtureParams& unit_theta, double alpha, double beta);

AllocationFit find_fit_given_allocation(const DensityEstimate& unit, const Allocation& v, double eps,
                                        const LearnConfig& cfg = {},
                                        Family family = Family::gaussian, std::uint64_t seed = 0);

FitReport learn_well_behaved(std::span<const double> samples, const LearnConfig& cfg);
FitReport learn_gmm(std::span<const double> samples, const LearnConfig& cfg);
FitReport learn_family(std::span<const double> samples, const LearnConfig& cfg, Family family);

int max_nu_iterations(double eps);

std::string to_json(const FitReport& report);

}  // namespace gmmfit
