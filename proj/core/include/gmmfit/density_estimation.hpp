#pragma once

#include <span>
#include <string>
#include <vector>

#include "gmmfit/piecewise_poly.hpp"

namespace gmmfit {

struct EstimatorConfig {
  // piece budget c: the estimate has at most c k pieces including the tails
  int piece_constant = 4;
};

struct DensityEstimate {
  PiecewisePolynomial pp;
  // original support [alpha, beta] and the frame pp currently lives in
  AffineMap rescale_map;
  std::vector<Interval> intervals;
  std::size_t piece_count = 0;
  int degree = 0;
};

std::size_t minimum_sample_count(int k, double eps);

DensityEstimate estimate_density(std::span<const double> samples, int k, double eps,
                                 const EstimatorConfig& cfg = {});

// Same density on [-1, 1]; values carry the Jacobian so mass is preserved.
DensityEstimate rescale_to_unit(const DensityEstimate& est);
// Inverse of rescale_to_unit.
DensityEstimate restore_from_unit(const DensityEstimate& unit);

// Empirical A_K error of a nonnegative polynomial piece against the samples
// falling into it, relative to a total sample count n.
double empirical_ak_error(const Polynomial& local, Interval I, std::span<const double> sorted_in_piece,
                          std::size_t n, int K);

std::string to_json(const DensityEstimate& est);
DensityEstimate density_from_json(const std::string& text);

}  // namespace gmmfit
