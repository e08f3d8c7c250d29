#pragma once

#include <span>
#include <vector>

#include "gmmfit/piecewise_poly.hpp"

namespace gmmfit {

struct SignRun {
  Interval x;
  double integral = 0.0;
};

struct SignRunDecomposition {
  std::vector<SignRun> runs;
};

// Runs below this absolute integral are absorbed by a neighbour.
inline constexpr double kNegligibleRun = 1e-14;

SignRunDecomposition sign_runs(const PiecewisePolynomial& p);

// max over K disjoint groups of consecutive values of sum |group sum|.
double ak_from_integrals(std::span<const double> values, int K);

double ak_norm(const PiecewisePolynomial& p, int K);
double ak_distance(const PiecewisePolynomial& p, const PiecewisePolynomial& q, int K);

// Same supremum with interval endpoints restricted to `grid` equally spaced
// points across the support.
double ak_brute_force(const PiecewisePolynomial& p, int K, std::size_t grid);

}  // namespace gmmfit
