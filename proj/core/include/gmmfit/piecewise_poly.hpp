#pragma once

#include <span>
#include <string>
#include <vector>

#include "gmmfit/polynomial.hpp"

namespace gmmfit {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval&) const = default;
};

// Piecewise polynomial with finite support [b_1, b_r]. Piece i lives on
// [b_i, b_{i+1}) and is stored in the local coordinate
// u = (2x - b_i - b_{i+1}) / (b_{i+1} - b_i) in [-1, 1].
// The two unbounded tails are identically zero.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> breakpoints, std::vector<Polynomial> pieces);

  // Single piece given in the global variable x on [lo, hi].
  static PiecewisePolynomial from_global(const Polynomial& global, double lo, double hi);

  std::span<const double> breakpoints() const { return bp_; }
  std::size_t piece_count() const { return pieces_.size(); }
  const Polynomial& piece(std::size_t i) const { return pieces_[i]; }
  std::span<const Polynomial> pieces() const { return pieces_; }
  Interval piece_interval(std::size_t i) const { return {bp_[i], bp_[i + 1]}; }
  bool empty() const { return pieces_.empty(); }
  Interval support() const;
  int max_degree() const;

  double operator()(double x) const;
  // Index of the piece owning x under the half-open convention, or -1 outside.
  long locate(double x) const;

  // Antiderivative of piece i in x, between local coordinates ua and ub.
  double piece_integral(std::size_t i, double ua, double ub) const;

  bool operator==(const PiecewisePolynomial&) const = default;

 private:
  std::vector<double> bp_;
  std::vector<Polynomial> pieces_;
};

double evaluate(const PiecewisePolynomial& p, double x);
double integrate(const PiecewisePolynomial& p, double a, double b);
double integrate(const PiecewisePolynomial& p);

PiecewisePolynomial subtract(const PiecewisePolynomial& p, const PiecewisePolynomial& q);
PiecewisePolynomial add(const PiecewisePolynomial& p, const PiecewisePolynomial& q);
PiecewisePolynomial scale(const PiecewisePolynomial& p, double s);
// sum_i w_i * terms_i on the union of all breakpoints
PiecewisePolynomial linear_combination(std::span<const PiecewisePolynomial* const> terms,
                                       std::span<const double> weights);

// x -> s * p(shift + scale * x) expressed as a piecewise polynomial in x.
// scale must be positive. Local coordinates are unchanged by such maps.
PiecewisePolynomial pullback(const PiecewisePolynomial& p, double shift, double scale_factor,
                             double value_factor);

// Default root tolerance: 1e-12 times the support width.
double default_root_tol(const PiecewisePolynomial& p);

// A sign-constant stretch of one piece.
struct SignSegment {
  Interval x;
  int sign = 0;
  double integral = 0.0;
};

// Splits the support into segments on which p has constant sign.
std::vector<SignSegment> sign_segments(const PiecewisePolynomial& p, double root_tol);
std::vector<SignSegment> sign_segments(const PiecewisePolynomial& p);

// Points where p changes sign, including jumps across zero at breakpoints.
std::vector<double> real_roots(const PiecewisePolynomial& p);
double l1_norm(const PiecewisePolynomial& p);

// Affine map carrying the original support [alpha, beta] onto target.
struct AffineMap {
  double alpha = -1.0;
  double beta = 1.0;
  Interval target{-1.0, 1.0};
  double forward(double x) const {
    return target.lo + (x - alpha) * (target.width() / (beta - alpha));
  }
  double inverse(double y) const {
    return alpha + (y - target.lo) * ((beta - alpha) / target.width());
  }
  // d(forward)/dx
  double slope() const { return target.width() / (beta - alpha); }
  bool is_identity() const { return alpha == target.lo && beta == target.hi; }
};

// Returns p' with support target and p'(y) = p(map.inverse(y)).
struct Rescaled;
Rescaled rescale_domain(const PiecewisePolynomial& p, Interval target);
// Inverse of rescale_domain.
PiecewisePolynomial unscale_domain(const PiecewisePolynomial& rescaled, const AffineMap& map);

struct Rescaled {
  PiecewisePolynomial pp;
  AffineMap map;
};

// Bound on local coefficients of a nonnegative degree-m piece with local mass beta.
double coefficient_bound(double beta, int m);

std::string to_json(const PiecewisePolynomial& p);
PiecewisePolynomial pp_from_json(const std::string& text);

}  // namespace gmmfit
