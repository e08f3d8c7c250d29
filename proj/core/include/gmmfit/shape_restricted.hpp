#pragma once

#include "gmmfit/mixtures.hpp"
#include "gmmfit/piecewise_poly.hpp"
#include "gmmfit/polynomial.hpp"

namespace gmmfit {

// Truncated Taylor approximant of a standardised family density.
// Gaussian: Maclaurin series of degree d on [-h, h], h = 2 sqrt(ln 1/eps).
// Exponential: series about H/2 on [0, H], H = 2 ln(1/eps).
// Laplace: the exponential construction mirrored on [-H, 0].
struct ShapePolyConfig {
  double eps = 0.1;
  Family family = Family::gaussian;
  int taylor_quality = 0;
  int degree = 0;
  double half_width = 0.0;
  // L1 error of `standard` against the exact standardised density on its support.
  double validated_error = 0.0;
  PiecewisePolynomial standard;

  // Smallest taylor_quality whose degree 2 q ceil(ln 1/eps) passes the eps/4 check.
  static ShapePolyConfig make(double eps, Family family = Family::gaussian);
};

int degree_for_quality(double eps, int quality);

// (1/sqrt(2 pi)) sum_{j <= d/2} (-1/2)^j x^{2j} / j!
Polynomial taylor_gaussian(int d);

PiecewisePolynomial pw_gaussian_approx(const ShapePolyConfig& cfg);

// w tau S(tau (x - mu)) for the configured shape S.
PiecewisePolynomial component_approx(const Component& c, const ShapePolyConfig& cfg);
PiecewisePolynomial mixture_approx(const MixtureParams& theta, const ShapePolyConfig& cfg);

PiecewisePolynomial rescaled_component(double mu_t, double tau_t, Interval J,
                                       const ShapePolyConfig& cfg);
PiecewisePolynomial rescaled_mixture_approx(const RescaledParams& theta_r, const Allocation& v,
                                            const ShapePolyConfig& cfg);

}  // namespace gmmfit
