#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmmfit/piecewise_poly.hpp"

namespace gmmfit {

enum class Family { gaussian, exponential, laplace };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

// Gaussian: N(mean, 1/precision^2). Exponential: rate = precision, shifted
// to start at mean. Laplace: location mean, scale 1/precision.
struct Component {
  double weight = 1.0;
  double mean = 0.0;
  double precision = 1.0;
  bool operator==(const Component&) const = default;
};

struct MixtureParams {
  Family family = Family::gaussian;
  std::vector<Component> components;

  std::size_t k() const { return components.size(); }
  bool operator==(const MixtureParams&) const = default;
};

// Throws std::invalid_argument unless weights lie on the simplex (1e-9),
// precisions are positive and everything is finite.
void validate(const MixtureParams& theta);

double family_pdf(Family f, double mean, double precision, double x);
double family_cdf(Family f, double mean, double precision, double x);

double pdf(const MixtureParams& theta, double x);
double cdf(const MixtureParams& theta, double x);

std::vector<double> sample(const MixtureParams& theta, std::size_t n, std::uint64_t seed);

// Component expressed relative to an interval J of the density estimate:
// tau = 2 tau_t / |J|, mean = mid(J) + mu_t / tau.
struct RescaledComponent {
  double weight = 1.0;
  double mu_t = 0.0;
  double tau_t = 1.0;
  Interval J{-1.0, 1.0};
  std::size_t interval_index = 0;
};
using RescaledParams = std::vector<RescaledComponent>;

// Counts of components per bounded interval of the estimate.
using Allocation = std::vector<int>;

Component to_raw(const RescaledComponent& c);
RescaledComponent to_rescaled(const Component& c, Interval J, std::size_t index);
MixtureParams to_raw(const RescaledParams& r, Family f = Family::gaussian);

struct AdmissibilityConstants {
  double W;
  double z;
  double omega;
  static const AdmissibilityConstants& standard();
};

Interval central_interval(double mu, double tau, const AdmissibilityConstants& c);

double phi_bound(double eps, int k, int m, const AdmissibilityConstants& c);

struct Admissibility {
  bool admissible = false;
  std::optional<std::size_t> interval;
};

// Mass condition on [-1,1] plus existence of J with |J cap L| >= 1/(8 s tau)
// and tau <= phi/|J|. Among witnesses the J with the largest overlap wins.
Admissibility is_admissible(const Component& comp, std::span<const Interval> intervals, double eps,
                            int k, int m, const AdmissibilityConstants& c,
                            Family f = Family::gaussian);

// Signed integrals of theta1 - theta2 over its maximal sign-constant regions.
std::vector<double> difference_run_integrals(const MixtureParams& theta1,
                                             const MixtureParams& theta2);
double l1_distance(const MixtureParams& theta1, const MixtureParams& theta2);
// L1 distance between a mixture and a piecewise polynomial.
double l1_distance(const MixtureParams& theta, const PiecewisePolynomial& p);

// Piecewise-polynomial eps-approximant of one weighted component.
PiecewisePolynomial family_approximant(Family f, const Component& comp, double eps);

std::string to_json(const MixtureParams& theta);
MixtureParams mixture_from_json(const std::string& text);

}  // namespace gmmfit
