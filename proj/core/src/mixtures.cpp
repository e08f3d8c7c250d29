#include "gmmfit/mixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "json_util.hpp"

namespace gmmfit {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

double bisect_root(const auto& f, double lo, double hi, int slo) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    int s = sgn(f(mid));
    if (s == 0) return mid;
    if (s == slo) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Signed integrals of f over its sign-constant regions. Sign changes are
// found on the grid and refined by bisection; each region integral comes
// from the cumulative function C(x) = int_{-inf}^x f with C(+inf) = total.
std::vector<double> region_integrals(const auto& f, const auto& cum, std::vector<double> grid,
                                     double total) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> roots;
  int last = 0;
  double last_x = 0.0;
  for (double x : grid) {
    int s = sgn(f(x));
    if (s == 0) continue;
    if (last != 0 && s != last) roots.push_back(bisect_root(f, last_x, x, last));
    last = s;
    last_x = x;
  }
  std::vector<double> out;
  double prev = 0.0;
  for (double r : roots) {
    double c = cum(r);
    out.push_back(c - prev);
    prev = c;
  }
  out.push_back(total - prev);
  return out;
}

void append_component_grid(std::vector<double>& grid, Family f, const Component& c) {
  const double mu = c.mean, tau = c.precision;
  switch (f) {
    case Family::gaussian:
      for (int i = -400; i <= 400; ++i) grid.push_back(mu + (i * 0.035) / tau);
      break;
    case Family::exponential:
      grid.push_back(std::nextafter(mu, -INFINITY));
      for (int i = 0; i <= 900; ++i) grid.push_back(mu + (i * 0.05) / tau);
      break;
    case Family::laplace:
      for (int i = -900; i <= 900; ++i) grid.push_back(mu + (i * 0.05) / tau);
      break;
  }
}

std::vector<double> mixture_grid(const MixtureParams& theta) {
  std::vector<double> grid;
  for (const auto& c : theta.components)
    if (c.weight > 0.0) append_component_grid(grid, theta.family, c);
  return grid;
}

double central_half_width(Family f, double W) {
  switch (f) {
    case Family::gaussian: return AdmissibilityConstants::standard().z;
    case Family::laplace: return -std::log1p(-W);
    case Family::exponential: break;
  }
  return 0.0;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::exponential: return "exponential";
    case Family::laplace: return "laplace";
  }
  return "gaussian";
}

Family family_from_string(const std::string& name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "exponential") return Family::exponential;
  if (name == "laplace") return Family::laplace;
  throw std::invalid_argument("unknown family '" + name + "'");
}

void validate(const MixtureParams& theta) {
  if (theta.components.empty()) throw std::invalid_argument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : theta.components) {
    if (!std::isfinite(c.weight) || !std::isfinite(c.mean) || !std::isfinite(c.precision))
      throw std::invalid_argument("mixture parameters must be finite");
    if (c.weight < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
    if (!(c.precision > 0.0)) throw std::invalid_argument("precisions must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mixture weights must sum to 1");
}

double family_pdf(Family f, double mean, double precision, double x) {
  const double y = precision * (x - mean);
  switch (f) {
    case Family::gaussian: return precision * kInvSqrt2Pi * std::exp(-0.5 * y * y);
    case Family::exponential: return y < 0.0 ? 0.0 : precision * std::exp(-y);
    case Family::laplace: return 0.5 * precision * std::exp(-std::abs(y));
  }
  return 0.0;
}

double family_cdf(Family f, double mean, double precision, double x) {
  const double y = precision * (x - mean);
  switch (f) {
    case Family::gaussian: return 0.5 * std::erfc(-y / std::numbers::sqrt2);
    case Family::exponential: return y < 0.0 ? 0.0 : -std::expm1(-y);
    case Family::laplace: return y < 0.0 ? 0.5 * std::exp(y) : 1.0 - 0.5 * std::exp(-y);
  }
  return 0.0;
}

double pdf(const MixtureParams& theta, double x) {
  double v = 0.0;
  for (const auto& c : theta.components)
    if (c.weight != 0.0) v += c.weight * family_pdf(theta.family, c.mean, c.precision, x);
  return v;
}

double cdf(const MixtureParams& theta, double x) {
  double v = 0.0;
  for (const auto& c : theta.components)
    if (c.weight != 0.0) v += c.weight * family_cdf(theta.family, c.mean, c.precision, x);
  return v;
}

std::vector<double> sample(const MixtureParams& theta, std::size_t n, std::uint64_t seed) {
  validate(theta);
  if (n == 0) throw std::invalid_argument("sample count must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& c : theta.components) cum.push_back(acc += c.weight);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = unif(rng) * acc;
    std::size_t j = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (j >= cum.size()) j = cum.size() - 1;
    while (theta.components[j].weight == 0.0 && j > 0) --j;
    const auto& c = theta.components[j];
    double y = 0.0;
    switch (theta.family) {
      case Family::gaussian: y = normal(rng); break;
      case Family::exponential: y = expo(rng); break;
      case Family::laplace: {
        double e = expo(rng);
        y = unif(rng) < 0.5 ? -e : e;
        break;
      }
    }
    out.push_back(c.mean + y / c.precision);
  }
  return out;
}

Component to_raw(const RescaledComponent& c) {
  double tau = 2.0 * c.tau_t / c.J.width();
  return {c.weight, c.J.mid() + c.mu_t / tau, tau};
}

RescaledComponent to_rescaled(const Component& c, Interval J, std::size_t index) {
  double tau_t = c.precision * J.width() / 2.0;
  return {c.weight, c.precision * (c.mean - J.mid()), tau_t, J, index};
}

MixtureParams to_raw(const RescaledParams& r, Family f) {
  MixtureParams theta{f, {}};
  for (const auto& c : r) theta.components.push_back(to_raw(c));
  return theta;
}

const AdmissibilityConstants& AdmissibilityConstants::standard() {
  static const AdmissibilityConstants c = [] {
    const double W = 55.0 / 56.0;
    boost::math::normal_distribution<double> n01;
    const double z = boost::math::quantile(n01, (1.0 + W) / 2.0);
    return AdmissibilityConstants{W, z, boost::math::pdf(n01, z)};
  }();
  return c;
}

Interval central_interval(double mu, double tau, const AdmissibilityConstants& c) {
  if (!(tau > 0.0)) throw std::invalid_argument("precision must be positive");
  return {mu - c.z / tau, mu + c.z / tau};
}

double phi_bound(double eps, int k, int m, const AdmissibilityConstants& c) {
  if (!(eps > 0.0) || eps > 2.0) throw std::invalid_argument("phi_bound needs eps in (0,2]");
  if (m < 1 || k < 1) throw std::invalid_argument("phi_bound needs k >= 1 and m >= 1");
  return 32.0 * k / (c.omega * eps) * m * (m + 1.0) * (m + 1.0) *
         std::pow(std::numbers::sqrt2 + 1.0, m);
}

Admissibility is_admissible(const Component& comp, std::span<const Interval> intervals, double eps,
                            int k, int m, const AdmissibilityConstants& c, Family f) {
  if (intervals.empty()) throw std::invalid_argument("admissibility needs a nonempty interval set");
  const double tau = comp.precision;
  double mass = family_cdf(f, comp.mean, tau, 1.0) - family_cdf(f, comp.mean, tau, -1.0);
  if (mass < 0.5) return {};
  Interval L;
  if (f == Family::exponential) {
    L = {comp.mean - std::log1p(-(1.0 - c.W) / 2.0) / tau,
         comp.mean - std::log((1.0 - c.W) / 2.0) / tau};
  } else {
    double hw = central_half_width(f, c.W);
    L = {comp.mean - hw / tau, comp.mean + hw / tau};
  }
  const double s = static_cast<double>(intervals.size());
  const double phi = phi_bound(eps, k, m, c);
  Admissibility best;
  double best_overlap = -1.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const Interval& J = intervals[i];
    double overlap = std::max(0.0, std::min(J.hi, L.hi) - std::max(J.lo, L.lo));
    if (overlap >= 1.0 / (8.0 * s * tau) && tau <= phi / J.width() && overlap > best_overlap) {
      best_overlap = overlap;
      best = {true, i};
    }
  }
  return best;
}

std::vector<double> difference_run_integrals(const MixtureParams& theta1,
                                             const MixtureParams& theta2) {
  auto f = [&](double x) { return pdf(theta1, x) - pdf(theta2, x); };
  auto cum = [&](double x) { return cdf(theta1, x) - cdf(theta2, x); };
  std::vector<double> grid = mixture_grid(theta1);
  auto g2 = mixture_grid(theta2);
  grid.insert(grid.end(), g2.begin(), g2.end());
  double w1 = 0.0, w2 = 0.0;
  for (const auto& c : theta1.components) w1 += c.weight;
  for (const auto& c : theta2.components) w2 += c.weight;
  return region_integrals(f, cum, std::move(grid), w1 - w2);
}

double l1_distance(const MixtureParams& theta1, const MixtureParams& theta2) {
  double total = 0.0;
  for (double v : difference_run_integrals(theta1, theta2)) total += std::abs(v);
  return total;
}

double l1_distance(const MixtureParams& theta, const PiecewisePolynomial& p) {
  auto f = [&](double x) { return pdf(theta, x) - p(x); };
  const double lo = p.empty() ? 0.0 : p.support().lo;
  auto cum = [&](double x) {
    double pp_part = p.empty() || x <= lo ? 0.0 : integrate(p, lo, std::min(x, p.support().hi));
    return cdf(theta, x) - pp_part;
  };
  std::vector<double> grid = mixture_grid(theta);
  for (std::size_t i = 0; i < p.piece_count(); ++i) {
    Interval I = p.piece_interval(i);
    int n = 8 * (p.piece(i).degree() + 1) + 16;
    for (int j = 0; j <= n; ++j) grid.push_back(I.lo + I.width() * j / n);
    grid.push_back(std::nextafter(I.lo, -INFINITY));
  }
  double wsum = 0.0;
  for (const auto& c : theta.components) wsum += c.weight;
  double total = 0.0;
  for (double v : region_integrals(f, cum, std::move(grid), wsum - integrate(p))) total += std::abs(v);
  return total;
}

std::string to_json(const MixtureParams& theta) {
  nlohmann::ordered_json j;
  j["family"] = to_string(theta.family);
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : theta.components)
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"precision", c.precision}});
  j["components"] = std::move(comps);
  return j.dump(2);
}

MixtureParams mixture_from_json(const std::string& text) {
  auto j = detail::parse_json(text);
  MixtureParams theta;
  try {
    theta.family = family_from_string(j.value("family", std::string("gaussian")));
    for (const auto& c : j.at("components"))
      theta.components.push_back(
          {c.at("weight").get<double>(), c.at("mean").get<double>(), c.at("precision").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed mixture JSON: ") + e.what());
  }
  validate(theta);
  return theta;
}

}  // namespace gmmfit
