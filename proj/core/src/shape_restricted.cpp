#include "gmmfit/shape_restricted.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gmmfit {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

int log_ceil(double eps) { return std::max(1, static_cast<int>(std::ceil(std::log(1.0 / eps)))); }

// Local-coordinate series of e^{-y} about c = H/2 on [0, H]:
// e^{-c} sum_j (-H/2)^j u^j / j!, mirrored (u -> -u) when `mirror`.
Polynomial exp_series(double H, int d, bool mirror) {
  std::vector<double> c(d + 1);
  double term = std::exp(-H / 2.0);
  for (int j = 0; j <= d; ++j) {
    c[j] = (mirror && j % 2 == 1) ? -term : term;
    term *= -(H / 2.0) / (j + 1);
  }
  return Polynomial(std::move(c));
}

PiecewisePolynomial build_standard(Family f, double eps, int d, double& half_width) {
  switch (f) {
    case Family::gaussian: {
      const double h = 2.0 * std::sqrt(std::log(1.0 / eps));
      half_width = h;
      std::vector<double> c(d + 1, 0.0);
      double term = kInvSqrt2Pi;
      for (int j = 0; 2 * j <= d; ++j) {
        c[2 * j] = term;
        term *= -(h * h / 2.0) / (j + 1);
      }
      return PiecewisePolynomial({-h, h}, {Polynomial(std::move(c))});
    }
    case Family::exponential: {
      const double H = 2.0 * std::log(1.0 / eps);
      half_width = H;
      return PiecewisePolynomial({0.0, H}, {exp_series(H, d, false)});
    }
    case Family::laplace: {
      const double H = 2.0 * std::log(1.0 / eps);
      half_width = H;
      return PiecewisePolynomial({-H, 0.0, H},
                                 {0.5 * exp_series(H, d, true), 0.5 * exp_series(H, d, false)});
    }
  }
  throw std::invalid_argument("unknown family");
}

double standard_pdf(Family f, double y) { return family_pdf(f, 0.0, 1.0, y); }

double shape_error(Family f, const PiecewisePolynomial& s) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i < s.piece_count(); ++i) {
    Interval I = s.piece_interval(i);
    auto g = [&](double y) { return std::abs(standard_pdf(f, y) - s(y)); };
    // fixed panels keep the kinks of |.| from stalling an adaptive scheme
    const int parts = 256;
    for (int p = 0; p < parts; ++p) {
      double a = I.lo + I.width() * p / parts, b = I.lo + I.width() * (p + 1) / parts;
      total += gauss_kronrod<double, 31>::integrate(g, a, b, 0);
    }
  }
  return total;
}

}  // namespace

int degree_for_quality(double eps, int quality) { return 2 * quality * log_ceil(eps); }

ShapePolyConfig ShapePolyConfig::make(double eps, Family family) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  for (int q = 1;; ++q) {
    int d = degree_for_quality(eps, q);
    if (d > kMaxDegree)
      throw std::invalid_argument("no Taylor degree within the cap reaches eps/4 accuracy");
    ShapePolyConfig cfg;
    cfg.eps = eps;
    cfg.family = family;
    cfg.taylor_quality = q;
    cfg.degree = d;
    cfg.standard = build_standard(family, eps, d, cfg.half_width);
    cfg.validated_error = shape_error(family, cfg.standard);
    if (cfg.validated_error < eps / 4.0) return cfg;
  }
}

Polynomial taylor_gaussian(int d) {
  if (d < 0 || d % 2 != 0) throw std::invalid_argument("Taylor degree must be even and nonnegative");
  if (d > kMaxDegree) throw std::invalid_argument("Taylor degree exceeds cap");
  std::vector<double> c(d + 1, 0.0);
  double term = kInvSqrt2Pi;
  for (int j = 0; 2 * j <= d; ++j) {
    c[2 * j] = term;
    term *= -0.5 / (j + 1);
  }
  return Polynomial(std::move(c));
}

PiecewisePolynomial pw_gaussian_approx(const ShapePolyConfig& cfg) {
  if (cfg.family != Family::gaussian) throw std::invalid_argument("config is not Gaussian");
  return cfg.standard;
}

PiecewisePolynomial component_approx(const Component& c, const ShapePolyConfig& cfg) {
  if (!(c.precision > 0.0)) throw std::invalid_argument("precision must be positive");
  auto sb = cfg.standard.breakpoints();
  std::vector<double> bp(sb.size());
  for (std::size_t i = 0; i < sb.size(); ++i) bp[i] = c.mean + sb[i] / c.precision;
  std::vector<Polynomial> pieces(cfg.standard.pieces().begin(), cfg.standard.pieces().end());
  const double f = c.weight * c.precision;
  for (auto& q : pieces) q *= f;
  return PiecewisePolynomial(std::move(bp), std::move(pieces));
}

PiecewisePolynomial mixture_approx(const MixtureParams& theta, const ShapePolyConfig& cfg) {
  if (theta.family != cfg.family) throw std::invalid_argument("family mismatch with config");
  std::vector<PiecewisePolynomial> parts;
  parts.reserve(theta.k());
  for (const auto& c : theta.components)
    if (c.weight != 0.0) parts.push_back(component_approx(c, cfg));
  std::vector<const PiecewisePolynomial*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  std::vector<double> ones(parts.size(), 1.0);
  return linear_combination(ptrs, ones);
}

PiecewisePolynomial rescaled_component(double mu_t, double tau_t, Interval J,
                                       const ShapePolyConfig& cfg) {
  if (!(tau_t > 0.0) || !(J.width() > 0.0))
    throw std::invalid_argument("rescaled component needs tau_t > 0 and |J| > 0");
  return component_approx(to_raw(RescaledComponent{1.0, mu_t, tau_t, J, 0}), cfg);
}

PiecewisePolynomial rescaled_mixture_approx(const RescaledParams& theta_r, const Allocation& v,
                                            const ShapePolyConfig& cfg) {
  std::vector<int> seen(v.size(), 0);
  int total = 0;
  for (int c : v) total += c;
  if (static_cast<std::size_t>(total) != theta_r.size())
    throw std::invalid_argument("allocation does not match the component count");
  for (const auto& c : theta_r) {
    if (c.interval_index >= v.size()) throw std::invalid_argument("component interval out of range");
    ++seen[c.interval_index];
  }
  if (seen != v) throw std::invalid_argument("components per interval do not match the allocation");
  return mixture_approx(to_raw(theta_r, cfg.family), cfg);
}

}  // namespace gmmfit

#include <map>
#include <mutex>

namespace gmmfit {

PiecewisePolynomial family_approximant(Family f, const Component& comp, double eps) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, ShapePolyConfig> cache;
  const ShapePolyConfig* cfg = nullptr;
  {
    std::lock_guard lock(mu);
    auto key = std::make_pair(static_cast<int>(f), eps);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, ShapePolyConfig::make(eps, f)).first;
    cfg = &it->second;
  }
  return component_approx(comp, *cfg);
}

}  // namespace gmmfit
