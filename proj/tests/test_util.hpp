#pragma once

#include <random>
#include <vector>

#include "gmmfit/mixtures.hpp"
#include "gmmfit/piecewise_poly.hpp"
#include "oracles.hpp"

namespace testutil {

// Random pp with `pieces` pieces of degree <= deg on a random partition of [lo, hi].
inline gmmfit::PiecewisePolynomial random_pp(std::mt19937_64& rng, int pieces, int deg, double lo = -2.0,
                                             double hi = 3.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0), c(-1.0, 1.0);
  std::vector<double> bp{lo, hi};
  for (int i = 1; i < pieces; ++i) bp.push_back(lo + (hi - lo) * u(rng));
  std::sort(bp.begin(), bp.end());
  std::vector<gmmfit::Polynomial> ps;
  for (int i = 0; i < pieces; ++i) {
    std::vector<double> cs(static_cast<std::size_t>(deg) + 1);
    for (auto& x : cs) x = c(rng);
    ps.emplace_back(cs);
  }
  return gmmfit::PiecewisePolynomial(bp, ps);
}

inline gmmfit::MixtureParams random_gmm(std::mt19937_64& rng, int k, double mu_spread = 3.0,
                                        double tau_lo = 0.5, double tau_hi = 3.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gmmfit::MixtureParams th;
  double tot = 0.0;
  for (int i = 0; i < k; ++i) {
    double w = 0.2 + u(rng);
    tot += w;
    th.components.push_back({w, mu_spread * (2.0 * u(rng) - 1.0), tau_lo * std::pow(tau_hi / tau_lo, u(rng))});
  }
  for (auto& c : th.components) c.weight /= tot;
  return th;
}

inline std::vector<oracle::Comp> comps(const gmmfit::MixtureParams& th) {
  std::vector<oracle::Comp> out;
  for (const auto& c : th.components) out.push_back({c.weight, c.mean, c.precision});
  return out;
}

}  // namespace testutil
