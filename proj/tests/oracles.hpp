#pragma once

// Reference computations for the tests. Nothing here calls into the library's
// numerical routines; values are rebuilt from closed forms, quadrature and
// dense grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using Fn = std::function<double(double)>;

inline double quad(const Fn& f, double a, double b, double tol = 1e-13) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, tol);
}

// Quadrature with the range split at the given points.
inline double quad_split(const Fn& f, double a, double b, std::vector<double> cuts, double tol = 1e-13) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = std::max(a, cuts[i]), hi = std::min(b, cuts[i + 1]);
    if (hi > lo) s += quad(f, lo, hi, tol);
  }
  return s;
}

inline double bisect(const Fn& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if ((fm > 0) == (flo > 0) && fm != 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Sign changes of f on a uniform grid, refined by bisection.
inline std::vector<double> grid_roots(const Fn& f, double lo, double hi, std::size_t n) {
  std::vector<double> roots;
  double xp = lo, fp = f(lo);
  for (std::size_t i = 1; i <= n; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    double fx = f(x);
    if ((fp < 0 && fx > 0) || (fp > 0 && fx < 0)) roots.push_back(bisect(f, xp, x));
    if (fx != 0.0) {
      xp = x;
      fp = fx;
    }
  }
  return roots;
}

// Number of sign changes of the sampled values, ignoring exact zeros.
inline int sign_changes(const Fn& f, double lo, double hi, std::size_t n) {
  int changes = 0, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = f(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    int s = (v > 0) - (v < 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

// integral of |f| on [lo, hi]: crossings located on a grid, extra cuts at
// known kinks, adaptive quadrature per region.
inline double l1(const Fn& f, double lo, double hi, std::vector<double> kinks = {},
                 std::size_t grid = 20000) {
  auto cuts = grid_roots(f, lo, hi, grid);
  cuts.insert(cuts.end(), kinks.begin(), kinks.end());
  return quad_split([&](double x) { return std::abs(f(x)); }, lo, hi, cuts, 1e-12);
}

inline double trapezoid(const Fn& f, double lo, double hi, std::size_t n) {
  double h = (hi - lo) / static_cast<double>(n - 1), s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * f(lo + h * static_cast<double>(i));
  }
  return s * h;
}

// max over at most K disjoint intervals with endpoints among the points of
// sum |F(b) - F(a)|, by an O(K n^2) recursion over the last interval.
inline double ak_from_prefix(const std::vector<double>& F, int K) {
  const std::size_t n = F.size();
  std::vector<std::vector<double>> best(static_cast<std::size_t>(K) + 1, std::vector<double>(n, 0.0));
  for (int j = 1; j <= K; ++j)
    for (std::size_t b = 0; b < n; ++b) {
      double v = b ? best[j][b - 1] : 0.0;
      for (std::size_t a = 0; a < b; ++a) v = std::max(v, best[j - 1][a] + std::abs(F[b] - F[a]));
      best[j][b] = v;
    }
  return best[static_cast<std::size_t>(K)][n - 1];
}

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

inline double normal_pdf(double x, double mu, double tau) {
  double y = tau * (x - mu);
  return tau * kInvSqrt2Pi * std::exp(-0.5 * y * y);
}

inline double normal_cdf(double x, double mu, double tau) {
  return 0.5 * std::erfc(-tau * (x - mu) / std::numbers::sqrt2);
}

struct Comp {
  double w, mu, tau;
};

inline double gmm_pdf(const std::vector<Comp>& cs, double x) {
  double v = 0.0;
  for (const auto& c : cs) v += c.w * normal_pdf(x, c.mu, c.tau);
  return v;
}

// Range holding all but a negligible part of every component.
inline std::pair<double, double> gmm_range(const std::vector<Comp>& a, const std::vector<Comp>& b = {}) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* cs : {&a, &b})
    for (const auto& c : *cs) {
      lo = std::min(lo, c.mu - 12.0 / c.tau);
      hi = std::max(hi, c.mu + 12.0 / c.tau);
    }
  return {lo, hi};
}

// The Gaussian Taylor polynomial evaluated term by term.
inline double taylor_value(int d, double x) {
  double s = 0.0, term = 1.0;
  for (int j = 0; 2 * j <= d; ++j) {
    if (j > 0) term *= -0.5 * x * x / j;
    s += term;
  }
  return kInvSqrt2Pi * s;
}

}  // namespace oracle
