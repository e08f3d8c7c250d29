#include "gmmfit/fit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gmmfit/ak_metric.hpp"

namespace gmmfit {

ThetaBox well_behaved_box(int k, double gamma) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  ThetaBox box;
  box.k = k;
  box.prec_lo = std::min(1e-3, gamma);
  box.prec_hi = gamma;
  box.search_prec_hi = gamma;
  return box;
}

RescaledBoxConstants rescaled_box_constants(std::size_t s, int k, double eps, int m) {
  const auto& c = AdmissibilityConstants::standard();
  RescaledBoxConstants r;
  r.phi = phi_bound(eps, k, m, c);
  const double sd = static_cast<double>(s);
  r.mu_t_bound = 2.0 * sd * r.phi / c.omega;
  r.tau_t_lo = std::sqrt(2.0 * std::numbers::pi) * c.omega / (16.0 * sd);
  r.tau_t_hi = r.phi / 2.0;
  r.w_min = eps / (2.0 * k);
  return r;
}

ThetaBox rescaled_box(std::span<const Interval> intervals, const Allocation& v, double eps, int m) {
  if (v.size() != intervals.size()) throw std::invalid_argument("allocation size mismatch");
  int k = 0;
  for (int c : v) {
    if (c < 0) throw std::invalid_argument("allocation counts must be nonnegative");
    k += c;
  }
  if (k < 1) throw std::invalid_argument("allocation assigns no component");
  auto rc = rescaled_box_constants(intervals.size(), k, eps, m);
  ThetaBox box;
  box.rescaled = true;
  box.k = k;
  box.w_min = rc.w_min;
  box.prec_lo = rc.tau_t_lo;
  box.prec_hi = rc.tau_t_hi;
  box.mu_t_bound = rc.mu_t_bound;
  for (std::size_t j = 0; j < v.size(); ++j)
    for (int c = 0; c < v[j]; ++c) {
      box.slots.push_back(intervals[j]);
      box.slot_index.push_back(j);
    }
  return box;
}

void validate(const SolveConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !(cfg.lambda < cfg.eta)) throw std::invalid_argument("need 0 < lambda < eta");
  if (cfg.starts < 1) throw std::invalid_argument("need at least one start");
  if (cfg.refine < 1) throw std::invalid_argument("need at least one refined start");
  if (!(cfg.nu >= 0.0)) throw std::invalid_argument("nu must be nonnegative");
}

double objective(const FitProblem& problem, const MixtureParams& theta) {
  return ak_distance(problem.p_dens, mixture_approx(theta, problem.shape), problem.K);
}

namespace {

using Point = std::vector<double>;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

struct Codec {
  const ThetaBox& box;
  Family family;

  int weight_dims() const { return box.k > 1 ? box.k : 0; }
  int dim() const { return weight_dims() + 2 * box.k; }
  double prec_hi() const { return std::max(box.prec_lo, std::min(box.prec_hi, box.search_prec_hi)); }

  Candidate decode(const Point& z) const {
    const int k = box.k, wd = weight_dims();
    Candidate c;
    c.theta.family = family;
    std::vector<double> w(k, 1.0);
    if (k > 1) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += (w[i] = clamp01(z[i]) + 1e-3);
      for (int i = 0; i < k; ++i) w[i] = box.w_min + (1.0 - k * box.w_min) * w[i] / sum;
    }
    const double lo = box.prec_lo, hi = prec_hi();
    for (int i = 0; i < k; ++i) {
      double mu = -1.0 + 2.0 * clamp01(z[wd + i]);
      double p = lo * std::pow(hi / lo, clamp01(z[wd + k + i]));
      if (box.rescaled) {
        const Interval J = box.slots[i];
        double tau = 2.0 * p / J.width();
        double mu_t = std::clamp(tau * (mu - J.mid()), -box.mu_t_bound, box.mu_t_bound);
        RescaledComponent rc{w[i], mu_t, p, J, box.slot_index[i]};
        c.theta_r.push_back(rc);
        c.theta.components.push_back(to_raw(rc));
      } else {
        c.theta.components.push_back({w[i], mu, p});
      }
    }
    return c;
  }

  Point encode(const MixtureParams& theta) const {
    const int k = box.k, wd = weight_dims();
    Point z(dim(), 0.0);
    const double lo = box.prec_lo, hi = prec_hi();
    for (int i = 0; i < k; ++i) {
      const auto& c = theta.components[i];
      if (k > 1) z[i] = clamp01((c.weight - box.w_min) / (1.0 - k * box.w_min));
      z[wd + i] = clamp01((c.mean + 1.0) / 2.0);
      double p = box.rescaled ? c.precision * box.slots[i].width() / 2.0 : c.precision;
      z[wd + k + i] = hi > lo ? clamp01(std::log(p / lo) / std::log(hi / lo)) : 0.0;
    }
    return z;
  }
};

struct Moments {
  double mass = 0.0, mean = 0.0, sd = 0.0;
};

Moments moments(const PiecewisePolynomial& p, double a, double b) {
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < p.piece_count(); ++i) {
    Interval I = p.piece_interval(i);
    double lo = std::max(a, I.lo), hi = std::min(b, I.hi);
    if (!(hi > lo)) continue;
    const double half = 0.5 * I.width(), mid = I.mid();
    double ua = (lo - mid) / half, ub = (hi - mid) / half;
    const Polynomial& q = p.piece(i);
    Polynomial x({mid, half});
    Polynomial xq = x * q;
    Polynomial xxq = x * xq;
    m0 += half * q.integrate(ua, ub);
    m1 += half * xq.integrate(ua, ub);
    m2 += half * xxq.integrate(ua, ub);
  }
  Moments r;
  r.mass = m0;
  if (m0 > 0.0) {
    r.mean = m1 / m0;
    r.sd = std::sqrt(std::max(m2 / m0 - r.mean * r.mean, 0.0));
  }
  if (!(r.sd > 0.0)) r.sd = std::max(b - a, 1e-6) / std::sqrt(12.0);
  return r;
}

// x with integrate(p, a, x) = target, by bisection
double mass_quantile(const PiecewisePolynomial& p, double a, double b, double target) {
  double lo = a, hi = b;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (integrate(p, a, mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Components fitted to mass-quantile subregions of each region.
MixtureParams split_regions(const PiecewisePolynomial& p, const std::vector<Interval>& regions,
                            const std::vector<int>& counts, const ThetaBox& box, Family f) {
  MixtureParams theta{f, {}};
  double total = 0.0;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Interval R = regions[r];
    double mass = std::max(integrate(p, R.lo, R.hi), 0.0);
    double a = R.lo;
    for (int c = 0; c < counts[r]; ++c) {
      double b = c + 1 == counts[r] ? R.hi : mass_quantile(p, R.lo, R.hi, mass * (c + 1) / counts[r]);
      if (!(b > a)) b = a + 1e-9;
      Moments mo = moments(p, a, b);
      theta.components.push_back({std::max(mo.mass, 1e-12), mo.mean, 1.0 / mo.sd});
      total += theta.components.back().weight;
      a = b;
    }
  }
  for (auto& c : theta.components) c.weight = std::max(c.weight / total, box.w_min);
  double s = 0.0;
  for (auto& c : theta.components) s += c.weight;
  for (auto& c : theta.components) c.weight /= s;
  return theta;
}

std::vector<MixtureParams> informed_starts(const FitProblem& pr, const std::vector<Interval>& all) {
  const ThetaBox& box = pr.box;
  std::vector<MixtureParams> out;
  const Family f = pr.shape.family;
  const Interval S = pr.p_dens.support();
  if (!box.rescaled) {
    out.push_back(split_regions(pr.p_dens, {S}, {box.k}, box, f));
    return out;
  }
  // slots are grouped by interval index in nondecreasing order
  std::vector<std::size_t> used;
  std::vector<int> counts;
  for (std::size_t i = 0; i < box.slot_index.size(); ++i) {
    if (used.empty() || used.back() != box.slot_index[i]) {
      used.push_back(box.slot_index[i]);
      counts.push_back(0);
    }
    ++counts.back();
  }
  std::vector<Interval> own;
  for (std::size_t u : used) own.push_back(all[u]);
  out.push_back(split_regions(pr.p_dens, own, counts, box, f));
  // each interval joins the nearest used interval (ties to the left)
  std::vector<Interval> region(used.size(), Interval{INFINITY, -INFINITY});
  for (std::size_t j = 0; j < all.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t u = 1; u < used.size(); ++u) {
      auto d = [&](std::size_t x) { return x > j ? x - j : j - x; };
      if (d(used[u]) < d(used[best])) best = u;
    }
    region[best].lo = std::min(region[best].lo, all[j].lo);
    region[best].hi = std::max(region[best].hi, all[j].hi);
  }
  out.push_back(split_regions(pr.p_dens, region, counts, box, f));
  return out;
}

struct Local {
  Point z;
  double f;
};

template <class F>
Local nelder_mead(F& f, Point z0, double step, int max_evals) {
  const std::size_t n = z0.size();
  std::vector<Point> simplex(n + 1, z0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += z0[i] + step <= 1.0 ? step : -step;
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i, ++evals) fv[i] = f(simplex[i]);
  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    std::vector<Point> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fv[order[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };
  auto clamp = [](Point p) {
    for (double& v : p) v = clamp01(v);
    return p;
  };
  while (evals < max_evals) {
    sort_simplex();
    double size = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(simplex[i][d] - simplex[0][d]));
    if (size < 1e-7 || (fv[n] - fv[0] < 1e-10 && size < 1e-4)) break;
    Point centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / n;
    auto along = [&](double t) {
      Point p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (simplex[n][d] - centroid[d]);
      return clamp(p);
    };
    Point xr = along(-1.0);
    double fr = f(xr);
    ++evals;
    if (fr < fv[0]) {
      Point xe = along(-2.0);
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      Point xc = fr < fv[n] ? along(-0.5) : along(0.5);
      double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t d = 0; d < n; ++d)
            simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
          fv[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  sort_simplex();
  return {simplex[0], fv[0]};
}

bool better(double fa, const Point& a, double fb, const Point& b) {
  if (fa != fb) return fa < fb;
  return a < b;
}

std::vector<double> flatten(const Candidate& c, bool rescaled) {
  std::vector<double> v;
  if (rescaled) {
    for (const auto& r : c.theta_r) v.insert(v.end(), {r.weight, r.mu_t, r.tau_t});
  } else {
    for (const auto& r : c.theta.components) v.insert(v.end(), {r.weight, r.mean, r.precision});
  }
  return v;
}

}  // namespace

struct FeasibilitySolver::Impl {
  FitProblem problem;
  SolveConfig cfg;
  std::vector<Interval> intervals;
  std::size_t evals = 0;
  bool done = false;
  Candidate best;
  double lipschitz = 0.0;

  double eval(const MixtureParams& theta) {
    ++evals;
    double v = objective(problem, theta);
    if (!std::isfinite(v)) throw std::logic_error("objective is not finite");
    return v;
  }

  void run() {
    Codec codec{problem.box, problem.shape.family};
    const int D = codec.dim();
    auto f = [&](const Point& z) { return eval(codec.decode(z).theta); };
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Latin hypercube screening
    const int N = cfg.starts;
    std::vector<Point> starts(N, Point(D));
    for (int d = 0; d < D; ++d) {
      std::vector<int> perm(N);
      for (int i = 0; i < N; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int i = 0; i < N; ++i) starts[i][d] = (perm[i] + unif(rng)) / N;
    }
    std::vector<std::pair<double, Point>> screened;
    for (auto& z : starts) screened.emplace_back(f(z), z);
    std::sort(screened.begin(), screened.end(),
              [](const auto& a, const auto& b) { return better(a.first, a.second, b.first, b.second); });

    std::vector<Point> seeds;
    for (const auto& th : informed_starts(problem, intervals)) seeds.push_back(codec.encode(th));
    for (int i = 0; i < std::min<int>(cfg.refine, N); ++i) seeds.push_back(screened[i].second);

    const int budget = cfg.max_evals_per_refine > 0 ? cfg.max_evals_per_refine : 200 * D;
    Point zbest = screened[0].second;
    double fbest = screened[0].first;
    for (const auto& z0 : seeds) {
      Local r = nelder_mead(f, z0, 0.1, budget);
      r = nelder_mead(f, r.z, 0.02, budget / 2);
      Candidate cr = codec.decode(r.z), cb = codec.decode(zbest);
      if (r.f < fbest ||
          (r.f == fbest && flatten(cr, problem.box.rescaled) < flatten(cb, problem.box.rescaled))) {
        fbest = r.f;
        zbest = r.z;
      }
    }
    best = codec.decode(zbest);
    best.objective = fbest;
    lipschitz = estimate_lipschitz();
    done = true;
  }

  // finite-difference slope of the objective in the solver coordinates
  double estimate_lipschitz() {
    double f0 = best.objective;
    double sum = 0.0;
    for (std::size_t i = 0; i < best.theta.components.size(); ++i) {
      for (int which = 0; which < 3; ++which) {
        double slope = 0.0;
        for (double sgn : {1.0, -1.0}) {
          Candidate c = best;
          if (problem.box.rescaled) {
            auto& r = c.theta_r[i];
            double& v = which == 0 ? r.weight : which == 1 ? r.mu_t : r.tau_t;
            double h = 1e-6 * std::max(1.0, std::abs(v));
            v += sgn * h;
            if (r.tau_t <= 0.0) continue;
            c.theta.components[i] = to_raw(r);
            slope = std::max(slope, std::abs(eval(c.theta) - f0) / h);
          } else {
            auto& r = c.theta.components[i];
            double& v = which == 0 ? r.weight : which == 1 ? r.mean : r.precision;
            double h = 1e-6 * std::max(1.0, std::abs(v));
            v += sgn * h;
            if (r.precision <= 0.0) continue;
            slope = std::max(slope, std::abs(eval(c.theta) - f0) / h);
          }
        }
        sum += slope * slope;
      }
    }
    return std::sqrt(sum);
  }
};

FeasibilitySolver::FeasibilitySolver(FitProblem problem, SolveConfig cfg)
    : impl_(std::make_unique<Impl>()) {
  validate(cfg);
  if (problem.p_dens.empty()) throw std::invalid_argument("empty density");
  if (problem.K < 1) throw std::invalid_argument("K must be at least 1");
  if (problem.box.rescaled && problem.box.slots.size() != static_cast<std::size_t>(problem.box.k))
    throw std::invalid_argument("rescaled box needs one interval per component");
  impl_->problem = std::move(problem);
  impl_->cfg = cfg;
  for (std::size_t i = 0; i < impl_->problem.p_dens.piece_count(); ++i)
    impl_->intervals.push_back(impl_->problem.p_dens.piece_interval(i));
}

FeasibilitySolver::~FeasibilitySolver() = default;
FeasibilitySolver::FeasibilitySolver(FeasibilitySolver&&) noexcept = default;

const Candidate& FeasibilitySolver::minimum() {
  if (!impl_->done) impl_->run();
  return impl_->best;
}

SolveResult FeasibilitySolver::solve(double nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("nu must be nonnegative");
  const Candidate& best = minimum();
  SolveResult r;
  r.best = best;
  r.lipschitz = impl_->lipschitz;
  r.slack = impl_->lipschitz * impl_->cfg.lambda;
  r.evaluations = impl_->evals;
  r.feasible = best.objective <= nu * (1.0 + 1e-6) + r.slack;
  return r;
}

std::size_t FeasibilitySolver::evaluations() const { return impl_->evals; }
const FitProblem& FeasibilitySolver::problem() const { return impl_->problem; }

SolveResult feasibility_solve(const FitProblem& problem, const SolveConfig& cfg) {
  FeasibilitySolver solver(problem, cfg);
  return solver.solve(cfg.nu);
}

}  // namespace gmmfit
