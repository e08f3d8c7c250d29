#include "gmmfit/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "gmmfit/ak_metric.hpp"
#include "gmmfit/shape_restricted.hpp"

namespace gmmfit {

namespace {

constexpr double kNuCap = 3.0;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int thread_count(const LearnConfig& cfg) {
  int n = cfg.threads;
  if (n <= 0) {
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const char* env = std::getenv("GMMFIT_THREADS");
    const int cap = env ? std::atoi(env) : 0;
    n = cap > 0 ? std::min(cap, hw) : hw;
  }
  return std::max(1, n);
}

struct DoublingResult {
  SolveResult result;
  double nu = 0.0;
  int iterations = 0;
};

DoublingResult doubling_loop(FeasibilitySolver& solver, double eps) {
  DoublingResult d;
  d.nu = eps;
  for (;;) {
    d.result = solver.solve(d.nu);
    if (d.result.feasible) return d;
    if (d.nu >= kNuCap) throw InfeasibleError("no feasible parameters up to nu = 3");
    d.nu = std::min(2.0 * d.nu, kNuCap);
    ++d.iterations;
  }
}

AllocationFit fit_allocation(const DensityEstimate& unit, const Allocation& v, double eps,
                             const LearnConfig& cfg, const ShapePolyConfig& shape,
                             std::uint64_t seed) {
  int k = 0;
  for (int c : v) k += c;
  const std::size_t s = unit.intervals.size();
  const double phi = phi_bound(eps, k, std::max(1, unit.degree), AdmissibilityConstants::standard());
  FitProblem problem;
  problem.p_dens = unit.pp;
  problem.shape = shape;
  problem.K = 4 * k;
  problem.box = rescaled_box(unit.intervals, v, eps, std::max(1, unit.degree));
  SolveConfig sc;
  sc.lambda = allocation_lambda(eps, k, s, phi, cfg.c1);
  sc.eta = allocation_psi(k, s, phi);
  sc.nu = eps;
  sc.starts = cfg.starts_per_component * k;
  sc.refine = cfg.refine;
  sc.seed = seed;
  FeasibilitySolver solver(std::move(problem), sc);
  auto d = doubling_loop(solver, eps);
  AllocationFit out;
  out.theta_r = d.result.best.theta_r;
  out.nu = d.nu;
  out.achieved = d.result.best.objective;
  out.iterations = d.iterations;
  out.evaluations = d.result.evaluations;
  out.lipschitz = d.result.lipschitz;
  return out;
}

void finish_report(FitReport& rep, const MixtureParams& unit_theta, const DensityEstimate& est,
                   const ShapePolyConfig& shape, int K) {
  rep.theta = descale(unit_theta, est.rescale_map.alpha, est.rescale_map.beta);
  validate(rep.theta);
  rep.estimate = est;
  rep.l1_to_estimate = l1_distance(rep.theta, est.pp);
  rep.ak_to_estimate = ak_distance(est.pp, mixture_approx(rep.theta, shape), K);
  rep.solver.K = K;
  rep.solver.taylor_degree = shape.degree;
  rep.solver.estimate_pieces = static_cast<int>(est.piece_count);
  rep.solver.estimate_degree = est.degree;
  rep.solver.max_nu_iterations = max_nu_iterations(shape.eps);
}

FitReport learn_general(std::span<const double> samples, const LearnConfig& cfg, Family family) {
  validate(cfg);
  const int k = cfg.k;
  const double eps = cfg.eps;
  DensityEstimate est = estimate_density(samples, k, eps, cfg.estimator);
  DensityEstimate unit = rescale_to_unit(est);
  ShapePolyConfig shape = ShapePolyConfig::make(eps, family);
  const std::size_t s = unit.intervals.size();
  auto allocs = enumerate_allocations(k, static_cast<int>(s));

  std::vector<AllocationFit> fits(allocs.size());
  std::vector<std::exception_ptr> errors(allocs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < allocs.size();) {
      try {
        fits[i] = fit_allocation(unit, allocs[i], eps, cfg, shape, mix_seed(cfg.seed, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nt = std::min<int>(thread_count(cfg), static_cast<int>(allocs.size()));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::size_t best = 0;
  FitReport rep;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    rep.solver.evaluations += fits[i].evaluations;
    rep.solver.nu_iterations = std::max(rep.solver.nu_iterations, fits[i].iterations);
    const auto& a = fits[i];
    const auto& b = fits[best];
    if (a.nu < b.nu || (a.nu == b.nu && a.achieved < b.achieved)) best = i;
  }
  const AllocationFit& win = fits[best];
  MixtureParams unit_theta = to_raw(win.theta_r, family);
  round_weights(unit_theta, eps);

  const double phi = phi_bound(eps, k, std::max(1, unit.degree), AdmissibilityConstants::standard());
  rep.nu = win.nu;
  rep.allocation = allocs[best];
  rep.solver.allocations = allocs.size();
  rep.solver.phi = phi;
  rep.solver.lambda = allocation_lambda(eps, k, s, phi, cfg.c1);
  rep.solver.eta = allocation_psi(k, s, phi);
  rep.solver.achieved = win.achieved;
  rep.solver.lipschitz = win.lipschitz;
  finish_report(rep, unit_theta, est, shape, 4 * k);
  return rep;
}

}  // namespace

void validate(const LearnConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (cfg.starts_per_component < 1 || cfg.refine < 1)
    throw std::invalid_argument("solver start counts must be positive");
  if (!(cfg.c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
}

int max_nu_iterations(double eps) { return static_cast<int>(std::ceil(std::log2(kNuCap / eps))); }

std::vector<Allocation> enumerate_allocations(int k, int s) {
  if (k < 1 || s < 1) throw std::invalid_argument("enumerate_allocations needs k >= 1 and s >= 1");
  std::vector<Allocation> out;
  Allocation cur(s, 0);
  // lexicographically decreasing compositions of k into s parts
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == s - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int c = left; c >= 0; --c) {
      cur[pos] = c;
      self(self, pos + 1, left - c);
    }
  };
  rec(rec, 0, k);
  return out;
}

double allocation_lambda(double eps, int k, std::size_t s, double phi, double c1) {
  double a = c1 * std::pow(eps / (phi * k), 2.0);
  return std::min({a, 1.0 / (16.0 * static_cast<double>(s)), eps / (4.0 * k)});
}

double allocation_psi(int k, std::size_t s, double phi) {
  const double omega = AdmissibilityConstants::standard().omega;
  return 6.0 * k * static_cast<double>(s) * phi / omega + 1.5 * k * phi + 1.0;
}

void round_weights(MixtureParams& theta, double eps) {
  const std::size_t k = theta.k();
  if (k == 0) return;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    auto& w = theta.components[i].weight;
    w = std::clamp(w - eps / (2.0 * k), 0.0, 1.0);
    sum += w;
  }
  theta.components[k - 1].weight = 1.0 - sum;
  if (theta.components[k - 1].weight < 0.0) {
    for (auto& c : theta.components) c.weight = std::max(c.weight, 0.0);
    double t = 0.0;
    for (auto& c : theta.components) t += c.weight;
    for (auto& c : theta.components) c.weight /= t;
  }
}

MixtureParams descale(const MixtureParams& unit_theta, double alpha, double beta) {
  MixtureParams out = unit_theta;
  for (auto& c : out.components) {
    c.mean = (c.mean + 1.0) * (beta - alpha) / 2.0 + alpha;
    c.precision = 2.0 * c.precision / (beta - alpha);
  }
  return out;
}

AllocationFit find_fit_given_allocation(const DensityEstimate& unit, const Allocation& v, double eps,
                                        const LearnConfig& cfg, Family family, std::uint64_t seed) {
  if (v.size() != unit.intervals.size())
    throw std::invalid_argument("allocation does not match the interval count");
  return fit_allocation(unit, v, eps, cfg, ShapePolyConfig::make(eps, family), seed);
}

FitReport learn_gmm(std::span<const double> samples, const LearnConfig& cfg) {
  return learn_general(samples, cfg, Family::gaussian);
}

FitReport learn_family(std::span<const double> samples, const LearnConfig& cfg, Family family) {
  return learn_general(samples, cfg, family);
}

FitReport learn_well_behaved(std::span<const double> samples, const LearnConfig& cfg) {
  validate(cfg);
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("the well-behaved learner needs gamma > 0");
  const int k = cfg.k;
  const double eps = cfg.eps;
  DensityEstimate est = estimate_density(samples, k, eps, cfg.estimator);
  DensityEstimate unit = rescale_to_unit(est);
  ShapePolyConfig shape = ShapePolyConfig::make(eps);

  FitProblem problem;
  problem.p_dens = unit.pp;
  problem.shape = shape;
  problem.K = 4 * k;
  problem.box = well_behaved_box(k, cfg.gamma);
  SolveConfig sc;
  sc.lambda = cfg.c1 * (1.0 / cfg.gamma) * (eps / k) * (eps / k);
  sc.eta = 3.0 * k * cfg.gamma;
  sc.nu = eps;
  sc.starts = cfg.starts_per_component * k;
  sc.refine = cfg.refine;
  sc.seed = mix_seed(cfg.seed, 0);
  FeasibilitySolver solver(std::move(problem), sc);
  auto d = doubling_loop(solver, eps);

  MixtureParams unit_theta = d.result.best.theta;
  FitReport rep;
  // parameter fixing and renormalisation
  double W = 0.0;
  for (auto& c : unit_theta.components) {
    if (c.precision <= 0.0) c.weight = 0.0;
    W += c.weight;
  }
  if (W > 0.0) {
    for (auto& c : unit_theta.components) c.weight /= W;
  } else {
    FitProblem p1{unit.pp, shape, 4, well_behaved_box(1, cfg.gamma)};
    FeasibilitySolver s1(std::move(p1), sc);
    unit_theta = s1.minimum().theta;
    unit_theta.components[0].weight = 1.0;
    rep.solver.fallback = true;
  }
  rep.nu = d.nu;
  rep.solver.evaluations = d.result.evaluations;
  rep.solver.nu_iterations = d.iterations;
  rep.solver.allocations = 1;
  rep.solver.lambda = sc.lambda;
  rep.solver.eta = sc.eta;
  rep.solver.achieved = d.result.best.objective;
  rep.solver.lipschitz = d.result.lipschitz;
  finish_report(rep, unit_theta, est, shape, 4 * k);
  return rep;
}

}  // namespace gmmfit
