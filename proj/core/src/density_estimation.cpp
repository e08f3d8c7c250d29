#include "gmmfit/density_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmmfit/ak_metric.hpp"
#include "json_util.hpp"

namespace gmmfit {

namespace {

std::vector<Polynomial> legendre_table(int m) {
  std::vector<Polynomial> L;
  L.push_back(Polynomial::constant(1.0));
  if (m >= 1) L.push_back(Polynomial({0.0, 1.0}));
  const Polynomial u({0.0, 1.0});
  for (int j = 1; j < m; ++j)
    L.push_back((u * L[j]) * ((2.0 * j + 1.0) / (j + 1.0)) - L[j - 1] * (j / (j + 1.0)));
  return L;
}

double min_on_unit(const Polynomial& q) {
  double lo = std::min(q(-1.0), q(1.0));
  for (double r : sign_change_roots(q.derivative(), -1.0, 1.0, 1e-12)) lo = std::min(lo, q(r));
  return lo;
}

struct Piece {
  std::size_t i0 = 0, i1 = 0;  // sample index range [i0, i1)
  Interval I;
  Polynomial q;
  double cost = 0.0;
};

class Fitter {
 public:
  Fitter(std::span<const double> x, int m, int K) : x_(x), m_(m), K_(K), L_(legendre_table(m)) {}

  Piece fit(std::size_t i0, std::size_t i1, Interval I) const {
    const double n = static_cast<double>(x_.size());
    std::vector<double> S(m_ + 1, 0.0);
    for (std::size_t i = i0; i < i1; ++i) {
      double u = (2.0 * x_[i] - I.lo - I.hi) / I.width();
      double p0 = 1.0, p1 = u;
      S[0] += 1.0;
      if (m_ >= 1) S[1] += u;
      for (int j = 1; j < m_; ++j) {
        double p2 = ((2.0 * j + 1.0) * u * p1 - j * p0) / (j + 1.0);
        S[j + 1] += p2;
        p0 = p1;
        p1 = p2;
      }
    }
    Polynomial q;
    for (int j = 0; j <= m_; ++j) q += L_[j] * ((2.0 * j + 1.0) / (n * I.width()) * S[j]);
    // blend toward the piece mean until nonnegative; keeps the mass
    const double mean = S[0] / (n * I.width());
    double lo = min_on_unit(q);
    if (lo < 0.0) {
      double lam = mean > lo ? -lo / (mean - lo) : 1.0;
      q = q * (1.0 - lam) + Polynomial::constant(lam * mean);
    }
    Piece p{i0, i1, I, q, 0.0};
    p.cost = empirical_ak_error(q, I, x_.subspan(i0, i1 - i0), x_.size(), K_);
    return p;
  }

 private:
  std::span<const double> x_;
  int m_;
  int K_;
  std::vector<Polynomial> L_;
};

double iqr(std::span<const double> sorted) {
  auto q = [&](double p) {
    double pos = p * (sorted.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double f = pos - i;
    return i + 1 < sorted.size() ? sorted[i] * (1 - f) + sorted[i + 1] * f : sorted[i];
  };
  return q(0.75) - q(0.25);
}

}  // namespace

std::size_t minimum_sample_count(int k, double eps) {
  return std::max<std::size_t>(100, static_cast<std::size_t>(std::ceil(k / (eps * eps))));
}

double empirical_ak_error(const Polynomial& local, Interval I, std::span<const double> xs,
                          std::size_t n, int K) {
  const Polynomial Q = local.antiderivative();
  const double half = 0.5 * I.width();
  const double q0 = Q(-1.0);
  auto F = [&](double x) { return half * (Q((2.0 * x - I.lo - I.hi) / I.width()) - q0); };
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> inc;
  inc.reserve(2 * xs.size() + 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = F(xs[i]);
    double dm = f - i * inv_n;
    double dp = f - (i + 1) * inv_n;
    inc.push_back(dm - prev);
    inc.push_back(dp - dm);
    prev = dp;
  }
  inc.push_back(half * (Q(1.0) - q0) - xs.size() * inv_n - prev);
  return ak_from_integrals(inc, K);
}

DensityEstimate estimate_density(std::span<const double> samples, int k, double eps,
                                 const EstimatorConfig& cfg) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (cfg.piece_constant < 1) throw std::invalid_argument("piece constant must be positive");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("samples must be finite");
  const std::size_t need = minimum_sample_count(k, eps);
  if (samples.size() < need)
    throw std::invalid_argument("too few samples: need at least " + std::to_string(need) + ", got " +
                                std::to_string(samples.size()));
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  if (!(x.back() > x.front())) throw std::invalid_argument("samples have zero-width support");

  double spread = iqr(x);
  if (!(spread > 0.0)) spread = x.back() - x.front();
  const double margin = spread / static_cast<double>(n);
  const double lo = x.front() - margin, hi = x.back() + margin;

  const int logc = std::max(1, static_cast<int>(std::ceil(std::log(1.0 / eps))));
  const int m = std::max(1, static_cast<int>(std::ceil(2.0 * std::log(1.0 / eps))));
  const int K = 4 * k;
  const std::size_t target = static_cast<std::size_t>(std::max(1, cfg.piece_constant * k - 2));
  const std::size_t bins = static_cast<std::size_t>(cfg.piece_constant * k * logc);

  std::vector<double> cuts{lo};
  for (std::size_t j = 1; j < bins; ++j) {
    std::size_t c = (j * n + bins / 2) / bins;
    if (c == 0 || c >= n) continue;
    double b = 0.5 * (x[c - 1] + x[c]);
    if (b > cuts.back() && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);

  Fitter fitter(x, m, K);
  const std::size_t nb = cuts.size() - 1;
  std::vector<std::size_t> idx(nb + 1, 0);
  for (std::size_t i = 1; i < nb; ++i)
    idx[i] = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), cuts[i]) - x.begin());
  idx[nb] = n;

  // optimal segmentation of the initial bins into at most `target` pieces,
  // minimising the summed per-piece empirical A_K error
  const std::size_t parts = std::min(target, nb);
  std::vector<std::vector<double>> cost(nb + 1, std::vector<double>(nb + 1, INFINITY));
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j <= nb; ++j)
      cost[i][j] = fitter.fit(idx[i], idx[j], {cuts[i], cuts[j]}).cost;
  std::vector<std::vector<double>> best(parts + 1, std::vector<double>(nb + 1, INFINITY));
  std::vector<std::vector<std::size_t>> from(parts + 1, std::vector<std::size_t>(nb + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t p = 1; p <= parts; ++p)
    for (std::size_t j = p; j <= nb; ++j)
      for (std::size_t i = p - 1; i < j; ++i) {
        double v = best[p - 1][i] + cost[i][j];
        if (v < best[p][j]) {
          best[p][j] = v;
          from[p][j] = i;
        }
      }
  std::vector<std::size_t> ends{nb};
  for (std::size_t p = parts, j = nb; p > 0; --p) {
    j = from[p][j];
    ends.push_back(j);
  }
  std::reverse(ends.begin(), ends.end());
  std::vector<Piece> pieces;
  for (std::size_t t = 0; t + 1 < ends.size(); ++t)
    pieces.push_back(fitter.fit(idx[ends[t]], idx[ends[t + 1]], {cuts[ends[t]], cuts[ends[t + 1]]}));

  std::vector<double> bp{lo};
  std::vector<Polynomial> polys;
  DensityEstimate est;
  for (const auto& p : pieces) {
    bp.push_back(p.I.hi);
    double local_mass = p.q.integrate(-1.0, 1.0);
    double bound = coefficient_bound(local_mass, m);
    for (double c : p.q.coeffs())
      if (std::abs(c) > bound * (1.0 + 1e-9) + 1e-300)
        throw std::logic_error("density piece violates the coefficient bound");
    polys.push_back(p.q);
    est.intervals.push_back(p.I);
  }
  est.pp = PiecewisePolynomial(std::move(bp), std::move(polys));
  est.rescale_map = {lo, hi, {lo, hi}};
  est.piece_count = pieces.size() + 2;
  est.degree = m;
  return est;
}

DensityEstimate rescale_to_unit(const DensityEstimate& est) {
  if (est.pp.empty()) throw std::invalid_argument("estimate has no support");
  const Interval S = est.pp.support();
  auto r = rescale_domain(est.pp, {-1.0, 1.0});
  DensityEstimate out;
  out.pp = scale(r.pp, S.width() / 2.0);
  out.rescale_map = r.map;
  for (std::size_t i = 0; i < out.pp.piece_count(); ++i) out.intervals.push_back(out.pp.piece_interval(i));
  out.piece_count = est.piece_count;
  out.degree = est.degree;
  return out;
}

DensityEstimate restore_from_unit(const DensityEstimate& unit) {
  const AffineMap& map = unit.rescale_map;
  DensityEstimate out;
  out.pp = scale(unscale_domain(unit.pp, map), 2.0 / (map.beta - map.alpha));
  out.rescale_map = {map.alpha, map.beta, {map.alpha, map.beta}};
  for (std::size_t i = 0; i < out.pp.piece_count(); ++i) out.intervals.push_back(out.pp.piece_interval(i));
  out.piece_count = unit.piece_count;
  out.degree = unit.degree;
  return out;
}

std::string to_json(const DensityEstimate& est) {
  DensityEstimate orig = est.rescale_map.target == Interval{est.rescale_map.alpha, est.rescale_map.beta}
                             ? est
                             : restore_from_unit(est);
  auto j = detail::pp_to_json(orig.pp);
  j["alpha"] = orig.rescale_map.alpha;
  j["beta"] = orig.rescale_map.beta;
  return j.dump(2);
}

DensityEstimate density_from_json(const std::string& text) {
  auto j = detail::parse_json(text);
  DensityEstimate est;
  est.pp = detail::pp_from_json(j);
  if (est.pp.empty()) throw std::invalid_argument("density estimate has no support");
  double a = j.contains("alpha") ? j.at("alpha").get<double>() : est.pp.support().lo;
  double b = j.contains("beta") ? j.at("beta").get<double>() : est.pp.support().hi;
  if (!(b > a)) throw std::invalid_argument("density estimate needs alpha < beta");
  est.rescale_map = {a, b, {a, b}};
  for (std::size_t i = 0; i < est.pp.piece_count(); ++i) est.intervals.push_back(est.pp.piece_interval(i));
  est.piece_count = est.pp.piece_count() + 2;
  est.degree = est.pp.max_degree();
  return est;
}

}  // namespace gmmfit
