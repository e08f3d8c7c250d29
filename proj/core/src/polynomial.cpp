#include "gmmfit/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gmmfit {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(0.0);
  for (double v : c_)
    if (!std::isfinite(v)) throw std::invalid_argument("polynomial coefficient is not finite");
  trim();
  if (degree() > kMaxDegree)
    throw std::invalid_argument("polynomial degree " + std::to_string(degree()) + " exceeds cap " +
                                std::to_string(kMaxDegree));
}

void Polynomial::trim() {
  while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::derivative() const {
  if (c_.size() == 1) return Polynomial();
  std::vector<double> d(c_.size() - 1);
  for (std::size_t j = 1; j < c_.size(); ++j) d[j - 1] = c_[j] * static_cast<double>(j);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> a(c_.size() + 1, 0.0);
  for (std::size_t j = 0; j < c_.size(); ++j) a[j + 1] = c_[j] / static_cast<double>(j + 1);
  return Polynomial(std::move(a));
}

double Polynomial::integrate(double a, double b) const {
  // Horner on the antiderivative without materialising it
  double fa = 0.0, fb = 0.0;
  for (std::size_t j = c_.size(); j-- > 0;) {
    double cj = c_[j] / static_cast<double>(j + 1);
    fa = fa * a + cj;
    fb = fb * b + cj;
  }
  return fb * b - fa * a;
}

Polynomial Polynomial::compose_affine(double shift, double scale) const {
  const std::size_t n = c_.size();
  std::vector<double> q(n, 0.0);
  q[0] = c_[n - 1];
  std::size_t len = 1;
  for (std::size_t j = n - 1; j-- > 0;) {
    // q <- q * (shift + scale u) + c_j
    for (std::size_t i = len; i-- > 0;) {
      double v = q[i];
      q[i + 1] += v * scale;
      q[i] = v * shift;
    }
    ++len;
    q[0] += c_[j];
  }
  return Polynomial(std::move(q));
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] += o.c_[j];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
  for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] -= o.c_[j];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("non-finite scale");
  for (double& v : c_) v *= s;
  trim();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(r));
}

namespace {

using Coeffs = std::vector<double>;

double horner(const Coeffs& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double max_abs(const Coeffs& c) {
  double m = 0.0;
  for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

void normalise(Coeffs& c) {
  double m = max_abs(c);
  if (m > 0.0)
    for (double& v : c) v /= m;
}

// Drop leading coefficients that are negligible relative to the rest.
void trim_rel(Coeffs& c, double rel) {
  double m = max_abs(c);
  while (c.size() > 1 && std::abs(c.back()) <= rel * m) c.pop_back();
}

Coeffs remainder(Coeffs num, const Coeffs& den) {
  const std::size_t dn = den.size() - 1;
  const double lead = den.back();
  while (num.size() > dn && num.size() > 0) {
    double q = num.back() / lead;
    std::size_t off = num.size() - 1 - dn;
    for (std::size_t i = 0; i <= dn; ++i) num[off + i] -= q * den[i];
    num.pop_back();
    if (num.empty()) break;
  }
  if (num.empty()) num.push_back(0.0);
  return num;
}

std::vector<Coeffs> sturm_chain(const Polynomial& p) {
  std::vector<Coeffs> chain;
  Coeffs p0(p.coeffs().begin(), p.coeffs().end());
  trim_rel(p0, 1e-14);
  normalise(p0);
  Coeffs p1(p0.size() > 1 ? p0.size() - 1 : 1, 0.0);
  for (std::size_t j = 1; j < p0.size(); ++j) p1[j - 1] = p0[j] * static_cast<double>(j);
  normalise(p1);
  chain.push_back(std::move(p0));
  if (max_abs(p1) == 0.0) return chain;
  chain.push_back(std::move(p1));
  while (chain.back().size() > 1) {
    const Coeffs& a = chain[chain.size() - 2];
    const Coeffs& b = chain.back();
    Coeffs r = remainder(a, b);
    for (double& v : r) v = -v;
    double scale = std::max(max_abs(a), 1.0);
    if (max_abs(r) <= 1e-11 * scale) break;
    trim_rel(r, 1e-11);
    normalise(r);
    chain.push_back(std::move(r));
  }
  return chain;
}

int variations(const std::vector<Coeffs>& chain, double x) {
  int v = 0;
  int prev = 0;
  for (const auto& c : chain) {
    double y = horner(c, x);
    int s = (y > 0.0) - (y < 0.0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++v;
    prev = s;
  }
  return v;
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

double bisect(const Polynomial& p, double lo, double hi, int slo, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    int sm = sgn(p(mid));
    if (sm == 0) return mid;
    if (sm == slo) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Isolator {
  const Polynomial& p;
  const std::vector<Coeffs>& chain;
  double tol;
  std::vector<double>& out;

  void run(double lo, double hi, int vlo, int vhi, int depth) {
    int n = vlo - vhi;
    int slo = sgn(p(lo)), shi = sgn(p(hi));
    bool change = slo != 0 && shi != 0 && slo != shi;
    if (n <= 1 || depth > 60) {
      if (change) out.push_back(bisect(p, lo, hi, slo, tol));
      return;
    }
    if (hi - lo <= tol) {
      if (change) out.push_back(0.5 * (lo + hi));
      return;
    }
    double mid = 0.5 * (lo + hi);
    if (p(mid) == 0.0) mid = lo + 0.5000001 * (hi - lo);
    int vmid = variations(chain, mid);
    run(lo, mid, vlo, vmid, depth + 1);
    run(mid, hi, vmid, vhi, depth + 1);
  }
};

}  // namespace

int sturm_root_count(const Polynomial& p, double lo, double hi) {
  if (p.degree() == 0) return 0;
  auto chain = sturm_chain(p);
  return variations(chain, lo) - variations(chain, hi);
}

std::vector<double> sign_change_roots(const Polynomial& p, double lo, double hi, double tol) {
  std::vector<double> out;
  const int d = p.degree();
  if (d == 0 || !(hi > lo)) return out;
  auto keep = [&](double r) {
    if (r > lo && r < hi) out.push_back(r);
  };
  if (d == 1) {
    keep(-p.coeff(0) / p.coeff(1));
    return out;
  }
  if (d == 2) {
    double a = p.coeff(2), b = p.coeff(1), c = p.coeff(0);
    double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) return out;
    double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = q / a, r2 = c / q;
    if (r1 > r2) std::swap(r1, r2);
    if (r1 != r2) {
      keep(r1);
      keep(r2);
    }
    return out;
  }
  auto chain = sturm_chain(p);
  if (chain.size() < 2) return out;
  Isolator iso{p, chain, tol, out};
  iso.run(lo, hi, variations(chain, lo), variations(chain, hi), 0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gmmfit
