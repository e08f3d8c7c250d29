#include "gmmfit/piecewise_poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json_util.hpp"

namespace gmmfit {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breakpoints,
                                         std::vector<Polynomial> pieces)
    : bp_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (bp_.size() == 1) throw std::invalid_argument("a single breakpoint bounds no piece");
  if (!bp_.empty() && pieces_.size() != bp_.size() - 1)
    throw std::invalid_argument("need exactly one polynomial per bounded piece");
  if (bp_.empty() && !pieces_.empty()) throw std::invalid_argument("pieces without breakpoints");
  for (std::size_t i = 0; i < bp_.size(); ++i) {
    if (!std::isfinite(bp_[i])) throw std::invalid_argument("non-finite breakpoint");
    if (i > 0 && !(bp_[i] > bp_[i - 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing");
  }
}

PiecewisePolynomial PiecewisePolynomial::from_global(const Polynomial& global, double lo,
                                                     double hi) {
  if (!(hi > lo)) throw std::invalid_argument("empty interval");
  // x = mid + half * u
  return PiecewisePolynomial({lo, hi}, {global.compose_affine(0.5 * (lo + hi), 0.5 * (hi - lo))});
}

Interval PiecewisePolynomial::support() const {
  if (bp_.empty()) return {0.0, 0.0};
  return {bp_.front(), bp_.back()};
}

int PiecewisePolynomial::max_degree() const {
  int d = 0;
  for (const auto& q : pieces_) d = std::max(d, q.degree());
  return d;
}

long PiecewisePolynomial::locate(double x) const {
  if (bp_.empty() || x < bp_.front() || x >= bp_.back()) return -1;
  auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
  return static_cast<long>(it - bp_.begin()) - 1;
}

double PiecewisePolynomial::operator()(double x) const {
  long i = locate(x);
  if (i < 0) return 0.0;
  double l = bp_[i], r = bp_[i + 1];
  double u = (2.0 * x - l - r) / (r - l);
  return pieces_[i](u);
}

double PiecewisePolynomial::piece_integral(std::size_t i, double ua, double ub) const {
  return pieces_[i].integrate(ua, ub) * 0.5 * (bp_[i + 1] - bp_[i]);
}

double evaluate(const PiecewisePolynomial& p, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("evaluate at non-finite x");
  return p(x);
}

double integrate(const PiecewisePolynomial& p, double a, double b) {
  if (a > b) throw std::invalid_argument("integrate requires a <= b");
  double total = 0.0;
  auto bp = p.breakpoints();
  for (std::size_t i = 0; i < p.piece_count(); ++i) {
    double l = bp[i], r = bp[i + 1];
    double lo = std::max(a, l), hi = std::min(b, r);
    if (!(hi > lo)) continue;
    double ua = lo == l ? -1.0 : (2.0 * lo - l - r) / (r - l);
    double ub = hi == r ? 1.0 : (2.0 * hi - l - r) / (r - l);
    total += p.piece_integral(i, ua, ub);
  }
  return total;
}

double integrate(const PiecewisePolynomial& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.piece_count(); ++i) total += p.piece_integral(i, -1.0, 1.0);
  return total;
}

PiecewisePolynomial linear_combination(std::span<const PiecewisePolynomial* const> terms,
                                       std::span<const double> weights) {
  if (terms.size() != weights.size()) throw std::invalid_argument("terms/weights size mismatch");
  std::vector<double> bp;
  for (const auto* t : terms) bp.insert(bp.end(), t->breakpoints().begin(), t->breakpoints().end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  if (bp.size() < 2) return {};

  std::vector<Polynomial> pieces(bp.size() - 1);
  std::vector<std::size_t> cursor(terms.size(), 0);
  for (std::size_t m = 0; m + 1 < bp.size(); ++m) {
    const double a = bp[m], b = bp[m + 1];
    Polynomial acc;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto& term = *terms[t];
      if (term.empty() || weights[t] == 0.0) continue;
      auto tb = term.breakpoints();
      if (a < tb.front() || b > tb.back()) continue;
      std::size_t& j = cursor[t];
      while (j + 1 < term.piece_count() && tb[j + 1] <= a) ++j;
      const double l = tb[j], r = tb[j + 1];
      const Polynomial& q = term.piece(j);
      if (a == l && b == r) {
        acc += weights[t] * q;
      } else {
        double shift = (a + b - l - r) / (r - l);
        double sc = (b - a) / (r - l);
        acc += weights[t] * q.compose_affine(shift, sc);
      }
    }
    pieces[m] = std::move(acc);
  }
  return PiecewisePolynomial(std::move(bp), std::move(pieces));
}

PiecewisePolynomial subtract(const PiecewisePolynomial& p, const PiecewisePolynomial& q) {
  const PiecewisePolynomial* t[2] = {&p, &q};
  const double w[2] = {1.0, -1.0};
  return linear_combination(t, w);
}

PiecewisePolynomial add(const PiecewisePolynomial& p, const PiecewisePolynomial& q) {
  const PiecewisePolynomial* t[2] = {&p, &q};
  const double w[2] = {1.0, 1.0};
  return linear_combination(t, w);
}

PiecewisePolynomial scale(const PiecewisePolynomial& p, double s) {
  std::vector<Polynomial> pieces(p.pieces().begin(), p.pieces().end());
  for (auto& q : pieces) q *= s;
  return PiecewisePolynomial(std::vector<double>(p.breakpoints().begin(), p.breakpoints().end()),
                             std::move(pieces));
}

PiecewisePolynomial pullback(const PiecewisePolynomial& p, double shift, double scale_factor,
                             double value_factor) {
  if (!(scale_factor > 0.0)) throw std::invalid_argument("pullback needs a positive scale");
  std::vector<double> bp(p.breakpoints().begin(), p.breakpoints().end());
  for (double& b : bp) b = (b - shift) / scale_factor;
  for (std::size_t i = 1; i < bp.size(); ++i)
    if (!(bp[i] > bp[i - 1])) throw std::invalid_argument("pullback collapses breakpoints");
  std::vector<Polynomial> pieces(p.pieces().begin(), p.pieces().end());
  if (value_factor != 1.0)
    for (auto& q : pieces) q *= value_factor;
  return PiecewisePolynomial(std::move(bp), std::move(pieces));
}

double default_root_tol(const PiecewisePolynomial& p) { return 1e-12 * p.support().width(); }

std::vector<SignSegment> sign_segments(const PiecewisePolynomial& p, double root_tol) {
  std::vector<SignSegment> out;
  auto bp = p.breakpoints();
  std::vector<double> cuts;
  for (std::size_t i = 0; i < p.piece_count(); ++i) {
    const Polynomial& q = p.piece(i);
    const double l = bp[i], r = bp[i + 1], half = 0.5 * (r - l);
    if (q.is_zero()) {
      out.push_back({{l, r}, 0, 0.0});
      continue;
    }
    double tol_u = std::max(root_tol / half, 1e-15);
    cuts.clear();
    cuts.push_back(-1.0);
    for (double u : sign_change_roots(q, -1.0, 1.0, tol_u)) cuts.push_back(u);
    cuts.push_back(1.0);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      double u0 = cuts[c], u1 = cuts[c + 1];
      if (!(u1 > u0)) continue;
      double integral = q.integrate(u0, u1) * half;
      double mid = q(0.5 * (u0 + u1));
      int s = (mid > 0.0) - (mid < 0.0);
      if (s == 0) s = (integral > 0.0) - (integral < 0.0);
      double x0 = c == 0 ? l : l + (u0 + 1.0) * half;
      double x1 = c + 2 == cuts.size() ? r : l + (u1 + 1.0) * half;
      out.push_back({{x0, x1}, s, integral});
    }
  }
  return out;
}

std::vector<SignSegment> sign_segments(const PiecewisePolynomial& p) {
  return sign_segments(p, default_root_tol(p));
}

std::vector<double> real_roots(const PiecewisePolynomial& p) {
  std::vector<double> roots;
  int prev = 0;
  for (const auto& seg : sign_segments(p)) {
    if (seg.sign == 0) continue;
    if (prev != 0 && seg.sign != prev) roots.push_back(seg.x.lo);
    prev = seg.sign;
  }
  return roots;
}

double l1_norm(const PiecewisePolynomial& p) {
  double total = 0.0;
  for (const auto& seg : sign_segments(p)) total += std::abs(seg.integral);
  return total;
}

Rescaled rescale_domain(const PiecewisePolynomial& p, Interval target) {
  if (p.empty() || !(p.support().width() > 0.0))
    throw std::invalid_argument("rescale_domain needs a nonempty bounded support");
  if (!(target.width() > 0.0)) throw std::invalid_argument("empty target interval");
  AffineMap map{p.support().lo, p.support().hi, target};
  std::vector<double> bp(p.breakpoints().begin(), p.breakpoints().end());
  if (!map.is_identity()) {
    for (double& b : bp) b = map.forward(b);
    bp.front() = target.lo;
    bp.back() = target.hi;
  }
  std::vector<Polynomial> pieces(p.pieces().begin(), p.pieces().end());
  return {PiecewisePolynomial(std::move(bp), std::move(pieces)), map};
}

PiecewisePolynomial unscale_domain(const PiecewisePolynomial& rescaled, const AffineMap& map) {
  std::vector<double> bp(rescaled.breakpoints().begin(), rescaled.breakpoints().end());
  if (!map.is_identity()) {
    for (double& b : bp) b = map.inverse(b);
    if (!bp.empty()) {
      bp.front() = map.alpha;
      bp.back() = map.beta;
    }
  }
  std::vector<Polynomial> pieces(rescaled.pieces().begin(), rescaled.pieces().end());
  return PiecewisePolynomial(std::move(bp), std::move(pieces));
}

double coefficient_bound(double beta, int m) {
  return beta * (m + 1.0) * (m + 1.0) * std::pow(std::sqrt(2.0) + 1.0, m);
}

std::string to_json(const PiecewisePolynomial& p) { return detail::pp_to_json(p).dump(2); }

PiecewisePolynomial pp_from_json(const std::string& text) {
  return detail::pp_from_json(detail::parse_json(text));
}

namespace detail {

nlohmann::ordered_json pp_to_json(const PiecewisePolynomial& p) {
  nlohmann::ordered_json j;
  j["breakpoints"] = std::vector<double>(p.breakpoints().begin(), p.breakpoints().end());
  auto pieces = nlohmann::ordered_json::array();
  auto zero = nlohmann::ordered_json{{"coeffs", std::vector<double>{0.0}}};
  pieces.push_back(zero);
  for (const auto& q : p.pieces())
    pieces.push_back({{"coeffs", std::vector<double>(q.coeffs().begin(), q.coeffs().end())}});
  if (!p.empty()) pieces.push_back(zero);
  j["pieces"] = std::move(pieces);
  return j;
}

PiecewisePolynomial pp_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("pieces"))
    throw std::invalid_argument("piecewise polynomial JSON needs breakpoints and pieces");
  auto bp = j.at("breakpoints").get<std::vector<double>>();
  const auto& pj = j.at("pieces");
  if (!pj.is_array() || pj.size() != bp.size() + 1 || (bp.size() == 1))
    throw std::invalid_argument("piecewise polynomial JSON needs breakpoints+1 pieces");
  std::vector<Polynomial> pieces;
  for (std::size_t i = 0; i < pj.size(); ++i) {
    Polynomial q(pj[i].at("coeffs").get<std::vector<double>>());
    bool tail = i == 0 || i + 1 == pj.size();
    if (tail) {
      if (!q.is_zero()) throw std::invalid_argument("unbounded tail pieces must be zero");
      continue;
    }
    pieces.push_back(std::move(q));
  }
  return PiecewisePolynomial(std::move(bp), std::move(pieces));
}

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail
}  // namespace gmmfit
