#include "gmmfit/poly_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gmmfit {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSat / b) return kSat;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSat - b ? kSat : a + b; }

std::uint64_t binom(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= r; ++i) {
    acc = acc * static_cast<unsigned>(n - r + i) / static_cast<unsigned>(i);
    if (acc > kSat) return kSat;
  }
  return static_cast<std::uint64_t>(acc);
}

double mono_eval(const Monomial& m, const std::vector<double>& x) {
  double v = 1.0;
  for (auto [var, e] : m)
    for (int i = 0; i < e; ++i) v *= x[var];
  return v;
}

int mono_degree(const Monomial& m) {
  int d = 0;
  for (auto [var, e] : m) d += e;
  return d;
}

Monomial mono_mul(Monomial a, const Monomial& b) {
  for (auto [v, e] : b) {
    auto it = std::find_if(a.begin(), a.end(), [&](const auto& p) { return p.first == v; });
    if (it != a.end())
      it->second += e;
    else
      a.emplace_back(v, e);
  }
  std::sort(a.begin(), a.end());
  return a;
}

Monomial var1(int v) { return {{v, 1}}; }

ExprTerm plain(double coef, Monomial mono) { return ExprTerm{coef, std::move(mono), -1, {}}; }

Expr linear(std::initializer_list<std::pair<double, int>> parts, double constant = 0.0) {
  Expr e;
  for (auto [c, v] : parts) e.terms.push_back(plain(c, var1(v)));
  if (constant != 0.0) e.terms.push_back(plain(constant, {}));
  return e;
}

Predicate pred(Expr e, Rel r) { return Predicate{std::move(e), r}; }

bool rel_holds(double v, Rel r, double tol) {
  switch (r) {
    case Rel::lt: return v < tol;
    case Rel::le: return v <= tol;
    case Rel::eq: return std::abs(v) <= tol;
    case Rel::ne: return std::abs(v) > tol;
    case Rel::ge: return v >= -tol;
    case Rel::gt: return v > -tol;
  }
  return false;
}

const char* rel_name(Rel r) {
  switch (r) {
    case Rel::lt: return "<";
    case Rel::le: return "<=";
    case Rel::eq: return "=";
    case Rel::ne: return "!=";
    case Rel::ge: return ">=";
    case Rel::gt: return ">";
  }
  return "?";
}

Rel rel_from(const std::string& s) {
  if (s == "<") return Rel::lt;
  if (s == "<=") return Rel::le;
  if (s == "=") return Rel::eq;
  if (s == "!=") return Rel::ne;
  if (s == ">=") return Rel::ge;
  if (s == ">") return Rel::gt;
  throw std::invalid_argument("unknown relation '" + s + "'");
}

const char* kind_name(VarKind k) {
  switch (k) {
    case VarKind::free: return "free";
    case VarKind::forall: return "forall";
    case VarKind::exists: return "exists";
    case VarKind::gap_bound: return "gap";
  }
  return "?";
}

VarKind kind_from(const std::string& s) {
  if (s == "free") return VarKind::free;
  if (s == "forall") return VarKind::forall;
  if (s == "exists") return VarKind::exists;
  if (s == "gap") return VarKind::gap_bound;
  throw std::invalid_argument("unknown variable kind '" + s + "'");
}

// Index layout of the variables.
struct Layout {
  int k, K, s;
  int free(int i, int slot) const { return 3 * i + slot; }
  int a(int j) const { return 3 * k + j; }
  int b(int j) const { return 3 * k + K + j; }
  int d(int e) const { return 3 * k + 2 * K + e; }
  int xi(int j) const { return 3 * k + 2 * K + s + j; }
  int lo() const { return 3 * k + 3 * K + s; }
  int hi() const { return lo() + 1; }
  int count() const { return hi() + 1; }
};

Layout layout_of(const PolySystem& sys) { return Layout{sys.k, sys.K, sys.s()}; }

int shape_breakpoint_count(const PolySystem& sys) { return sys.k > 0 ? sys.s() / sys.k : 0; }

// z_i(X) = tau_i (X - mu_i) as a polynomial in the variables.
MPoly component_argument(const PolySystem& sys, const ThetaBox* box, int i, int X) {
  Layout L = layout_of(sys);
  MPoly z;
  if (!sys.rescaled) {
    z.terms.push_back({1.0, mono_mul(var1(L.free(i, 2)), var1(X))});
    z.terms.push_back({-1.0, mono_mul(var1(L.free(i, 2)), var1(L.free(i, 1)))});
  } else {
    const Interval J = box->slots[static_cast<std::size_t>(i)];
    z.terms.push_back({2.0 / J.width(), mono_mul(var1(L.free(i, 2)), var1(X))});
    z.terms.push_back({-2.0 * J.mid() / J.width(), var1(L.free(i, 2))});
    z.terms.push_back({-1.0, var1(L.free(i, 1))});
  }
  return z;
}

MPoly affine_of(const MPoly& z, double shift, double scale) {
  MPoly out;
  for (const auto& t : z.terms) out.terms.push_back({t.coef * scale, t.mono});
  if (shift != 0.0) out.terms.push_back({shift * scale, {}});
  return out;
}

// Number of items of each type placed so far determines the integrand
// between consecutive items.
struct GapKey {
  int density_piece = -1;
  std::vector<int> component_pieces;
  bool zero() const {
    if (density_piece >= 0) return false;
    for (int c : component_pieces)
      if (c >= 0) return false;
    return true;
  }
  std::vector<int> flat() const {
    std::vector<int> f{density_piece};
    f.insert(f.end(), component_pieces.begin(), component_pieces.end());
    return f;
  }
};

template <class Fn>
void walk_gaps(int r, int k, int nbp, const std::vector<Item>& perm, Fn&& fn) {
  int nc = 0;
  std::vector<int> nd(static_cast<std::size_t>(k), 0);
  for (std::size_t g = 0; g + 1 < perm.size(); ++g) {
    const Item& it = perm[g];
    if (it.type == 'c') ++nc;
    if (it.type == 'd') ++nd[static_cast<std::size_t>((it.index - 1) / nbp)];
    GapKey key;
    key.density_piece = (nc >= 1 && nc <= r - 1) ? nc - 1 : -1;
    key.component_pieces.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      int c = nd[static_cast<std::size_t>(i)];
      key.component_pieces[static_cast<std::size_t>(i)] = (c >= 1 && c <= nbp - 1) ? c - 1 : -1;
    }
    fn(g, key);
  }
}

std::vector<int> interval_of_gaps(int K, const std::vector<Item>& perm) {
  std::vector<int> pa(static_cast<std::size_t>(K)), pb(static_cast<std::size_t>(K));
  for (std::size_t p = 0; p < perm.size(); ++p) {
    if (perm[p].type == 'a') pa[static_cast<std::size_t>(perm[p].index - 1)] = static_cast<int>(p);
    if (perm[p].type == 'b') pb[static_cast<std::size_t>(perm[p].index - 1)] = static_cast<int>(p);
  }
  std::vector<int> out(perm.size() - 1, -1);
  for (std::size_t g = 0; g + 1 < perm.size(); ++g)
    for (int j = 0; j < K; ++j)
      if (pa[static_cast<std::size_t>(j)] <= static_cast<int>(g) &&
          pb[static_cast<std::size_t>(j)] >= static_cast<int>(g) + 1) {
        out[g] = j;
        break;
      }
  return out;
}

// Items in lexicographic order of choice a < b < c < d; a_j must precede b_j,
// a and b each appear in index order, c's in order, d's in any order.
template <class Fn>
void enumerate_perms(int K, int r, int s, Fn&& fn) {
  const int t = 2 * K + r + s;
  std::vector<Item> cur;
  cur.reserve(static_cast<std::size_t>(t));
  std::vector<char> used(static_cast<std::size_t>(s), 0);
  int na = 0, nb = 0, nc = 0;
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == t) {
      fn(cur);
      return;
    }
    if (na < K) {
      cur.push_back({'a', static_cast<std::int8_t>(++na)});
      self(self);
      cur.pop_back();
      --na;
    }
    if (nb < na) {
      cur.push_back({'b', static_cast<std::int8_t>(++nb)});
      self(self);
      cur.pop_back();
      --nb;
    }
    if (nc < r) {
      cur.push_back({'c', static_cast<std::int8_t>(++nc)});
      self(self);
      cur.pop_back();
      --nc;
    }
    for (int e = 0; e < s; ++e) {
      if (used[static_cast<std::size_t>(e)]) continue;
      used[static_cast<std::size_t>(e)] = 1;
      cur.push_back({'d', static_cast<std::int8_t>(e + 1)});
      self(self);
      cur.pop_back();
      used[static_cast<std::size_t>(e)] = 0;
    }
  };
  rec(rec);
}

Expr gap_integral(const PolySystem& sys, const ThetaBox* box, const GapKey& key,
                  const std::vector<int>& dens_uni, const std::vector<Interval>& dens_iv,
                  const std::vector<int>& shape_uni, const std::vector<Interval>& shape_iv) {
  Layout L = layout_of(sys);
  Expr e;
  if (key.density_piece >= 0) {
    const auto j = static_cast<std::size_t>(key.density_piece);
    const double half = 0.5 * dens_iv[j].width(), mid = dens_iv[j].mid();
    for (int end = 0; end < 2; ++end) {
      int X = end ? L.hi() : L.lo();
      MPoly inner{{{1.0 / half, var1(X)}, {-mid / half, {}}}};
      e.terms.push_back(ExprTerm{end ? half : -half, {}, dens_uni[j], inner});
    }
  }
  for (int i = 0; i < sys.k; ++i) {
    int q = key.component_pieces[static_cast<std::size_t>(i)];
    if (q < 0) continue;
    const auto qq = static_cast<std::size_t>(q);
    const double h = 0.5 * shape_iv[qq].width(), m = shape_iv[qq].mid();
    for (int end = 0; end < 2; ++end) {
      int X = end ? L.hi() : L.lo();
      MPoly inner = affine_of(component_argument(sys, box, i, X), -m, 1.0 / h);
      e.terms.push_back(ExprTerm{end ? -h : h, var1(L.free(i, 0)), shape_uni[qq], inner});
    }
  }
  return e;
}

int predicate_degree(const Predicate& p, const std::vector<Polynomial>& uni) {
  return expr_degree(p.lhs, uni);
}

}  // namespace

int MPoly::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, mono_degree(t.mono));
  return d;
}

double MPoly::eval(const std::vector<double>& x) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.coef * mono_eval(t.mono, x);
  return v;
}

int expr_degree(const Expr& e, const std::vector<Polynomial>& uni) {
  int d = 0;
  for (const auto& t : e.terms) {
    int td = mono_degree(t.mono);
    if (t.uni >= 0) td += uni[static_cast<std::size_t>(t.uni)].degree() * t.inner.degree();
    d = std::max(d, td);
  }
  return d;
}

double expr_eval(const Expr& e, const std::vector<Polynomial>& uni, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : e.terms) {
    double term = t.coef * mono_eval(t.mono, x);
    if (t.uni >= 0) term *= uni[static_cast<std::size_t>(t.uni)](t.inner.eval(x));
    v += term;
  }
  return v;
}

std::uint64_t permutation_count(int K, int r, int s) {
  if (K < 0 || r < 0 || s < 0) throw std::invalid_argument("negative item count");
  const int t = 2 * K + r + s;
  std::uint64_t n = sat_mul(binom(t, 2 * K), binom(t - 2 * K, r));
  n = sat_mul(n, binom(2 * K, K) / static_cast<std::uint64_t>(K + 1));
  for (int i = 2; i <= s; ++i) n = sat_mul(n, static_cast<std::uint64_t>(i));
  return n;
}

int PolySystem::t() const { return 2 * K + r() + s(); }

int PolySystem::s() const { return static_cast<int>(breakpoints.size()); }

int PolySystem::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return static_cast<int>(i);
  return -1;
}

std::uint64_t PolySystem::predicate_count() const {
  std::uint64_t shared = valid.size() + breakpoints.size() + slack.size() + guard.size();
  std::uint64_t per = static_cast<std::uint64_t>(t() - 1 + 2 * K);
  return sat_add(shared, sat_mul(permutation_count, per));
}

std::uint64_t PolySystem::predicate_budget() const {
  std::uint64_t p = 6;
  for (int i = 0; i <= t(); ++i) p = sat_mul(p, static_cast<std::uint64_t>(t()));
  return sat_add(sat_add(valid.size(), static_cast<std::uint64_t>(s())), p);
}

bool PolySystem::operator==(const PolySystem& o) const {
  return family == o.family && rescaled == o.rescaled && k == o.k && K == o.K && nu == o.nu &&
         vars == o.vars && constants == o.constants && univariates == o.univariates &&
         valid == o.valid && breakpoints == o.breakpoints && slack == o.slack && guard == o.guard &&
         gaps == o.gaps && disjuncts == o.disjuncts && materialized == o.materialized &&
         permutation_count == o.permutation_count && max_degree == o.max_degree;
}

PolySystem encode_system(const PiecewisePolynomial& p_dens, const ShapePolyConfig& shape, int K,
                         double nu, const ThetaBox& box, const EncodeOptions& opt) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be finite and >= 0");
  if (box.k < 1) throw std::invalid_argument("box needs k >= 1");
  if (box.rescaled && box.slots.size() != static_cast<std::size_t>(box.k))
    throw std::invalid_argument("rescaled box needs one slot per component");
  if (K > 127 || box.k * static_cast<int>(shape.standard.breakpoints().size()) > 127 ||
      p_dens.breakpoints().size() > 127)
    throw std::invalid_argument("too many items to encode");

  PolySystem sys;
  sys.family = shape.family;
  sys.rescaled = box.rescaled;
  sys.k = box.k;
  sys.K = K;
  sys.nu = nu;
  sys.constants.assign(p_dens.breakpoints().begin(), p_dens.breakpoints().end());
  auto ybp = shape.standard.breakpoints();
  const int nbp = static_cast<int>(ybp.size());
  const int s = sys.k * nbp;
  Layout L{sys.k, K, s};

  const char* names[3] = {"w", box.rescaled ? "mut" : "mu", box.rescaled ? "taut" : "tau"};
  for (int i = 0; i < sys.k; ++i)
    for (int c = 0; c < 3; ++c)
      sys.vars.push_back({names[c] + std::to_string(i + 1), VarKind::free});
  for (int j = 0; j < K; ++j) sys.vars.push_back({"a" + std::to_string(j + 1), VarKind::forall});
  for (int j = 0; j < K; ++j) sys.vars.push_back({"b" + std::to_string(j + 1), VarKind::forall});
  for (int e = 0; e < s; ++e) sys.vars.push_back({"d" + std::to_string(e + 1), VarKind::exists});
  for (int j = 0; j < K; ++j) sys.vars.push_back({"xi" + std::to_string(j + 1), VarKind::exists});
  sys.vars.push_back({"LO", VarKind::gap_bound});
  sys.vars.push_back({"HI", VarKind::gap_bound});

  std::vector<int> dens_uni, shape_uni;
  std::vector<Interval> dens_iv, shape_iv;
  for (std::size_t j = 0; j < p_dens.piece_count(); ++j) {
    dens_uni.push_back(static_cast<int>(sys.univariates.size()));
    dens_iv.push_back(p_dens.piece_interval(j));
    sys.univariates.push_back(p_dens.piece(j).antiderivative());
  }
  for (std::size_t q = 0; q < shape.standard.piece_count(); ++q) {
    shape_uni.push_back(static_cast<int>(sys.univariates.size()));
    shape_iv.push_back(shape.standard.piece_interval(q));
    sys.univariates.push_back(shape.standard.piece(q).antiderivative());
  }

  // validity of the free variables
  Expr wsum;
  for (int i = 0; i < sys.k; ++i) {
    const int w = L.free(i, 0), mu = L.free(i, 1), tau = L.free(i, 2);
    if (!box.rescaled) {
      sys.valid.push_back(pred(linear({{-1.0, w}}), Rel::le));
      sys.valid.push_back(pred(linear({{-1.0, tau}}), Rel::lt));
      sys.valid.push_back(pred(linear({{1.0, tau}}, -box.prec_hi), Rel::le));
      sys.valid.push_back(pred(linear({{-1.0, mu}}, -1.0), Rel::le));
      sys.valid.push_back(pred(linear({{1.0, mu}}, -1.0), Rel::le));
    } else {
      sys.valid.push_back(pred(linear({{-1.0, w}}, box.w_min), Rel::le));
      sys.valid.push_back(pred(linear({{-1.0, mu}}, -box.mu_t_bound), Rel::le));
      sys.valid.push_back(pred(linear({{1.0, mu}}, -box.mu_t_bound), Rel::le));
      sys.valid.push_back(pred(linear({{-1.0, tau}}, box.prec_lo), Rel::le));
      sys.valid.push_back(pred(linear({{1.0, tau}}, -box.prec_hi), Rel::le));
    }
    wsum.terms.push_back(plain(1.0, var1(w)));
  }
  wsum.terms.push_back(plain(-1.0, {}));
  sys.valid.push_back(pred(wsum, Rel::eq));

  // d_{i,e} is the preimage of the e-th standard breakpoint under component i
  for (int i = 0; i < sys.k; ++i)
    for (int e = 0; e < nbp; ++e) {
      MPoly z = component_argument(sys, &box, i, L.d(i * nbp + e));
      Expr ex;
      for (const auto& t : z.terms) ex.terms.push_back(plain(t.coef, t.mono));
      if (ybp[static_cast<std::size_t>(e)] != 0.0)
        ex.terms.push_back(plain(-ybp[static_cast<std::size_t>(e)], {}));
      sys.breakpoints.push_back(pred(ex, Rel::eq));
    }

  Expr xsum;
  for (int j = 0; j < K; ++j) {
    sys.slack.push_back(pred(linear({{-1.0, L.xi(j)}}), Rel::le));
    xsum.terms.push_back(plain(1.0, var1(L.xi(j))));
  }
  xsum.terms.push_back(plain(-nu, {}));
  sys.slack.push_back(pred(xsum, Rel::le));

  for (int j = 0; j < K; ++j) {
    sys.guard.push_back(pred(linear({{1.0, L.a(j)}, {-1.0, L.b(j)}}), Rel::le));
    if (j + 1 < K) sys.guard.push_back(pred(linear({{1.0, L.b(j)}, {-1.0, L.a(j + 1)}}), Rel::le));
  }

  sys.permutation_count = permutation_count(K, sys.r(), s);
  sys.materialized = static_cast<std::size_t>(sys.t()) <= opt.max_items;

  auto add_gap = [&](const GapKey& key) {
    auto flat = key.flat();
    if (sys.gap_index.count(flat)) return;
    sys.gap_index[flat] = static_cast<int>(sys.gaps.size());
    sys.gaps.push_back({key.density_piece, key.component_pieces,
                        gap_integral(sys, &box, key, dens_uni, dens_iv, shape_uni, shape_iv)});
  };

  if (sys.materialized) {
    sys.disjuncts.reserve(static_cast<std::size_t>(sys.permutation_count));
    enumerate_perms(K, sys.r(), s, [&](const std::vector<Item>& perm) {
      sys.disjuncts.push_back({perm});
      walk_gaps(sys.r(), sys.k, nbp, perm, [&](std::size_t, const GapKey& key) {
        if (!key.zero()) add_gap(key);
      });
    });
    if (sys.disjuncts.size() != sys.permutation_count)
      throw std::logic_error("enumerated permutation count disagrees with the closed form");
  } else {
    // every combination of active pieces
    const int nd = static_cast<int>(p_dens.piece_count());
    const int nq = std::max(nbp - 1, 0);
    std::vector<int> idx(static_cast<std::size_t>(sys.k) + 1, -1);
    for (;;) {
      GapKey key{idx[0], std::vector<int>(idx.begin() + 1, idx.end())};
      if (!key.zero()) add_gap(key);
      std::size_t p = 0;
      for (; p < idx.size(); ++p) {
        int lim = p == 0 ? nd : nq;
        if (++idx[p] < lim) break;
        idx[p] = -1;
      }
      if (p == idx.size()) break;
    }
  }

  if (sys.predicate_count() >= sys.predicate_budget())
    throw std::logic_error("predicate count exceeds the budget");

  int D = 1;
  for (const auto* group : {&sys.valid, &sys.breakpoints, &sys.slack, &sys.guard})
    for (const auto& p : *group) D = std::max(D, predicate_degree(p, sys.univariates));
  for (const auto& g : sys.gaps) D = std::max(D, expr_degree(g.integral, sys.univariates));
  sys.max_degree = D;
  return sys;
}

DisjunctLayout disjunct_layout(const PolySystem& sys, const std::vector<Item>& perm) {
  DisjunctLayout out;
  if (perm.size() < 2) return out;
  out.interval = interval_of_gaps(sys.K, perm);
  out.gap_poly.assign(perm.size() - 1, -1);
  walk_gaps(sys.r(), sys.k, shape_breakpoint_count(sys), perm, [&](std::size_t g, const GapKey& key) {
    if (key.zero()) return;
    auto it = sys.gap_index.find(key.flat());
    if (it == sys.gap_index.end()) throw std::logic_error("gap polynomial missing from the system");
    out.gap_poly[g] = it->second;
  });
  return out;
}

// ---- text form ----

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_mono(std::ostringstream& os, const Monomial& m) {
  os << ' ' << m.size();
  for (auto [v, e] : m) os << ' ' << v << ' ' << e;
}

void put_expr(std::ostringstream& os, const Expr& e) {
  os << ' ' << e.terms.size();
  for (const auto& t : e.terms) {
    os << " [ " << num(t.coef);
    put_mono(os, t.mono);
    os << ' ' << t.uni;
    if (t.uni >= 0) {
      os << ' ' << t.inner.terms.size();
      for (const auto& it : t.inner.terms) {
        os << ' ' << num(it.coef);
        put_mono(os, it.mono);
      }
    }
    os << " ]";
  }
}

void put_preds(std::ostringstream& os, const char* name, const std::vector<Predicate>& ps) {
  os << name << ' ' << ps.size() << '\n';
  for (const auto& p : ps) {
    os << "pred " << rel_name(p.rel);
    put_expr(os, p.lhs);
    os << '\n';
  }
}

std::string item_str(const Item& it) { return std::string(1, it.type) + std::to_string(it.index); }

class Reader {
 public:
  explicit Reader(const std::string& text) : is_(text) {}
  std::string word() {
    std::string w;
    if (!(is_ >> w)) throw std::invalid_argument("unexpected end of system text");
    return w;
  }
  void expect(const std::string& w) {
    auto got = word();
    if (got != w) throw std::invalid_argument("expected '" + w + "', found '" + got + "'");
  }
  long integer() {
    auto w = word();
    try {
      std::size_t pos = 0;
      long v = std::stol(w, &pos);
      if (pos != w.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("expected an integer, found '" + w + "'");
    }
  }
  std::size_t count(std::size_t limit = 1u << 26) {
    long v = integer();
    if (v < 0 || static_cast<std::size_t>(v) > limit) throw std::invalid_argument("count out of range");
    return static_cast<std::size_t>(v);
  }
  double real() {
    auto w = word();
    try {
      std::size_t pos = 0;
      double v = std::stod(w, &pos);
      if (pos != w.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("expected a number, found '" + w + "'");
    }
  }
  bool done() {
    std::string w;
    return !(is_ >> w);
  }

 private:
  std::istringstream is_;
};

Monomial get_mono(Reader& r, std::size_t nvars) {
  Monomial m(r.count(64));
  for (auto& [v, e] : m) {
    v = static_cast<int>(r.count(nvars - 1));
    e = static_cast<int>(r.count(kMaxDegree));
  }
  return m;
}

Expr get_expr(Reader& r, std::size_t nvars, std::size_t nuni) {
  Expr e;
  e.terms.resize(r.count());
  for (auto& t : e.terms) {
    r.expect("[");
    t.coef = r.real();
    t.mono = get_mono(r, nvars);
    long u = r.integer();
    if (u < -1 || u >= static_cast<long>(nuni)) throw std::invalid_argument("univariate index out of range");
    t.uni = static_cast<int>(u);
    if (t.uni >= 0) {
      t.inner.terms.resize(r.count());
      for (auto& it : t.inner.terms) {
        it.coef = r.real();
        it.mono = get_mono(r, nvars);
      }
    }
    r.expect("]");
  }
  return e;
}

std::vector<Predicate> get_preds(Reader& r, const char* name, std::size_t nvars, std::size_t nuni) {
  r.expect(name);
  std::vector<Predicate> ps(r.count());
  for (auto& p : ps) {
    r.expect("pred");
    p.rel = rel_from(r.word());
    p.lhs = get_expr(r, nvars, nuni);
  }
  return ps;
}

Item parse_item(const std::string& w) {
  if (w.size() < 2 || std::string("abcd").find(w[0]) == std::string::npos)
    throw std::invalid_argument("bad permutation item '" + w + "'");
  int idx = std::stoi(w.substr(1));
  if (idx < 1 || idx > 127) throw std::invalid_argument("bad permutation item '" + w + "'");
  return {w[0], static_cast<std::int8_t>(idx)};
}

}  // namespace

std::string export_system(const PolySystem& sys) {
  std::ostringstream os;
  os << "gmmfit-system 1\n";
  os << "family " << to_string(sys.family) << '\n';
  os << "rescaled " << (sys.rescaled ? 1 : 0) << '\n';
  os << "k " << sys.k << "\nK " << sys.K << "\nnu " << num(sys.nu) << '\n';
  os << "degree " << sys.max_degree << '\n';
  os << "vars " << sys.vars.size() << '\n';
  for (const auto& v : sys.vars) os << "var " << v.name << ' ' << kind_name(v.kind) << '\n';
  os << "constants " << sys.constants.size();
  for (double c : sys.constants) os << ' ' << num(c);
  os << '\n';
  os << "univariates " << sys.univariates.size() << '\n';
  for (const auto& u : sys.univariates) {
    os << "uni " << u.degree();
    for (double c : u.coeffs()) os << ' ' << num(c);
    os << '\n';
  }
  put_preds(os, "valid", sys.valid);
  put_preds(os, "breakpoints", sys.breakpoints);
  put_preds(os, "slack", sys.slack);
  put_preds(os, "guard", sys.guard);
  os << "gaps " << sys.gaps.size() << '\n';
  for (const auto& g : sys.gaps) {
    os << "gap " << g.density_piece << ' ' << g.component_pieces.size();
    for (int c : g.component_pieces) os << ' ' << c;
    put_expr(os, g.integral);
    os << '\n';
  }
  os << "permutations " << sys.permutation_count << ' ' << (sys.materialized ? 1 : 0) << '\n';
  for (const auto& d : sys.disjuncts) {
    auto lay = disjunct_layout(sys, d.perm);
    os << "disjunct";
    for (const auto& it : d.perm) os << ' ' << item_str(it);
    os << " gaps";
    for (int g : lay.gap_poly) os << ' ' << g;
    os << " in";
    for (int j : lay.interval) os << ' ' << j;
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

PolySystem parse_system(const std::string& text) {
  Reader r(text);
  PolySystem sys;
  r.expect("gmmfit-system");
  if (r.integer() != 1) throw std::invalid_argument("unsupported system version");
  r.expect("family");
  sys.family = family_from_string(r.word());
  r.expect("rescaled");
  sys.rescaled = r.integer() != 0;
  r.expect("k");
  sys.k = static_cast<int>(r.count(127));
  r.expect("K");
  sys.K = static_cast<int>(r.count(127));
  if (sys.k < 1 || sys.K < 1) throw std::invalid_argument("k and K must be positive");
  r.expect("nu");
  sys.nu = r.real();
  r.expect("degree");
  sys.max_degree = static_cast<int>(r.count(1 << 20));
  r.expect("vars");
  sys.vars.resize(r.count(4096));
  for (auto& v : sys.vars) {
    r.expect("var");
    v.name = r.word();
    v.kind = kind_from(r.word());
  }
  r.expect("constants");
  sys.constants.resize(r.count(127));
  for (auto& c : sys.constants) c = r.real();
  r.expect("univariates");
  sys.univariates.resize(r.count(4096));
  for (auto& u : sys.univariates) {
    r.expect("uni");
    std::vector<double> c(r.count(kMaxDegree) + 1);
    for (auto& x : c) x = r.real();
    u = Polynomial(std::move(c));
  }
  const std::size_t nv = sys.vars.size(), nu = sys.univariates.size();
  sys.valid = get_preds(r, "valid", nv, nu);
  sys.breakpoints = get_preds(r, "breakpoints", nv, nu);
  sys.slack = get_preds(r, "slack", nv, nu);
  sys.guard = get_preds(r, "guard", nv, nu);
  Layout L = layout_of(sys);
  if (static_cast<std::size_t>(L.count()) != nv || sys.s() % sys.k != 0)
    throw std::invalid_argument("variable count does not match k, K and breakpoints");
  r.expect("gaps");
  sys.gaps.resize(r.count());
  for (auto& g : sys.gaps) {
    r.expect("gap");
    g.density_piece = static_cast<int>(r.integer());
    g.component_pieces.resize(r.count(127));
    for (auto& c : g.component_pieces) c = static_cast<int>(r.integer());
    g.integral = get_expr(r, nv, nu);
    GapKey key{g.density_piece, g.component_pieces};
    sys.gap_index[key.flat()] = static_cast<int>(&g - sys.gaps.data());
  }
  r.expect("permutations");
  sys.permutation_count = static_cast<std::uint64_t>(std::stoull(r.word()));
  sys.materialized = r.integer() != 0;
  if (sys.permutation_count != permutation_count(sys.K, sys.r(), sys.s()))
    throw std::invalid_argument("permutation count disagrees with the item counts");
  const auto t = static_cast<std::size_t>(sys.t());
  for (;;) {
    auto w = r.word();
    if (w == "end") break;
    if (w != "disjunct") throw std::invalid_argument("expected 'disjunct' or 'end', found '" + w + "'");
    Disjunct d;
    for (std::size_t i = 0; i < t; ++i) d.perm.push_back(parse_item(r.word()));
    auto lay = disjunct_layout(sys, d.perm);
    r.expect("gaps");
    for (std::size_t i = 0; i + 1 < t; ++i)
      if (r.integer() != lay.gap_poly[i]) throw std::invalid_argument("disjunct gap list is inconsistent");
    r.expect("in");
    for (std::size_t i = 0; i + 1 < t; ++i)
      if (r.integer() != lay.interval[i])
        throw std::invalid_argument("disjunct interval list is inconsistent");
    sys.disjuncts.push_back(std::move(d));
  }
  if (sys.materialized && sys.disjuncts.size() != sys.permutation_count)
    throw std::invalid_argument("materialised system lists the wrong number of disjuncts");
  if (!r.done()) throw std::invalid_argument("trailing text after 'end'");
  return sys;
}

// ---- semantics ----

SystemEvaluator::SystemEvaluator(const PolySystem& sys) : sys_(sys) {
  if (!sys.materialized) throw std::invalid_argument("system disjuncts were not materialised");
  for (std::size_t i = 0; i < sys.disjuncts.size(); ++i) lookup_[sys.disjuncts[i].perm] = i;
}

namespace {

struct Placed {
  double x;
  int rank;  // b before structural items before a at equal values
  Item item;
};

double gap_value(const PolySystem& sys, int gap, std::vector<double>& x, double lo, double hi) {
  if (gap < 0) return 0.0;
  Layout L = layout_of(sys);
  x[static_cast<std::size_t>(L.lo())] = lo;
  x[static_cast<std::size_t>(L.hi())] = hi;
  return expr_eval(sys.gaps[static_cast<std::size_t>(gap)].integral, sys.univariates, x);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

SystemVerdict SystemEvaluator::operator()(const std::vector<double>& theta) const {
  const PolySystem& sys = sys_;
  Layout L = layout_of(sys);
  if (theta.size() != static_cast<std::size_t>(3 * sys.k))
    throw std::invalid_argument("theta must hold 3k values");
  std::vector<double> x(static_cast<std::size_t>(L.count()), 0.0);
  std::copy(theta.begin(), theta.end(), x.begin());
  SystemVerdict out;
  for (const auto& p : sys.valid)
    if (!rel_holds(expr_eval(p.lhs, sys.univariates, x), p.rel, 1e-12)) return out;
  out.valid = true;

  // each breakpoint predicate is affine in its own d variable
  for (int e = 0; e < sys.s(); ++e) {
    const auto& p = sys.breakpoints[static_cast<std::size_t>(e)];
    auto dv = static_cast<std::size_t>(L.d(e));
    x[dv] = 0.0;
    double f0 = expr_eval(p.lhs, sys.univariates, x);
    x[dv] = 1.0;
    double slope = expr_eval(p.lhs, sys.univariates, x) - f0;
    if (slope == 0.0) return out;
    x[dv] = -f0 / slope;
  }

  std::vector<Placed> structural;
  for (int i = 0; i < sys.r(); ++i)
    structural.push_back({sys.constants[static_cast<std::size_t>(i)], 1, {'c', static_cast<std::int8_t>(i + 1)}});
  for (int e = 0; e < sys.s(); ++e)
    structural.push_back({x[static_cast<std::size_t>(L.d(e))], 1, {'d', static_cast<std::int8_t>(e + 1)}});
  auto by_pos = [](const Placed& a, const Placed& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.item < b.item;
  };
  std::sort(structural.begin(), structural.end(), by_pos);
  const double top = structural.back().x;

  // permutation for a set of intervals (sorted, disjoint); unused pairs go past the top
  auto perm_for = [&](const std::vector<std::pair<double, double>>& ivs) {
    std::vector<Placed> all = structural;
    for (int j = 0; j < sys.K; ++j) {
      double a, b;
      if (j < static_cast<int>(ivs.size())) {
        a = ivs[static_cast<std::size_t>(j)].first;
        b = ivs[static_cast<std::size_t>(j)].second;
      } else {
        a = top + 1.0 + 2.0 * j;
        b = a + 1.0;
      }
      all.push_back({a, 2, {'a', static_cast<std::int8_t>(j + 1)}});
      all.push_back({b, 0, {'b', static_cast<std::int8_t>(j + 1)}});
    }
    std::sort(all.begin(), all.end(), by_pos);
    return all;
  };
  auto disjunct_of = [&](const std::vector<Placed>& placed) -> std::size_t {
    std::vector<Item> perm;
    for (const auto& p : placed) perm.push_back(p.item);
    auto it = lookup_.find(perm);
    if (it == lookup_.end()) throw std::logic_error("configuration has no disjunct");
    return it->second;
  };

  // elementary segments between distinct structural values, each with its gap polynomial
  struct Segment {
    double lo, hi;
    int gap;
  };
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < structural.size(); ++i) {
    double lo = structural[i].x, hi = structural[i + 1].x;
    if (!(hi > lo)) continue;
    auto placed = perm_for({{lo, hi}});
    const auto& d = sys.disjuncts[disjunct_of(placed)];
    auto lay = disjunct_layout(sys, d.perm);
    int gap = -1;
    for (std::size_t g = 0; g + 1 < placed.size(); ++g)
      if (placed[g].item == Item{'a', 1}) {
        gap = lay.gap_poly[g];
        break;
      }
    segs.push_back({lo, hi, gap});
  }

  // candidate endpoints: structural values plus interior extrema of the running integral
  std::vector<double> cand;
  for (const auto& p : structural) cand.push_back(p.x);
  for (const auto& sg : segs) {
    if (sg.gap < 0) continue;
    auto g = [&](double v) { return gap_value(sys, sg.gap, x, sg.lo, v); };
    constexpr int M = 256;
    std::vector<double> xs(M + 1), ys(M + 1);
    for (int i = 0; i <= M; ++i) {
      xs[i] = i == M ? sg.hi : sg.lo + (sg.hi - sg.lo) * i / M;
      ys[i] = g(xs[i]);
    }
    for (int i = 1; i < M; ++i) {
      double l = ys[i] - ys[i - 1], rr = ys[i + 1] - ys[i];
      if ((l > 0 && rr <= 0) || (l < 0 && rr >= 0)) {
        double sgn = l > 0 ? 1.0 : -1.0;
        cand.push_back(golden_max([&](double v) { return sgn * g(v); }, xs[i - 1], xs[i + 1]));
      }
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // integral between consecutive candidates
  const std::size_t n = cand.size();
  std::vector<double> step(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double lo = cand[i], hi = cand[i + 1];
    for (const auto& sg : segs)
      if (sg.lo <= lo && hi <= sg.hi) {
        step[i] = gap_value(sys, sg.gap, x, lo, hi);
        break;
      }
  }
  std::vector<double> prefix(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) prefix[i] = prefix[i - 1] + step[i - 1];

  // best[j][p]: largest sum of |integral| over j intervals inside cand[0..p]
  const int K = sys.K;
  std::vector<std::vector<double>> best(static_cast<std::size_t>(K) + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::pair<long, long>>> choice(
      static_cast<std::size_t>(K) + 1, std::vector<std::pair<long, long>>(n, {-1, -1}));
  for (int j = 1; j <= K; ++j)
    for (std::size_t p = 0; p < n; ++p) {
      double b = p > 0 ? best[j][p - 1] : 0.0;
      // -1: nothing placed, -2: same as at p - 1
      std::pair<long, long> ch = p > 0 ? std::pair<long, long>{-2, -2} : std::pair<long, long>{-1, -1};
      for (std::size_t l = 0; l < p; ++l) {
        double v = best[j - 1][l] + std::abs(prefix[p] - prefix[l]);
        if (v > b) {
          b = v;
          ch = {static_cast<long>(l), static_cast<long>(p)};
        }
      }
      best[j][p] = b;
      choice[j][p] = ch;
    }
  std::vector<std::pair<double, double>> ivs;
  for (long j = K, p = static_cast<long>(n) - 1; j > 0 && p >= 0;) {
    auto ch = choice[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)];
    if (ch.first == -1) break;
    if (ch.first == -2) {
      --p;
      continue;
    }
    ivs.emplace_back(cand[static_cast<std::size_t>(ch.first)], cand[static_cast<std::size_t>(ch.second)]);
    p = ch.first;
    --j;
  }
  std::reverse(ivs.begin(), ivs.end());

  // literal check of the disjunct selected by the worst endpoint configuration
  auto placed = perm_for(ivs);
  const auto& dj = sys.disjuncts[disjunct_of(placed)];
  auto lay = disjunct_layout(sys, dj.perm);
  for (int j = 0; j < K; ++j) {
    double a = placed[0].x, b = a;
    for (const auto& p : placed) {
      if (p.item == Item{'a', static_cast<std::int8_t>(j + 1)}) a = p.x;
      if (p.item == Item{'b', static_cast<std::int8_t>(j + 1)}) b = p.x;
    }
    x[static_cast<std::size_t>(L.a(j))] = a;
    x[static_cast<std::size_t>(L.b(j))] = b;
  }
  for (const auto& p : sys.guard)
    if (!rel_holds(expr_eval(p.lhs, sys.univariates, x), p.rel, 0.0)) return out;
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  for (std::size_t g = 0; g + 1 < placed.size(); ++g) {
    if (!(placed[g].x <= placed[g + 1].x)) return out;
    if (lay.interval[g] >= 0)
      sums[static_cast<std::size_t>(lay.interval[g])] +=
          gap_value(sys, lay.gap_poly[g], x, placed[g].x, placed[g + 1].x);
  }
  double total = 0.0;
  for (int j = 0; j < K; ++j) {
    double xi = std::abs(sums[static_cast<std::size_t>(j)]);
    x[static_cast<std::size_t>(L.xi(j))] = xi;
    total += xi;
  }
  out.worst_sum = total;
  out.satisfied = true;
  for (const auto& p : sys.slack)
    if (!rel_holds(expr_eval(p.lhs, sys.univariates, x), p.rel, 0.0)) out.satisfied = false;
  return out;
}

SystemVerdict evaluate_system(const PolySystem& sys, const std::vector<double>& theta) {
  return SystemEvaluator(sys)(theta);
}

}  // namespace gmmfit
