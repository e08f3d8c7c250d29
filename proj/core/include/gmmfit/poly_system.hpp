#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gmmfit/density_estimation.hpp"
#include "gmmfit/fit_engine.hpp"
#include "gmmfit/mixtures.hpp"
#include "gmmfit/polynomial.hpp"

namespace gmmfit {

// Sparse monomial: (variable index, exponent) pairs sorted by variable.
using Monomial = std::vector<std::pair<int, int>>;

struct PolyTerm {
  double coef = 0.0;
  Monomial mono;
  bool operator==(const PolyTerm&) const = default;
};

// Sparse multivariate polynomial.
struct MPoly {
  std::vector<PolyTerm> terms;
  int degree() const;
  double eval(const std::vector<double>& x) const;
  bool operator==(const MPoly&) const = default;
};

// coef * mono * U[uni](inner), or coef * mono when uni < 0. This is a
// polynomial in the variables; it is kept composed for stable evaluation.
struct ExprTerm {
  double coef = 0.0;
  Monomial mono;
  int uni = -1;
  MPoly inner;
  bool operator==(const ExprTerm&) const = default;
};

struct Expr {
  std::vector<ExprTerm> terms;
  bool operator==(const Expr&) const = default;
};

enum class Rel { lt, le, eq, ne, ge, gt };

struct Predicate {
  Expr lhs;  // compared against 0
  Rel rel = Rel::le;
  bool operator==(const Predicate&) const = default;
};

enum class VarKind { free, forall, exists, gap_bound };

struct Variable {
  std::string name;
  VarKind kind = VarKind::free;
  bool operator==(const Variable&) const = default;
};

// Ordered item of a permutation: a_j, b_j, c_j or d_j (1-based index).
struct Item {
  char type = 'a';
  std::int8_t index = 1;
  bool operator==(const Item&) const = default;
  auto operator<=>(const Item&) const = default;
};

// Integral of the difference over a gap whose left and right ends are the
// placeholder variables LO and HI; the integrand is fixed by which density
// piece and which component pieces are active.
struct GapPoly {
  int density_piece = -1;
  std::vector<int> component_pieces;
  Expr integral;
  bool operator==(const GapPoly&) const = default;
};

struct Disjunct {
  std::vector<Item> perm;
  bool operator==(const Disjunct&) const = default;
};

// Per consecutive pair of a disjunct: the gap polynomial (-1 when the
// integrand vanishes) and the A_K interval containing the pair (-1 if none).
struct DisjunctLayout {
  std::vector<int> gap_poly;
  std::vector<int> interval;
};

struct EncodeOptions {
  std::size_t max_items = 14;
};

struct PolySystem {
  Family family = Family::gaussian;
  bool rescaled = false;
  int k = 1;
  int K = 4;
  double nu = 0.0;
  std::vector<Variable> vars;
  std::vector<double> constants;  // c_1..c_r
  std::vector<Polynomial> univariates;
  std::vector<Predicate> valid;
  std::vector<Predicate> breakpoints;  // one per d variable, in d order
  std::vector<Predicate> slack;        // xi_j >= 0 and sum xi <= nu
  std::vector<Predicate> guard;        // a_1 <= b_1 <= a_2 <= ... <= b_K
  std::vector<GapPoly> gaps;
  std::map<std::vector<int>, int> gap_index;  // (density piece, component pieces...) -> gap
  std::vector<Disjunct> disjuncts;
  bool materialized = false;
  std::uint64_t permutation_count = 0;
  int max_degree = 0;

  int t() const;
  int s() const;
  int r() const { return static_cast<int>(constants.size()); }
  int var_index(const std::string& name) const;
  // Predicates of the expanded formula: shared ones plus (t-1) ordering and
  // 2K bounding predicates per disjunct.
  std::uint64_t predicate_count() const;
  // R + s + 6 t^{t+1}, saturated at the uint64 range
  std::uint64_t predicate_budget() const;
  bool operator==(const PolySystem& o) const;
};

int expr_degree(const Expr& e, const std::vector<Polynomial>& uni);
double expr_eval(const Expr& e, const std::vector<Polynomial>& uni, const std::vector<double>& x);

// |Phi| for K interval pairs, r constants and s component breakpoints.
std::uint64_t permutation_count(int K, int r, int s);

// Encodes ||p_dens - P_theta||_{A_K} <= nu over the given domain. With
// box.rescaled the free variables are (w_i, mut_i, taut_i) tied to the box
// slots, otherwise raw (w_i, mu_i, tau_i) with 0 < tau_i <= box.prec_hi.
PolySystem encode_system(const PiecewisePolynomial& p_dens, const ShapePolyConfig& shape, int K,
                         double nu, const ThetaBox& box, const EncodeOptions& opt = {});

DisjunctLayout disjunct_layout(const PolySystem& sys, const std::vector<Item>& perm);

std::string export_system(const PolySystem& sys);
PolySystem parse_system(const std::string& text);

// Truth value of the encoded sentence at the free-variable values. The
// universal block is decided by maximising over interval endpoints drawn
// from a finite candidate set containing a maximiser; existential variables
// take their unique or minimal witnesses.
struct SystemVerdict {
  bool satisfied = false;
  bool valid = false;
  double worst_sum = 0.0;  // sum of minimal xi at the worst endpoint choice
};
class SystemEvaluator {
 public:
  explicit SystemEvaluator(const PolySystem& sys);
  SystemVerdict operator()(const std::vector<double>& theta) const;

 private:
  const PolySystem& sys_;
  std::map<std::vector<Item>, std::size_t> lookup_;
};

SystemVerdict evaluate_system(const PolySystem& sys, const std::vector<double>& theta);

}  // namespace gmmfit
