#pragma once

#include <span>
#include <vector>

namespace gmmfit {

inline constexpr int kMaxDegree = 128;

// Dense univariate polynomial c_0 + c_1 u + ... + c_m u^m.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial constant(double c) { return Polynomial(std::vector<double>{c}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  std::span<const double> coeffs() const { return c_; }
  double coeff(int j) const { return j <= degree() ? c_[j] : 0.0; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  double operator()(double u) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * u + *it;
    return acc;
  }

  Polynomial derivative() const;
  // Antiderivative vanishing at 0.
  Polynomial antiderivative() const;
  double integrate(double a, double b) const;
  // q(u) = p(shift + scale * u)
  Polynomial compose_affine(double shift, double scale) const;
  double max_abs_coeff() const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  bool operator==(const Polynomial& o) const = default;

 private:
  void trim();
  std::vector<double> c_;
};

// Points in (lo, hi) where p changes sign, located to within tol.
// Isolation by Sturm sequences, refinement by bisection. Roots of even
// multiplicity are not reported.
std::vector<double> sign_change_roots(const Polynomial& p, double lo, double hi, double tol);

// Number of distinct real roots in (lo, hi] counted with a Sturm sequence.
int sturm_root_count(const Polynomial& p, double lo, double hi);

}  // namespace gmmfit
