#ifndef MOTINT_GENSUM_HPP
#define MOTINT_GENSUM_HPP

#include "motint/semilinear.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace motint {

struct DivergentSum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Sparse multivariate polynomial over Q; exponent keys cover the full
// variable space of the enclosing computation.
class QPoly {
 public:
  QPoly() = default;
  explicit QPoly(Rat c) {
    if (c != 0) terms_[{}] = std::move(c);
  }
  static QPoly variable(int j) {
    QPoly p;
    std::vector<int> e(j + 1, 0);
    e[j] = 1;
    p.terms_[e] = 1;
    return p;
  }
  static QPoly from_affine(const AffineForm& a);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
  }
  Rat constant_value() const {
    if (terms_.empty()) return Rat(0);
    if (!is_constant()) throw std::logic_error("QPoly: not constant");
    return terms_.begin()->second;
  }
  int degree_in(int j) const;

  QPoly operator+(const QPoly& o) const;
  QPoly operator-(const QPoly& o) const;
  QPoly operator*(const QPoly& o) const;
  QPoly operator*(const Rat& s) const;
  bool operator==(const QPoly& o) const { return terms_ == o.terms_; }

  // Substitutes variable j by the affine form a (itself over the full space).
  QPoly substitute(int j, const AffineForm& a) const;
  // Substitutes variable j by variable-j-shifted-by-delta.
  QPoly shift_var(int j, const Rat& delta) const;

  const std::map<std::vector<int>, Rat>& terms() const { return terms_; }

 private:
  std::map<std::vector<int>, Rat> terms_;
  void add_term(std::vector<int> e, const Rat& c);
};

// Exponent vector of a monomial in the two formal variables (T, L).
struct XExp {
  Rat t, l;
  bool operator<(const XExp& o) const {
    if (t != o.t) return t < o.t;
    return l < o.l;
  }
  bool operator==(const XExp& o) const { return t == o.t && l == o.l; }
  XExp operator-() const { return {-t, -l}; }
  XExp operator+(const XExp& o) const { return {t + o.t, l + o.l}; }
  XExp operator*(const Rat& s) const { return {t * s, l * s}; }
  bool is_zero() const { return t == 0 && l == 0; }
};

// One closed-form summand  c * T^t L^l / prod (1 - T^{d.t} L^{d.l})^mult.
struct GTerm {
  Rat coeff;
  XExp exp;
  std::map<XExp, int> dens;
};
using GenSum = std::vector<GTerm>;

enum class SmallMode {
  NegT,  // |T| -> infinity viewpoint: monomials with t < 0 are small
  PosT   // power series in T: monomials with t > 0 are small
};

// Sum of T^{t_form(z)} L^{l_form(z)} over the integer points of the region.
// Exact closed form; throws DivergentSum when the series does not converge
// in the chosen direction.
GenSum gen_sum(const SemilinearSet& region, const AffineForm& t_form,
               const AffineForm& l_form, SmallMode mode);

// Convenience: sum of T^{-m sigma(gamma)} over gamma in S with m*gamma
// integral, the inner sum of the arc-level maps.
GenSum lattice_sum(const SemilinearSet& s, const AffineForm& sigma, long m);

// lcm of exponent denominators (the N with exponents in (1/N)Z).
Int gensum_exponent_denominator(const GenSum& g);

// Expansion of the terms as a series in descending powers of T (mode NegT
// shapes): all coefficients of T^e with e >= -bound.  L-exponents must be 0.
std::map<Rat, Rat> gensum_coeffs_above(const GenSum& g, const Rat& bound);

// Exact equality of closed forms via cross-multiplication.
bool gensum_equal(const GenSum& a, const GenSum& b);

std::string gensum_to_string(const GenSum& g);

}  // namespace motint

#endif
