#ifndef MOTINT_AFFINE_HPP
#define MOTINT_AFFINE_HPP

#include "motint/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace motint {

// Affine function  x |-> coeffs . x + constant  on Q^dim.
class AffineForm {
 public:
  AffineForm() : coeffs_(RatVec::Zero(0)), constant_(0) {}
  explicit AffineForm(int dim) : coeffs_(RatVec::Zero(dim)), constant_(0) {}
  AffineForm(RatVec coeffs, Rat constant)
      : coeffs_(std::move(coeffs)), constant_(std::move(constant)) {}

  static AffineForm constant_form(int dim, Rat c) {
    return AffineForm(RatVec::Zero(dim), std::move(c));
  }
  static AffineForm coordinate(int dim, int i) {
    RatVec v = RatVec::Zero(dim);
    v(i) = 1;
    return AffineForm(std::move(v), Rat(0));
  }
  // Sum of coordinates i in [first, last).
  static AffineForm coordinate_sum(int dim, int first, int last) {
    RatVec v = RatVec::Zero(dim);
    for (int i = first; i < last; ++i) v(i) = 1;
    return AffineForm(std::move(v), Rat(0));
  }

  int dim() const { return static_cast<int>(coeffs_.size()); }
  const RatVec& coeffs() const { return coeffs_; }
  const Rat& coeff(int i) const { return coeffs_(i); }
  const Rat& constant() const { return constant_; }
  Rat& coeff(int i) { return coeffs_(i); }
  Rat& constant() { return constant_; }

  Rat eval(const RatVec& x) const { return coeffs_.dot(x) + constant_; }

  bool is_constant() const {
    for (int i = 0; i < dim(); ++i)
      if (coeffs_(i) != 0) return false;
    return true;
  }
  bool is_zero() const { return is_constant() && constant_ == 0; }

  AffineForm operator+(const AffineForm& o) const {
    return AffineForm(coeffs_ + o.coeffs_, constant_ + o.constant_);
  }
  AffineForm operator-(const AffineForm& o) const {
    return AffineForm(coeffs_ - o.coeffs_, constant_ - o.constant_);
  }
  AffineForm operator-() const { return AffineForm(-coeffs_, -constant_); }
  AffineForm operator*(const Rat& s) const {
    return AffineForm(RatVec(coeffs_ * s), constant_ * s);
  }

  bool operator==(const AffineForm& o) const {
    return constant_ == o.constant_ && coeffs_.size() == o.coeffs_.size() &&
           coeffs_ == o.coeffs_;
  }
  bool operator!=(const AffineForm& o) const { return !(*this == o); }

  // Lexicographic order on (coeffs, constant); used for canonical dedup.
  bool less_than(const AffineForm& o) const;

  // Restriction of the form to the prefix x_0..x_{k-1} given that the last
  // coordinate is substituted by g (a form on the prefix).
  AffineForm substitute_last(const AffineForm& g) const;

  // Extends to a larger ambient dimension (new trailing coordinates unused).
  AffineForm lift(int new_dim) const;

  // Drops trailing zero coordinates down to new_dim (they must be zero).
  AffineForm truncate(int new_dim) const;

  // Form on permuted coordinates: result(y) = (*this)(y[perm[0]],...,).
  AffineForm permuted(const std::vector<int>& perm) const;

  Int coeff_denominator_lcm() const;

  std::string to_string(const std::string& var_prefix = "g") const;

 private:
  RatVec coeffs_;
  Rat constant_;
};

enum class Rel { LT, LE, EQ };

// Constraint  form REL 0.
struct LinConstraint {
  AffineForm form;
  Rel rel = Rel::EQ;

  LinConstraint() = default;
  LinConstraint(AffineForm f, Rel r) : form(std::move(f)), rel(r) {}

  bool satisfied(const RatVec& x) const {
    Rat v = form.eval(x);
    switch (rel) {
      case Rel::LT: return v < 0;
      case Rel::LE: return v <= 0;
      case Rel::EQ: return v == 0;
    }
    return false;
  }
};

}  // namespace motint

#endif
