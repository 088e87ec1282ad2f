#include "motint/affine.hpp"

#include <sstream>

namespace motint {

bool AffineForm::less_than(const AffineForm& o) const {
  if (dim() != o.dim()) return dim() < o.dim();
  for (int i = 0; i < dim(); ++i) {
    if (coeffs_(i) != o.coeffs_(i)) return coeffs_(i) < o.coeffs_(i);
  }
  return constant_ < o.constant_;
}

AffineForm AffineForm::substitute_last(const AffineForm& g) const {
  int k = dim();
  if (k == 0) return *this;
  if (g.dim() != k - 1) throw std::invalid_argument("substitute_last: dim");
  RatVec c = RatVec::Zero(k - 1);
  for (int i = 0; i < k - 1; ++i) c(i) = coeffs_(i) + coeffs_(k - 1) * g.coeff(i);
  return AffineForm(std::move(c), constant_ + coeffs_(k - 1) * g.constant());
}

AffineForm AffineForm::lift(int new_dim) const {
  if (new_dim < dim()) throw std::invalid_argument("lift: shrinking");
  RatVec c = RatVec::Zero(new_dim);
  for (int i = 0; i < dim(); ++i) c(i) = coeffs_(i);
  return AffineForm(std::move(c), constant_);
}

AffineForm AffineForm::truncate(int new_dim) const {
  for (int i = new_dim; i < dim(); ++i)
    if (coeffs_(i) != 0) throw std::invalid_argument("truncate: nonzero tail");
  RatVec c = RatVec::Zero(new_dim);
  for (int i = 0; i < new_dim; ++i) c(i) = coeffs_(i);
  return AffineForm(std::move(c), constant_);
}

AffineForm AffineForm::permuted(const std::vector<int>& perm) const {
  RatVec c = RatVec::Zero(dim());
  for (int i = 0; i < dim(); ++i) c(i) = coeffs_(perm[i]);
  return AffineForm(std::move(c), constant_);
}

Int AffineForm::coeff_denominator_lcm() const {
  Int l = 1;
  for (int i = 0; i < dim(); ++i) l = lcm_int(l, den(coeffs_(i)));
  return l;
}

std::string AffineForm::to_string(const std::string& var_prefix) const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < dim(); ++i) {
    if (coeffs_(i) == 0) continue;
    if (!first) os << " + ";
    if (coeffs_(i) != 1) os << rat_to_string(coeffs_(i)) << "*";
    os << var_prefix << (i + 1);
    first = false;
  }
  if (constant_ != 0 || first) {
    if (!first) os << " + ";
    os << rat_to_string(constant_);
  }
  return os.str();
}

}  // namespace motint
