#ifndef MOTINT_GAMMARING_HPP
#define MOTINT_GAMMARING_HPP

#include "motint/grothring.hpp"
#include "motint/semilinear.hpp"

#include <map>
#include <string>
#include <vector>

namespace motint {

struct UnboundedSupport : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotInSpan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ChiVariant { g, b };

// Finite-range definable step function Q -> Z, kept in breakpoint form:
// values at the breakpoints and on the open intervals between them, with the
// two unbounded rays at the ends.  Canonical: no removable breakpoint.
class StepFn {
 public:
  StepFn() : interval_vals_{0} {}

  static StepFn zero() { return StepFn(); }
  static StepFn constant(long v);
  // characteristic function of a point
  static StepFn point(const Rat& g, long v = 1);
  // characteristic function of an open interval (a, b), a < b
  static StepFn open_interval(const Rat& a, const Rat& b, long v = 1);
  // characteristic function of (g, +infinity)
  static StepFn ray_above(const Rat& g, long v = 1);

  const std::vector<Rat>& breakpoints() const { return breaks_; }
  long value_at(const Rat& x) const;
  bool is_zero() const;
  bool doubly_bounded_support() const;

  StepFn operator+(const StepFn& o) const;
  StepFn operator-(const StepFn& o) const;
  StepFn operator*(long s) const;
  bool operator==(const StepFn& o) const;

  // Pieces as (1-dim support cell, nonzero value), in increasing order.
  struct Piece {
    SemilinearSet support;
    long value;
  };
  std::vector<Piece> pieces() const;

  std::string to_string() const;

  // access for the convolution kernel
  long point_val(size_t i) const { return point_vals_[i]; }
  long interval_val(size_t i) const { return interval_vals_[i]; }

  static StepFn from_samples(const std::vector<Rat>& breaks,
                             const std::vector<long>& point_vals,
                             const std::vector<long>& interval_vals);

 private:
  std::vector<Rat> breaks_;         // strictly increasing
  std::vector<long> point_vals_;    // size = breaks
  std::vector<long> interval_vals_; // size = breaks + 1
  void canonicalize();
};

// basis elements of the convolution ring
StepFn basis_p(const Rat& g);
StepFn basis_q(const Rat& g);
StepFn basis_r();
StepFn basis_o(const Rat& g);  // g >= 0; o_0 = -p_0

// chi-weighted sum of a step function: sum_m m * chi(f^{-1}(m))
long chi_functional(const StepFn& f, ChiVariant variant);

// convolution product (f*g)(x) = sum_m m chi(h_x^{-1}(m)), h_x(t)=f(t)g(x-t)
StepFn conv(const StepFn& f, const StepFn& g, ChiVariant variant);

// decomposition f = c_r * r + sum a_i p_{x_i} + sum b_j q_{x_j}
struct PQRDecomposition {
  long r_coeff = 0;
  std::vector<std::pair<Rat, long>> p;  // (breakpoint, coefficient)
  std::vector<std::pair<Rat, long>> q;
};
PQRDecomposition decompose_pqr(const StepFn& f);

// Weighted residue classes: integer combinations of (class, weight) pairs at
// a fixed grade.
class WClass {
 public:
  WClass() = default;
  explicit WClass(int grade) : grade_(grade) {}
  int grade() const { return grade_; }
  const std::map<Rat, VClass>& terms() const { return terms_; }
  void add(const Rat& weight, const VClass& cls);
  WClass operator+(const WClass& o) const;
  WClass operator*(const WClass& o) const;  // grades add, weights add
  bool operator==(const WClass& o) const {
    return grade_ == o.grade_ && terms_ == o.terms_;
  }
  WClass reduce_mod_L() const;
  std::string to_string() const;

 private:
  int grade_ = 0;
  std::map<Rat, VClass> terms_;
};

// psi: p_g X^k -> Gm^{k-1} (Gm, g), q_g X^k -> Gm^{k-1} ({1}, g), r X^k -> 0,
// target modulo L.  With reduce=false the raw (unreduced) assignment is
// returned, which is only multiplicative after the reduction.
WClass psi(const StepFn& f, int k, bool reduce = true);

// psi^db: the forgetful map f X^k -> chi(f) Gm^k on doubly bounded support.
VClass psi_db(const StepFn& f, int k);

// image in Fn^db/!P = Z.
long chi_quotient(const StepFn& f);

// lambda: the step function x -> chi(fiber of mu_I over x) where
// mu_I(gamma) = mu(gamma) + sum(gamma) on I.
StepFn lambda_fn(const SemilinearSet& I, const AffineForm& mu,
                 ChiVariant variant);

// CLI expression grammar for step functions: p(a/b), q(a/b), o(a/b), r,
// integer scalars, + - *.
StepFn parse_step_expr(const std::string& text, ChiVariant variant);

}  // namespace motint

#endif
