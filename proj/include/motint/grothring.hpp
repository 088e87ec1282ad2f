#ifndef MOTINT_GROTHRING_HPP
#define MOTINT_GROTHRING_HPP

#include "motint/rational.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace motint {

struct BadPrime : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PoleAtInfinity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonIntegralExponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Laurent polynomial with integer coefficients in a fixed number of
// variables; exponents may be negative.
class LPoly {
 public:
  LPoly() = default;
  explicit LPoly(int nvars) : nvars_(nvars) {}

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  const std::map<std::vector<int>, long long>& terms() const { return terms_; }

  void add_term(const std::vector<int>& exps, long long coeff);

  LPoly operator+(const LPoly& o) const;
  LPoly operator-(const LPoly& o) const;
  bool operator==(const LPoly& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

  // Value over (Z/p)^x given unit coordinates.
  long eval_mod(const std::vector<long>& point, long p) const;

  // Exponent vectors as rational points (for Newton polytopes).
  std::vector<RatVec> support_points() const;

  std::string to_string(const std::vector<std::string>& vars) const;

 private:
  int nvars_ = 0;
  std::map<std::vector<int>, long long> terms_;
};

struct VarietySymbol {
  std::string name;
  int torus_dim = 0;
  std::vector<LPoly> equations;  // empty means the full torus
  long action_order = 1;
  bool nondegenerate = false;
  std::string display_name;  // LaTeX display; defaults to name
};
using SymbolPtr = std::shared_ptr<const VarietySymbol>;

struct VMonomial {
  int l_power = 0;
  std::vector<SymbolPtr> symbols;  // sorted by name

  bool operator<(const VMonomial& o) const;
  bool operator==(const VMonomial& o) const;
};

// Element of the symbolic Grothendieck ring: a combination of monomials in
// opaque variety symbols and integer powers of L.  Equality is syntactic on
// the canonical form.
class VClass {
 public:
  VClass() = default;
  explicit VClass(long n) {
    if (n != 0) terms_[VMonomial{}] = Rat(n);
  }
  explicit VClass(const Rat& c) {
    if (c != 0) terms_[VMonomial{}] = c;
  }

  static VClass L(int power = 1) {
    VClass v;
    v.terms_[VMonomial{power, {}}] = 1;
    return v;
  }
  static VClass gm() { return L() - VClass(1); }
  static VClass symbol(SymbolPtr s) {
    VClass v;
    v.terms_[VMonomial{0, {std::move(s)}}] = 1;
    return v;
  }

  bool is_zero() const { return terms_.empty(); }
  const std::map<VMonomial, Rat>& terms() const { return terms_; }

  VClass operator+(const VClass& o) const;
  VClass operator-(const VClass& o) const;
  VClass operator-() const;
  VClass operator*(const VClass& o) const;
  VClass operator*(const Rat& s) const;
  VClass& operator+=(const VClass& o) { return *this = *this + o; }
  bool operator==(const VClass& o) const { return terms_ == o.terms_; }
  bool operator!=(const VClass& o) const { return !(*this == o); }

  VClass mul_L(int k) const;  // multiply by L^k
  VClass pow(int k) const;

  // Substitutes L = 0 (for targets where [A] vanishes); requires no negative
  // powers of L.
  VClass reduce_mod_L() const;

  std::set<std::string> symbol_names() const;
  std::vector<SymbolPtr> distinct_symbols() const;

  std::string to_string() const;
  std::string to_latex() const;

 private:
  std::map<VMonomial, Rat> terms_;
  void add_term(const VMonomial& m, const Rat& c);
  friend VClass add(const VClass&, const VClass&);
};

inline VClass add(const VClass& x, const VClass& y) { return x + y; }
inline VClass mul(const VClass& x, const VClass& y) { return x * y; }
inline VClass neg(const VClass& x) { return -x; }

// Point-count specialization: L -> p, symbol -> #solutions over (F_p^x)^d.
Rat point_count(const VClass& x, long p, long long cap = 10000000);

// Compactly supported Euler characteristic: L -> 1, nondegenerate torus
// hypersurfaces via the Newton-polytope normalized-volume rule, torus_dim<=1
// by distinct-root counting.
Int euler(const VClass& x);

// d! * vol of the convex hull (exact); 0 when the hull is lower-dimensional.
Rat normalized_volume(const std::vector<RatVec>& points, int d);

// Exact division by (1 - L^j), j a nonzero integer; throws when inexact.
VClass exact_div_one_minus_L(const VClass& v, int j);

// ----------------------------------------------------------------- TForm

// Rational function in T over VClass: numerator a finite sum of c*T^e with
// rational exponents, denominator a multiset of factors (1 - L^a T^b).
class TForm {
 public:
  TForm() = default;
  explicit TForm(const VClass& c) {
    if (!c.is_zero()) num_[Rat(0)] = c;
  }
  static TForm monomial(const VClass& c, const Rat& t_exp) {
    TForm f;
    if (!c.is_zero()) f.num_[t_exp] = c;
    return f;
  }

  const std::map<Rat, VClass>& num() const { return num_; }
  const std::map<std::pair<int, Rat>, int>& den() const { return den_; }
  bool is_zero() const;

  void add_den_factor(int a, const Rat& b, int mult = 1);

  TForm operator+(const TForm& o) const;
  TForm operator-(const TForm& o) const;
  TForm operator*(const TForm& o) const;
  TForm operator*(const VClass& c) const;
  bool equals(const TForm& o) const;

  // True when every denominator factor has b > 0.
  bool is_dagger() const;
  // lcm of T-exponent denominators.
  Int exponent_denominator() const;

  // Ascending T-series coefficients for exponents <= max_exp (dagger only).
  std::map<Rat, VClass> coeffs_ascending(const Rat& max_exp) const;
  // Descending T-series coefficients for exponents >= min_exp (all b < 0).
  std::map<Rat, VClass> coeffs_descending(const Rat& min_exp) const;

  // The assignment T -> L followed by exact simplification to a VClass.
  VClass eta() const;

  // Negative of the limit T -> infinity (dagger forms).
  VClass neg_lim() const;

  std::string to_string() const;
  std::string to_latex() const;

 private:
  std::map<Rat, VClass> num_;
  std::map<std::pair<int, Rat>, int> den_;

  std::map<Rat, VClass> expanded_num_times(
      const std::map<std::pair<int, Rat>, int>& extra) const;
};

VClass neg_lim(const TForm& f);

// --------------------------------------------------------------- streams

struct CoeffStream {
  std::function<VClass(long)> at;  // m >= 1
  std::optional<TForm> closed;
};

CoeffStream stream_of(const TForm& f);
CoeffStream hadamard(const CoeffStream& a, const CoeffStream& b);

// ----------------------------------------------------------- symbol table

class SymbolTable {
 public:
  // Returns the canonical symbol for the given data, interning by content.
  SymbolPtr intern(const std::string& name, int torus_dim,
                   std::vector<LPoly> equations, long action_order,
                   bool nondegenerate, const std::string& display_name = "");
  SymbolPtr find(const std::string& name) const;
  std::vector<SymbolPtr> all() const;

 private:
  std::map<std::string, SymbolPtr> by_name_;
};

}  // namespace motint

#endif
