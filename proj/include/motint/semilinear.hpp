#ifndef MOTINT_SEMILINEAR_HPP
#define MOTINT_SEMILINEAR_HPP

#include "motint/affine.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace motint {

struct InfiniteLattice : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RegionSyntaxError : std::runtime_error {
  int position;
  RegionSyntaxError(const std::string& msg, int pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)),
        position(pos) {}
};

// One level of a cylindrical cell: either a section x_i = form(x_<i) or a
// sector lo(x_<i) < x_i < hi(x_<i) with optional infinite endpoints.
struct CylLevel {
  bool is_section = false;
  AffineForm section;            // valid when is_section
  std::optional<AffineForm> lo;  // absent = -infinity
  std::optional<AffineForm> hi;  // absent = +infinity

  static CylLevel make_section(AffineForm f) {
    CylLevel l;
    l.is_section = true;
    l.section = std::move(f);
    return l;
  }
  static CylLevel make_sector(std::optional<AffineForm> lo,
                              std::optional<AffineForm> hi) {
    CylLevel l;
    l.is_section = false;
    l.lo = std::move(lo);
    l.hi = std::move(hi);
    return l;
  }
};

// Relatively open cylindrical cell in Q^k, levels[i] constrains x_i in terms
// of x_0..x_{i-1}.  Homeomorphic to an open cube of dimension = #sectors.
struct CylCell {
  std::vector<CylLevel> levels;

  int ambient_dim() const { return static_cast<int>(levels.size()); }
  int dim() const {
    int d = 0;
    for (const auto& l : levels)
      if (!l.is_section) ++d;
    return d;
  }
  bool bounded() const {
    for (const auto& l : levels)
      if (!l.is_section && (!l.lo || !l.hi)) return false;
    return true;
  }
  RatVec sample() const;
  bool contains(const RatVec& x) const;
  std::vector<LinConstraint> constraints() const;

  // Vertices of the closure (finite cells only); used for action orders and
  // the zeta interpolation ansatz.
  std::vector<RatVec> closure_vertices() const;

  // chi_b multiplier product: section 1, bounded sector -1, half-infinite 0,
  // full line 1.  chi_g is (-1)^dim.
  int chi_b_value() const;
  int chi_g_value() const { return (dim() % 2 == 0) ? 1 : -1; }
};

// A conjunction of linear constraints over Q^k with cached cylindrical data
// once it comes out of normalize().
class Cell {
 public:
  Cell() = default;
  Cell(std::vector<LinConstraint> cs, int ambient)
      : constraints_(std::move(cs)), ambient_dim_(ambient) {}
  static Cell from_cyl(const CylCell& c);

  const std::vector<LinConstraint>& constraints() const { return constraints_; }
  int ambient_dim() const { return ambient_dim_; }
  const std::optional<CylCell>& cyl() const { return cyl_; }
  int dim() const;

  bool contains(const RatVec& x) const {
    for (const auto& c : constraints_)
      if (!c.satisfied(x)) return false;
    return true;
  }

 private:
  std::vector<LinConstraint> constraints_;
  int ambient_dim_ = 0;
  std::optional<CylCell> cyl_;
  friend class SemilinearSet;
};

class UniMap {
 public:
  // x |-> M x + shift with M integral of determinant +-1.
  UniMap(IntMat m, RatVec shift);
  const IntMat& matrix() const { return m_; }
  const RatVec& shift() const { return shift_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  RatVec apply(const RatVec& x) const;
  UniMap inverse() const;

 private:
  IntMat m_;
  RatVec shift_;
};

class SemilinearSet {
 public:
  SemilinearSet() = default;
  explicit SemilinearSet(int ambient) : ambient_dim_(ambient) {}
  SemilinearSet(std::vector<Cell> cells, int ambient)
      : cells_(std::move(cells)), ambient_dim_(ambient) {}

  static SemilinearSet empty(int ambient) { return SemilinearSet(ambient); }
  static SemilinearSet whole(int ambient);
  static SemilinearSet point(const RatVec& p);
  // Open, half-open or closed interval in Q^1; absent endpoint = infinite.
  static SemilinearSet interval(std::optional<Rat> lo, bool lo_strict,
                                std::optional<Rat> hi, bool hi_strict);

  int ambient_dim() const { return ambient_dim_; }
  const std::vector<Cell>& cells() const { return cells_; }
  bool normalized() const { return normalized_; }

  bool contains(const RatVec& x) const {
    for (const auto& c : cells_)
      if (c.contains(x)) return true;
    return false;
  }
  bool is_empty() const;

  SemilinearSet normalize() const;

  int chi_g() const;
  int chi_b() const;
  bool is_doubly_bounded() const;

  SemilinearSet apply_unimodular(const UniMap& m) const;

  SemilinearSet set_union(const SemilinearSet& o) const;
  SemilinearSet intersect(const SemilinearSet& o) const;
  SemilinearSet product(const SemilinearSet& o) const;
  // Intersection with one extra constraint.
  SemilinearSet restrict(const LinConstraint& c) const;

  // All points of S with coordinates in (1/m)Z, sorted lexicographically.
  // Throws InfiniteLattice when the intersection is infinite.
  std::vector<RatVec> lattice_points(long m) const;

  std::string to_string() const;

 private:
  std::vector<Cell> cells_;
  int ambient_dim_ = 0;
  bool normalized_ = false;
};

Rat jcb_gamma(const RatVec& u, const RatVec& v);

// Region mini-language: variables g1..gk, rational literals, & | ( ),
// relations < <= = >= >.  If expected_dim > 0, using a higher variable index
// is a dimension mismatch error.
SemilinearSet parse_region(const std::string& text, int expected_dim = 0);

// ---- exact linear-arithmetic helpers (Fourier-Motzkin based) ----

// Feasibility of a constraint system over Q^k.
bool fm_feasible(const std::vector<LinConstraint>& cs, int dim);

struct FMInterval {
  std::optional<Rat> lo, hi;
  bool lo_strict = true, hi_strict = true;
  bool empty = false;
};
// Exact range of the affine objective over the solution set.
FMInterval fm_range(const std::vector<LinConstraint>& cs, int dim,
                    const AffineForm& objective);

// Cylindrical sign-invariant decomposition of the union of the given
// conjunctions; returns only the cells contained in the union.
std::vector<CylCell> decompose_union(
    const std::vector<std::vector<LinConstraint>>& conjs, int dim);

// Nonzero rational recession direction of the closed homogenized system along
// which `slope` is <= 0, when one exists.  Used to validate volume forms.
std::optional<RatVec> bad_recession_direction(const SemilinearSet& s,
                                              const AffineForm& slope);

}  // namespace motint

#endif
