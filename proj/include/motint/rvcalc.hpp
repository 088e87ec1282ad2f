#ifndef MOTINT_RVCALC_HPP
#define MOTINT_RVCALC_HPP

#include "motint/gensum.hpp"
#include "motint/grothring.hpp"
#include "motint/semilinear.hpp"

#include <random>
#include <string>
#include <vector>

namespace motint {

struct NotNormalized : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverlappingPieces : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DualPathMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

// A full open-disc coordinate of the given valuative radius; the radius may
// vary affinely over the block polyhedron.
struct DiscMarker {
  AffineForm radius;
};

// Twistoid block: residue class cls over the first res_dim coordinates of P,
// full torus fibers over the remaining ones, disc markers for fused
// coordinates, and the composite weight omega_f on P.
class Block {
 public:
  Block(VClass cls, int res_dim, SemilinearSet P, AffineForm omega_f,
        std::vector<DiscMarker> discs = {});

  const VClass& cls() const { return cls_; }
  int res_dim() const { return res_dim_; }
  const SemilinearSet& P() const { return P_; }
  const AffineForm& omega_f() const { return omega_; }
  const std::vector<DiscMarker>& discs() const { return discs_; }

  int n_pure() const { return P_.ambient_dim() - res_dim_; }
  int grade() const { return P_.ambient_dim() + static_cast<int>(discs_.size()); }

  // Checks the volume-form invariants: omega_f bounded below with strictly
  // positive slope on recession directions, disc radii nonnegative on P.
  void validate() const;

  std::string key() const;  // canonical-form merge key
  std::string to_string() const;

 private:
  VClass cls_;
  int res_dim_;
  SemilinearSet P_;
  AffineForm omega_;
  std::vector<DiscMarker> discs_;
};

class RVClass {
 public:
  RVClass() = default;

  static RVClass from_block(Block b, const Rat& coeff = Rat(1));

  const std::vector<std::pair<Rat, Block>>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  RVClass operator+(const RVClass& o) const;
  RVClass operator-(const RVClass& o) const;
  RVClass operator*(const Rat& s) const;
  // product of classes (grade-additive block products)
  RVClass operator*(const RVClass& o) const;

  std::string to_string() const;

 private:
  std::vector<std::pair<Rat, Block>> terms_;
  void add_block(const Rat& c, Block b);
};

Block block_product(const Block& a, const Block& b);

// the unit class [1]: residue point at weight 0
RVClass unit_class();
// the grade-0 multiplicative identity
RVClass one_class();
// [RV??]: full fiber over (0, infinity)
RVClass rv_circ_circ();
// the generators of (P_Gamma): annulus + weight point - [1]
RVClass p_gamma(long gamma);

VClass e_b(const RVClass& x);
VClass e_g(const RVClass& x);
VClass e_diamond(const RVClass& x);

TForm h_m(const RVClass& x, long m);
inline VClass eta(const TForm& f) { return f.eta(); }
TForm zeta(const RVClass& x);
VClass neg_lim_zeta(const RVClass& x);

VClass fubini_volume(
    const std::vector<std::pair<SemilinearSet, VClass>>& pieces, int n);

RVClass refine(const RVClass& x, unsigned seed);

}  // namespace motint

#endif
