#include "motint/rvcalc.hpp"

#include <algorithm>
#include <sstream>

namespace motint {

// ------------------------------------------------------------------ Block

Block::Block(VClass cls, int res_dim, SemilinearSet P, AffineForm omega_f,
             std::vector<DiscMarker> discs)
    : cls_(std::move(cls)),
      res_dim_(res_dim),
      P_(std::move(P)),
      omega_(std::move(omega_f)),
      discs_(std::move(discs)) {
  if (res_dim_ < 0 || res_dim_ > P_.ambient_dim())
    throw std::invalid_argument("Block: res_dim out of range");
  if (omega_.dim() != P_.ambient_dim())
    throw std::invalid_argument("Block: omega dimension mismatch");
  for (const auto& d : discs_)
    if (d.radius.dim() != P_.ambient_dim())
      throw std::invalid_argument("Block: disc radius dimension mismatch");
}

void Block::validate() const {
  if (auto dir = bad_recession_direction(P_, omega_)) {
    std::ostringstream os;
    os << "block weight has nonpositive slope along a recession direction (";
    for (int i = 0; i < dir->size(); ++i) {
      if (i) os << ", ";
      os << rat_to_string((*dir)(i));
    }
    os << ")";
    throw std::invalid_argument(os.str());
  }
  for (const auto& cell : P_.cells()) {
    FMInterval lo = fm_range(cell.constraints(), P_.ambient_dim(), omega_);
    if (lo.empty) continue;
    if (!lo.lo)
      throw std::invalid_argument("block weight is unbounded below");
    for (const auto& d : discs_) {
      FMInterval r = fm_range(cell.constraints(), P_.ambient_dim(), d.radius);
      if (!r.empty && r.lo && *r.lo < 0)
        throw std::invalid_argument("disc radius negative on the block");
      if (!r.empty && !r.lo)
        throw std::invalid_argument("disc radius unbounded below");
    }
  }
}

std::string Block::key() const {
  std::ostringstream os;
  os << cls_.to_string() << "|" << res_dim_ << "|" << P_.to_string() << "|"
     << omega_.to_string();
  for (const auto& d : discs_) os << "|disc:" << d.radius.to_string();
  return os.str();
}

std::string Block::to_string() const {
  std::ostringstream os;
  os << "{cls=" << cls_.to_string() << ", res_dim=" << res_dim_
     << ", P=" << P_.to_string()
     << ", omega=" << omega_.to_string();
  for (const auto& d : discs_) os << ", disc(" << d.radius.to_string() << ")";
  os << ", grade=" << grade() << "}";
  return os.str();
}

// ---------------------------------------------------------------- RVClass

void RVClass::add_block(const Rat& c, Block b) {
  if (c == 0) return;
  std::string k = b.key();
  for (auto& [coeff, blk] : terms_) {
    if (blk.key() == k) {
      coeff += c;
      if (coeff == 0) {
        terms_.erase(std::remove_if(terms_.begin(), terms_.end(),
                                    [&](const auto& t) { return t.first == 0; }),
                     terms_.end());
      }
      return;
    }
  }
  terms_.emplace_back(c, std::move(b));
}

RVClass RVClass::from_block(Block b, const Rat& coeff) {
  RVClass x;
  x.add_block(coeff, std::move(b));
  return x;
}

RVClass RVClass::operator+(const RVClass& o) const {
  RVClass r = *this;
  for (const auto& [c, b] : o.terms_) r.add_block(c, b);
  return r;
}

RVClass RVClass::operator-(const RVClass& o) const {
  RVClass r = *this;
  for (const auto& [c, b] : o.terms_) r.add_block(-c, b);
  return r;
}

RVClass RVClass::operator*(const Rat& s) const {
  RVClass r;
  if (s == 0) return r;
  for (const auto& [c, b] : terms_) r.add_block(c * s, b);
  return r;
}

RVClass RVClass::operator*(const RVClass& o) const {
  RVClass r;
  for (const auto& [c1, b1] : terms_)
    for (const auto& [c2, b2] : o.terms_)
      r.add_block(c1 * c2, block_product(b1, b2));
  return r;
}

std::string RVClass::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [c, b] : terms_) {
    if (!first) os << " + ";
    first = false;
    if (c != 1) os << rat_to_string(c) << "*";
    os << b.to_string();
  }
  return os.str();
}

Block block_product(const Block& a, const Block& b) {
  int na = a.P().ambient_dim(), nb = b.P().ambient_dim();
  int n = na + nb;
  // raw product coordinates: [a-coords, b-coords]; target order:
  // [a-mixed, b-mixed, a-pure, b-pure]
  SemilinearSet prod = a.P().product(b.P());
  std::vector<int> target_from_raw(n);
  {
    int t = 0;
    std::vector<int> raw;
    for (int i = 0; i < a.res_dim(); ++i) raw.push_back(i);
    for (int i = 0; i < b.res_dim(); ++i) raw.push_back(na + i);
    for (int i = a.res_dim(); i < na; ++i) raw.push_back(i);
    for (int i = b.res_dim(); i < nb; ++i) raw.push_back(na + i);
    // raw[t] = raw index placed at target position t
    for (t = 0; t < n; ++t) target_from_raw[t] = raw[t];
  }
  IntMat perm = IntMat::Zero(n, n);
  for (int t = 0; t < n; ++t) perm(t, target_from_raw[t]) = 1;
  UniMap pm(perm, RatVec::Zero(n));
  SemilinearSet P = prod.apply_unimodular(pm);
  auto push_form = [&](const AffineForm& f, int offset) {
    RatVec v = RatVec::Zero(n);
    for (int i = 0; i < f.dim(); ++i) v(offset + i) = f.coeff(i);
    AffineForm lifted(std::move(v), f.constant());
    // reorder to target coordinates: target t reads raw target_from_raw[t]
    RatVec w = RatVec::Zero(n);
    for (int t = 0; t < n; ++t) w(t) = lifted.coeff(target_from_raw[t]);
    return AffineForm(std::move(w), lifted.constant());
  };
  AffineForm omega = push_form(a.omega_f(), 0) + push_form(b.omega_f(), na);
  std::vector<DiscMarker> discs;
  for (const auto& d : a.discs()) discs.push_back({push_form(d.radius, 0)});
  for (const auto& d : b.discs()) discs.push_back({push_form(d.radius, na)});
  return Block(a.cls() * b.cls(), a.res_dim() + b.res_dim(), std::move(P),
               std::move(omega), std::move(discs));
}

// ------------------------------------------------------------ basic classes

RVClass unit_class() {
  RatVec z(1);
  z(0) = 0;
  return RVClass::from_block(
      Block(VClass(1), 1, SemilinearSet::point(z), AffineForm::coordinate(1, 0)));
}

RVClass one_class() {
  return RVClass::from_block(
      Block(VClass(1), 0, SemilinearSet::whole(0), AffineForm(0)));
}

RVClass rv_circ_circ() {
  return RVClass::from_block(Block(VClass(1), 0,
                                   SemilinearSet::interval(Rat(0), true,
                                                           std::nullopt, true),
                                   AffineForm::coordinate(1, 0)));
}

RVClass p_gamma(long gamma) {
  if (gamma < 1) throw std::invalid_argument("p_gamma: gamma must be >= 1");
  // annulus (0, gamma] with full fiber
  SemilinearSet annulus = SemilinearSet::interval(Rat(0), true, Rat(gamma), false);
  RVClass a = RVClass::from_block(
      Block(VClass(1), 0, annulus, AffineForm::coordinate(1, 0)));
  // weight-gamma definable point
  RatVec g(1);
  g(0) = gamma;
  RVClass tpt = RVClass::from_block(
      Block(VClass(1), 1, SemilinearSet::point(g), AffineForm::coordinate(1, 0)));
  return a + tpt - unit_class();
}

// -------------------------------------------------------------- retractions

VClass e_b(const RVClass& x) {
  VClass out;
  for (const auto& [c, b] : x.terms()) {
    int chi = b.P().chi_b();
    if (chi == 0) continue;
    out += b.cls() * VClass::gm().pow(b.n_pure()) * (c * chi);
  }
  return out;
}

VClass e_g(const RVClass& x) {
  VClass out;
  for (const auto& [c, b] : x.terms()) {
    int chi = b.P().chi_g();
    if (chi == 0) continue;
    out += (b.cls() * VClass::gm().pow(b.n_pure())).mul_L(-b.grade()) * (c * chi);
  }
  return out;
}

VClass e_diamond(const RVClass& x) {
  for (const auto& [c, b] : x.terms())
    if (!b.P().is_doubly_bounded())
      throw NotNormalized(
          "e_diamond: a block has an unfused unbounded direction");
  return e_b(x);
}

// ------------------------------------------------------------------- h_m

namespace {

// Region and weights for one block at level m (m > 0 concrete), variables
// (z_1..z_k, s_1..s_D).
struct BlockRegion {
  SemilinearSet region;
  AffineForm t_form, l_form;
};

BlockRegion block_region_fixed_m(const Block& b, long m) {
  int k = b.P().ambient_dim();
  int nd = static_cast<int>(b.discs().size());
  int n = k + nd;
  std::vector<Cell> cells;
  for (const auto& cell : b.P().cells()) {
    std::vector<LinConstraint> cs;
    for (const auto& c : cell.constraints()) {
      RatVec v = RatVec::Zero(n);
      for (int i = 0; i < k; ++i) v(i) = c.form.coeff(i) / m;
      cs.emplace_back(AffineForm(std::move(v), c.form.constant()), c.rel);
    }
    for (int d = 0; d < nd; ++d) {
      const AffineForm& rho = b.discs()[d].radius;
      // floor window: s_d <= rho.z + m*rho0 < s_d + 1
      RatVec v1 = RatVec::Zero(n);
      for (int i = 0; i < k; ++i) v1(i) = -rho.coeff(i);
      v1(k + d) = 1;
      cs.emplace_back(AffineForm(std::move(v1), -rho.constant() * m), Rel::LE);
      RatVec v2 = RatVec::Zero(n);
      for (int i = 0; i < k; ++i) v2(i) = rho.coeff(i);
      v2(k + d) = -1;
      cs.emplace_back(AffineForm(std::move(v2), rho.constant() * m - 1), Rel::LT);
    }
    cells.emplace_back(std::move(cs), n);
  }
  BlockRegion out;
  out.region = SemilinearSet(std::move(cells), n);
  RatVec tv = RatVec::Zero(n);
  for (int i = 0; i < k; ++i) tv(i) = -b.omega_f().coeff(i);
  for (int d = 0; d < nd; ++d) tv(k + d) = -1;
  out.t_form = AffineForm(std::move(tv), -b.omega_f().constant() * m);
  out.l_form = AffineForm(n);
  return out;
}

TForm gensum_to_tform_negT(const GenSum& g, const VClass& scale) {
  TForm out;
  for (const auto& term : g) {
    if (term.exp.l != 0)
      throw std::logic_error("h_m: unexpected L-exponent");
    TForm piece = TForm::monomial(scale * term.coeff, term.exp.t);
    for (const auto& [v, mult] : term.dens) {
      if (v.l != 0) throw std::logic_error("h_m: L in denominator");
      piece.add_den_factor(0, v.t, mult);
    }
    out = out + piece;
  }
  return out;
}

}  // namespace

TForm h_m(const RVClass& x, long m) {
  if (m <= 0) throw std::invalid_argument("h_m: m must be positive");
  TForm out;
  for (const auto& [c, b] : x.terms()) {
    BlockRegion br = block_region_fixed_m(b, m);
    GenSum g = gen_sum(br.region, br.t_form, br.l_form, SmallMode::NegT);
    VClass scale = b.cls() * VClass::gm().pow(b.n_pure()) * c;
    out = out + gensum_to_tform_negT(g, scale);
  }
  return out;
}

// ------------------------------------------------------------------- zeta

namespace {

struct PureLKey {
  std::vector<std::pair<int, int>> factors;  // (l-exponent, multiplicity)
  bool operator<(const PureLKey& o) const { return factors < o.factors; }
};

}  // namespace

TForm zeta(const RVClass& x) {
  // per-block regions over (m, z, s); group terms by their pure-L factors,
  // then divide those out exactly
  std::map<PureLKey, TForm> groups;
  for (const auto& [c, b] : x.terms()) {
    b.validate();
    int k = b.P().ambient_dim();
    int nd = static_cast<int>(b.discs().size());
    int n = 1 + k + nd;  // m, z, s
    std::vector<Cell> cells;
    for (const auto& cell : b.P().cells()) {
      std::vector<LinConstraint> cs;
      {
        RatVec v = RatVec::Zero(n);
        v(0) = -1;
        cs.emplace_back(AffineForm(std::move(v), Rat(1)), Rel::LE);  // m >= 1
      }
      for (const auto& cc : cell.constraints()) {
        // f(z/m) REL 0 scaled by m > 0: coeffs.z + const*m REL 0
        RatVec v = RatVec::Zero(n);
        v(0) = cc.form.constant();
        for (int i = 0; i < k; ++i) v(1 + i) = cc.form.coeff(i);
        cs.emplace_back(AffineForm(std::move(v), Rat(0)), cc.rel);
      }
      for (int d = 0; d < nd; ++d) {
        const AffineForm& rho = b.discs()[d].radius;
        RatVec v1 = RatVec::Zero(n);
        v1(0) = -rho.constant();
        for (int i = 0; i < k; ++i) v1(1 + i) = -rho.coeff(i);
        v1(1 + k + d) = 1;
        cs.emplace_back(AffineForm(std::move(v1), Rat(0)), Rel::LE);
        RatVec v2 = RatVec::Zero(n);
        v2(0) = rho.constant();
        for (int i = 0; i < k; ++i) v2(1 + i) = rho.coeff(i);
        v2(1 + k + d) = -1;
        cs.emplace_back(AffineForm(std::move(v2), Rat(-1)), Rel::LT);
      }
      cells.emplace_back(std::move(cs), n);
    }
    SemilinearSet region(std::move(cells), n);
    AffineForm t_form = AffineForm::coordinate(n, 0);
    RatVec lv = RatVec::Zero(n);
    lv(0) = -b.omega_f().constant();
    for (int i = 0; i < k; ++i) lv(1 + i) = -b.omega_f().coeff(i);
    for (int d = 0; d < nd; ++d) lv(1 + k + d) = -1;
    AffineForm l_form(std::move(lv), Rat(0));
    GenSum g = gen_sum(region, t_form, l_form, SmallMode::PosT);
    VClass scale = b.cls() * VClass::gm().pow(b.n_pure()) * c;
    for (const auto& term : g) {
      if (!is_integer(term.exp.l))
        throw NonIntegralExponent("zeta: non-integral L-exponent");
      TForm piece = TForm::monomial(
          scale * term.coeff *
              VClass(1).mul_L(static_cast<int>(to_long(num(term.exp.l)))),
          term.exp.t);
      PureLKey key;
      for (const auto& [v, mult] : term.dens) {
        if (!is_integer(v.l))
          throw NonIntegralExponent("zeta: non-integral denominator exponent");
        int a = static_cast<int>(to_long(num(v.l)));
        if (v.t == 0) {
          key.factors.push_back({a, mult});
        } else {
          piece.add_den_factor(a, v.t, mult);
        }
      }
      std::sort(key.factors.begin(), key.factors.end());
      auto it = groups.find(key);
      if (it == groups.end())
        groups.emplace(std::move(key), std::move(piece));
      else
        it->second = it->second + piece;
    }
  }
  // common pure-L denominator across groups
  std::map<int, int> common;
  for (const auto& [key, f] : groups)
    for (const auto& [a, m] : key.factors)
      common[a] = std::max(common[a], m);
  TForm total;
  for (const auto& [key, f] : groups) {
    std::map<int, int> extra = common;
    for (const auto& [a, m] : key.factors) extra[a] -= m;
    TForm scaled = f;
    for (const auto& [a, m] : extra) {
      VClass factor = VClass(1) - VClass(1).mul_L(a);  // 1 - L^a
      for (int i = 0; i < m; ++i) scaled = scaled * factor;
    }
    total = total + scaled;
  }
  // divide the pure-L factors out of every numerator coefficient
  TForm result;
  for (const auto& [e, v] : total.num()) {
    VClass w = v;
    for (const auto& [a, m] : common)
      for (int i = 0; i < m; ++i) w = exact_div_one_minus_L(w, a);
    if (!w.is_zero()) result = result + TForm::monomial(w, e);
  }
  for (const auto& [f, m] : total.den())
    result.add_den_factor(f.first, f.second, m);
  if (!result.is_dagger())
    throw std::logic_error("zeta: result escaped the dagger family");
  return result;
}

VClass neg_lim_zeta(const RVClass& x) {
  VClass via_zeta = zeta(x).neg_lim();
  VClass via_retraction = e_diamond(x);
  if (!(via_zeta == via_retraction))
    throw DualPathMismatch("neg_lim(zeta) disagrees with the retraction: " +
                           via_zeta.to_string() + " vs " +
                           via_retraction.to_string());
  return via_zeta;
}

// ------------------------------------------------------------------ fubini

VClass fubini_volume(
    const std::vector<std::pair<SemilinearSet, VClass>>& pieces, int n) {
  for (size_t i = 0; i < pieces.size(); ++i)
    for (size_t j = i + 1; j < pieces.size(); ++j) {
      if (!pieces[i].first.intersect(pieces[j].first).is_empty())
        throw OverlappingPieces("fubini_volume: pieces " + std::to_string(i) +
                                " and " + std::to_string(j) + " overlap");
    }
  VClass out;
  for (const auto& [e, v] : pieces) {
    int chi = e.chi_b();
    if (chi == 0) continue;
    out += v * VClass::gm().pow(n) * Rat(chi);
  }
  return out;
}

// ------------------------------------------------------------------ refine

RVClass refine(const RVClass& x, unsigned seed) {
  if (x.is_zero()) return x;
  std::mt19937 rng(seed);
  RVClass cur = x;
  int ops = 1 + static_cast<int>(rng() % 3);
  for (int step = 0; step < ops; ++step) {
    const auto& terms = cur.terms();
    if (terms.empty()) break;
    size_t pick = rng() % terms.size();
    Rat coeff = terms[pick].first;
    Block blk = terms[pick].second;
    RVClass rest;
    for (size_t i = 0; i < terms.size(); ++i)
      if (i != pick) rest = rest + RVClass::from_block(terms[i].second, terms[i].first);
    bool did = false;
    if (rng() % 2 == 0 && blk.P().ambient_dim() > 0) {
      // hyperplane split of P through a point near the sample
      int n = blk.P().ambient_dim();
      RatVec c = RatVec::Zero(n);
      for (int i = 0; i < n; ++i) c(i) = Rat(static_cast<long>(rng() % 5)) - 2;
      bool nonzero = false;
      for (int i = 0; i < n; ++i) nonzero = nonzero || c(i) != 0;
      if (nonzero) {
        SemilinearSet norm = blk.P().normalize();
        if (!norm.cells().empty()) {
          RatVec sample = norm.cells()[rng() % norm.cells().size()].cyl()->sample();
          Rat offset = -c.dot(sample);
          AffineForm h(c, offset);
          RVClass split;
          for (auto rel : {Rel::LT, Rel::EQ}) {
            SemilinearSet part = blk.P().restrict(LinConstraint(h, rel));
            if (!part.is_empty())
              split = split + RVClass::from_block(
                                  Block(blk.cls(), blk.res_dim(), part,
                                        blk.omega_f(), blk.discs()),
                                  coeff);
          }
          SemilinearSet part = blk.P().restrict(LinConstraint(-h, Rel::LT));
          if (!part.is_empty())
            split = split + RVClass::from_block(
                                Block(blk.cls(), blk.res_dim(), part,
                                      blk.omega_f(), blk.discs()),
                                coeff);
          cur = rest + split;
          did = true;
        }
      }
    }
    if (!did) {
      // formal split of the class coefficient
      VClass c1 = blk.cls() + VClass(1);
      VClass c2 = VClass(-1);
      RVClass split =
          RVClass::from_block(Block(c1, blk.res_dim(), blk.P(), blk.omega_f(),
                                    blk.discs()),
                              coeff) +
          RVClass::from_block(Block(c2, blk.res_dim(), blk.P(), blk.omega_f(),
                                    blk.discs()),
                              coeff);
      cur = rest + split;
    }
  }
  return cur;
}

}  // namespace motint
