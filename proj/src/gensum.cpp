#include "motint/gensum.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace motint {

// ------------------------------------------------------------------ QPoly

void QPoly::add_term(std::vector<int> e, const Rat& c) {
  while (!e.empty() && e.back() == 0) e.pop_back();
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (c != 0) terms_.emplace(std::move(e), c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

QPoly QPoly::from_affine(const AffineForm& a) {
  QPoly p;
  for (int i = 0; i < a.dim(); ++i)
    if (a.coeff(i) != 0) {
      std::vector<int> e(i + 1, 0);
      e[i] = 1;
      p.add_term(std::move(e), a.coeff(i));
    }
  if (a.constant() != 0) p.add_term({}, a.constant());
  return p;
}

int QPoly::degree_in(int j) const {
  int d = 0;
  for (const auto& [e, c] : terms_)
    if (static_cast<int>(e.size()) > j) d = std::max(d, e[j]);
  return d;
}

QPoly QPoly::operator+(const QPoly& o) const {
  QPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

QPoly QPoly::operator-(const QPoly& o) const {
  QPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

QPoly QPoly::operator*(const QPoly& o) const {
  QPoly r;
  for (const auto& [e1, c1] : terms_)
    for (const auto& [e2, c2] : o.terms_) {
      std::vector<int> e(std::max(e1.size(), e2.size()), 0);
      for (size_t i = 0; i < e1.size(); ++i) e[i] += e1[i];
      for (size_t i = 0; i < e2.size(); ++i) e[i] += e2[i];
      r.add_term(std::move(e), c1 * c2);
    }
  return r;
}

QPoly QPoly::operator*(const Rat& s) const {
  QPoly r;
  if (s == 0) return r;
  for (const auto& [e, c] : terms_) r.terms_[e] = c * s;
  return r;
}

QPoly QPoly::substitute(int j, const AffineForm& a) const {
  QPoly lin = QPoly::from_affine(a);
  QPoly r;
  for (const auto& [e, c] : terms_) {
    int d = static_cast<int>(e.size()) > j ? e[j] : 0;
    std::vector<int> rest = e;
    if (static_cast<int>(rest.size()) > j) rest[j] = 0;
    QPoly piece;
    piece.add_term(rest, c);
    for (int i = 0; i < d; ++i) piece = piece * lin;
    r = r + piece;
  }
  return r;
}

QPoly QPoly::shift_var(int j, const Rat& delta) const {
  AffineForm a = AffineForm::coordinate(j + 1, j);
  a.constant() = delta;
  return substitute(j, a);
}

// ------------------------------------------------------------------ engine

namespace {

bool is_small(const XExp& v, SmallMode mode) {
  if (mode == SmallMode::PosT) return v.t > 0 || (v.t == 0 && v.l < 0);
  return v.t < 0 || (v.t == 0 && v.l < 0);
}

struct Cong {
  std::vector<Int> coeffs;  // over the full variable space
  Int mod;                  // > 1
  Int rem;                  // in [0, mod)
};

struct VarState {
  Int stride = 1;  // original z_j = offset + stride * (current free var)
  Int offset = 0;
};

struct Term {
  QPoly poly;
  AffineForm t_exp, l_exp;  // over the current free variables
  std::map<XExp, int> dens;
  std::vector<Cong> congs;
  std::vector<VarState> vars;
};

struct SplitRequest {
  AffineForm form;  // split the region by form >= 0 vs form < 0 (z-space)
};

struct EngineError : std::logic_error {
  using std::logic_error::logic_error;
};

Int rat_to_int(const Rat& r) {
  if (!is_integer(r)) throw EngineError("expected integral value");
  return num(r);
}

class CellSummer {
 public:
  CellSummer(const CylCell& cell, const AffineForm& t_form,
             const AffineForm& l_form, SmallMode mode)
      : cell_(cell), n_(cell.ambient_dim()), mode_(mode) {
    Term t;
    t.poly = QPoly(Rat(1));
    t.t_exp = t_form.lift(n_);
    t.l_exp = l_form.lift(n_);
    t.vars.assign(n_, VarState{});
    terms_.push_back(std::move(t));
  }

  std::optional<SplitRequest> run(GenSum& out) {
    for (int j = n_ - 1; j >= 0; --j) {
      std::vector<Term> next;
      for (auto& t : terms_) {
        if (t.poly.is_zero()) continue;
        auto split = eliminate(std::move(t), j, next);
        if (split) return split;
      }
      terms_ = std::move(next);
    }
    for (const auto& t : terms_) {
      if (t.poly.is_zero()) continue;
      GTerm g;
      g.coeff = t.poly.constant_value();
      g.exp = XExp{t.t_exp.constant(), t.l_exp.constant()};
      g.dens = t.dens;
      if (g.coeff != 0) out.push_back(std::move(g));
    }
    return std::nullopt;
  }

 private:
  const CylCell& cell_;
  int n_;
  SmallMode mode_;
  std::vector<Term> terms_;

  // A z-space affine form rewritten in the term's free variables.
  AffineForm pullback(const Term& t, const AffineForm& f) const {
    RatVec c = RatVec::Zero(n_);
    Rat cst = f.constant();
    for (int i = 0; i < f.dim(); ++i) {
      if (f.coeff(i) == 0) continue;
      c(i) += f.coeff(i) * Rat(t.vars[i].stride);
      cst += f.coeff(i) * Rat(t.vars[i].offset);
    }
    return AffineForm(std::move(c), std::move(cst));
  }

  AffineForm to_z_space(const Term& t, const AffineForm& f) const {
    RatVec c = RatVec::Zero(n_);
    Rat cst = f.constant();
    for (int i = 0; i < n_; ++i) {
      if (i >= f.dim() || f.coeff(i) == 0) continue;
      c(i) = f.coeff(i) / Rat(t.vars[i].stride);
      cst -= f.coeff(i) * Rat(t.vars[i].offset) / Rat(t.vars[i].stride);
    }
    return AffineForm(std::move(c), std::move(cst));
  }

  static AffineForm subst_affine(const AffineForm& f, int k,
                                 const AffineForm& a) {
    if (k >= f.dim() || f.coeff(k) == 0) return f;
    Rat ck = f.coeff(k);
    AffineForm r = f;
    r.coeff(k) = 0;
    return r + a.lift(f.dim()) * ck;
  }

  // Replace free var k by rho + m * (new free var k) everywhere in the term.
  static void refine_var(Term& t, int k, const Int& rho, const Int& m) {
    AffineForm a = AffineForm::coordinate(k + 1, k) * Rat(m);
    a.constant() = Rat(rho);
    t.poly = t.poly.substitute(k, a);
    t.t_exp = subst_affine(t.t_exp, k, a);
    t.l_exp = subst_affine(t.l_exp, k, a);
    for (auto& c : t.congs) {
      if (static_cast<int>(c.coeffs.size()) <= k || c.coeffs[k] == 0) continue;
      Int ck = c.coeffs[k];
      c.coeffs[k] = ck * m;
      Int r = c.rem - ck * rho;
      mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), c.mod.get_mpz_t());
      c.rem = r;
    }
    t.vars[k].offset += t.vars[k].stride * rho;
    t.vars[k].stride *= m;
  }

  // Resolve congruences mentioning var j, yielding terms whose var j carries
  // a plain progression (recorded in vars[j]).
  void resolve_congs(Term t, int j, std::vector<Term>& out) {
    int ci = -1;
    for (size_t i = 0; i < t.congs.size(); ++i) {
      const auto& c = t.congs[i];
      if (static_cast<int>(c.coeffs.size()) > j && c.coeffs[j] % c.mod != 0) {
        ci = static_cast<int>(i);
        break;
      }
    }
    if (ci < 0) {
      out.push_back(std::move(t));
      return;
    }
    Cong c = t.congs[ci];
    t.congs.erase(t.congs.begin() + ci);
    for (int k = 0; k < n_; ++k) {
      if (k == j || static_cast<int>(c.coeffs.size()) <= k) continue;
      if (c.coeffs[k] % c.mod == 0) continue;
      Int m = c.mod;
      Int ck = c.coeffs[k];
      for (Int rho = 0; rho < m; ++rho) {
        Term t2 = t;
        refine_var(t2, k, rho, m);
        Cong c2 = c;
        c2.coeffs[k] = ck * m;
        Int r = c2.rem - ck * rho;
        mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), c2.mod.get_mpz_t());
        c2.rem = r;
        t2.congs.push_back(std::move(c2));
        resolve_congs(std::move(t2), j, out);
      }
      return;
    }
    // only var j appears: a*y_j == rem (mod M)
    Int a = c.coeffs[j] % c.mod, m = c.mod, r = c.rem;
    if (a < 0) a += m;
    Int g = gcd_int(a, m);
    if (r % g != 0) return;  // no admissible residue: term vanishes
    Int m2 = m / g, a2 = a / g, r2 = r / g;
    Int inv;
    if (mpz_invert(inv.get_mpz_t(), a2.get_mpz_t(), m2.get_mpz_t()) == 0) {
      if (m2 == 1)
        inv = 0;
      else
        throw EngineError("congruence inversion failed");
    }
    Int t0 = (r2 * inv) % m2;
    if (t0 < 0) t0 += m2;
    refine_var(t, j, t0, m2);
    resolve_congs(std::move(t), j, out);
  }

  // The bound form for var j: (zform(z_<j) - offset_j)/stride_j in the free
  // variables.  Splits the term until all variable coefficients of that form
  // are integral.
  void integerize_bound(Term t, int j, const AffineForm& zform,
                        std::vector<Term>& out) {
    AffineForm f = pullback(t, zform);
    Rat kj = Rat(t.vars[j].stride);
    for (int k = 0; k < n_; ++k) {
      if (k == j || k >= f.dim()) continue;
      Rat ck = f.coeff(k) / kj;
      if (ck == 0 || is_integer(ck)) continue;
      Int m = den(ck);
      for (Int rho = 0; rho < m; ++rho) {
        Term t2 = t;
        refine_var(t2, k, rho, m);
        integerize_bound(std::move(t2), j, zform, out);
      }
      return;
    }
    out.push_back(std::move(t));
  }

  AffineForm lower_int_bound(const Term& t, int j, const AffineForm& zlo) const {
    AffineForm num = pullback(t, zlo);
    num.constant() -= Rat(t.vars[j].offset);
    AffineForm q = num * (Rat(1) / Rat(t.vars[j].stride));
    RatVec c = q.coeffs();
    for (int i = 0; i < c.size(); ++i)
      if (c(i) != 0 && !is_integer(c(i)))
        throw EngineError("bound not integral after refinement");
    Rat cst = Rat(floor_rat(q.constant())) + 1;  // first integer > q
    return AffineForm(std::move(c), std::move(cst));
  }

  AffineForm upper_int_bound(const Term& t, int j, const AffineForm& zhi) const {
    AffineForm num = pullback(t, zhi);
    num.constant() -= Rat(t.vars[j].offset);
    AffineForm q = num * (Rat(1) / Rat(t.vars[j].stride));
    RatVec c = q.coeffs();
    for (int i = 0; i < c.size(); ++i)
      if (c(i) != 0 && !is_integer(c(i)))
        throw EngineError("bound not integral after refinement");
    Rat cst = Rat(ceil_rat(q.constant())) - 1;  // last integer < q
    return AffineForm(std::move(c), std::move(cst));
  }

  void divide_one_minus(Term& t, const XExp& step) {
    if (is_small(step, mode_)) {
      t.dens[step] += 1;
      return;
    }
    XExp w = -step;
    if (!is_small(w, mode_))
      throw EngineError("denominator direction not orientable");
    // 1/(1 - X^v) = -X^{-v}/(1 - X^{-v})
    t.poly = t.poly * Rat(-1);
    t.t_exp.constant() += w.t;
    t.l_exp.constant() += w.l;
    t.dens[w] += 1;
  }

  // Formal tail sum over u >= x of P(u) q^u, with q = X^step, x affine.
  void tail(const Term& base, int j, const XExp& step, const AffineForm& x,
            std::vector<Term>& out, const Rat& sign) {
    const QPoly& p = base.poly;
    if (p.is_zero()) return;
    {
      Term piece = base;
      piece.poly = p.substitute(j, x) * sign;
      piece.t_exp = subst_affine(piece.t_exp, j, x);
      piece.l_exp = subst_affine(piece.l_exp, j, x);
      divide_one_minus(piece, step);
      out.push_back(std::move(piece));
    }
    if (p.degree_in(j) == 0) return;
    Term rec = base;
    rec.poly = p - p.shift_var(j, Rat(-1));  // P(u) - P(u-1)
    AffineForm x1 = x;
    x1.constant() += 1;
    std::vector<Term> inner;
    tail(rec, j, step, x1, inner, sign);
    for (auto& t : inner) {
      divide_one_minus(t, step);
      out.push_back(std::move(t));
    }
  }

  // Exact finite sum over u in [a, b] with zero exponent step: polynomial in
  // the outer variables.
  static QPoly faulhaber(const QPoly& p, int j, const AffineForm& a,
                         const AffineForm& b) {
    int d = p.degree_in(j);
    std::vector<QPoly> fk(d + 1);  // F_k(x) = sum_{u=0}^{x} u^k
    for (int k = 0; k <= d; ++k) {
      std::vector<Rat> values(k + 2);
      Rat run = 0;
      for (int x = 0; x <= k + 1; ++x) {
        Rat uk = 1;
        for (int e = 0; e < k; ++e) uk *= x;
        run += uk;
        values[x] = run;
      }
      QPoly poly;
      for (int i = 0; i <= k + 1; ++i) {
        QPoly term(values[i]);
        Rat denom = 1;
        for (int m = 0; m <= k + 1; ++m) {
          if (m == i) continue;
          term = term * (QPoly::variable(j) + QPoly(Rat(-m)));
          denom *= Rat(i - m);
        }
        poly = poly + term * (1 / denom);
      }
      fk[k] = std::move(poly);
    }
    QPoly result;
    AffineForm am1 = a;
    am1.constant() -= 1;
    for (const auto& [e, c] : p.terms()) {
      int k = static_cast<int>(e.size()) > j ? e[j] : 0;
      std::vector<int> rest = e;
      if (static_cast<int>(rest.size()) > j) rest[j] = 0;
      QPoly outer(Rat(1));
      for (size_t v = 0; v < rest.size(); ++v)
        for (int e2 = 0; e2 < rest[v]; ++e2)
          outer = outer * QPoly::variable(static_cast<int>(v));
      outer = outer * c;
      QPoly diff = fk[k].substitute(j, b) - fk[k].substitute(j, am1);
      result = result + outer * diff;
    }
    return result;
  }

  std::optional<SplitRequest> eliminate(Term t0, int j,
                                        std::vector<Term>& out) {
    const CylLevel& level = cell_.levels[j];
    std::vector<Term> resolved;
    resolve_congs(std::move(t0), j, resolved);

    if (level.is_section) {
      for (auto& r : resolved) {
        AffineForm num = pullback(r, level.section);
        num.constant() -= Rat(r.vars[j].offset);
        AffineForm phi = num * (Rat(1) / Rat(r.vars[j].stride));
        if (phi.dim() > j && phi.coeff(j) != 0)
          throw EngineError("section references its own variable");
        Int d = den(phi.constant());
        for (int i = 0; i < phi.dim(); ++i)
          if (i != j) d = lcm_int(d, den(phi.coeff(i)));
        if (d > 1) {
          Cong c;
          c.coeffs.assign(n_, 0);
          bool varying = false;
          for (int i = 0; i < phi.dim(); ++i) {
            if (i == j) continue;
            c.coeffs[i] = rat_to_int(phi.coeff(i) * Rat(d));
            if (c.coeffs[i] % d != 0) varying = true;
          }
          Int rhs = -rat_to_int(phi.constant() * Rat(d));
          c.mod = d;
          mpz_fdiv_r(rhs.get_mpz_t(), rhs.get_mpz_t(), d.get_mpz_t());
          c.rem = rhs;
          if (!varying) {
            if (c.rem != 0) continue;  // the section misses the lattice
          } else {
            r.congs.push_back(std::move(c));
          }
        }
        r.poly = r.poly.substitute(j, phi);
        r.t_exp = subst_affine(r.t_exp, j, phi);
        r.l_exp = subst_affine(r.l_exp, j, phi);
        for (auto& c : r.congs) {
          if (static_cast<int>(c.coeffs.size()) <= j || c.coeffs[j] == 0)
            continue;
          Int cj = c.coeffs[j];
          c.coeffs[j] = 0;
          Int dd = den(phi.constant());
          for (int i = 0; i < phi.dim(); ++i)
            dd = lcm_int(dd, den(phi.coeff(i)));
          for (auto& cc : c.coeffs) cc *= dd;
          for (int i = 0; i < phi.dim(); ++i) {
            if (i == j) continue;
            c.coeffs[i] += cj * rat_to_int(phi.coeff(i) * Rat(dd));
          }
          Int rhs = c.rem * dd - cj * rat_to_int(phi.constant() * Rat(dd));
          c.mod = c.mod * dd;
          mpz_fdiv_r(rhs.get_mpz_t(), rhs.get_mpz_t(), c.mod.get_mpz_t());
          c.rem = rhs;
        }
        out.push_back(std::move(r));
      }
      return std::nullopt;
    }

    // sector level
    std::vector<Term> ready;
    for (auto& r0 : resolved) {
      std::vector<Term> tmp;
      if (level.lo)
        integerize_bound(std::move(r0), j, *level.lo, tmp);
      else
        tmp.push_back(std::move(r0));
      for (auto& r1 : tmp) {
        if (level.hi)
          integerize_bound(std::move(r1), j, *level.hi, ready);
        else
          ready.push_back(std::move(r1));
      }
    }
    for (auto& r : ready) {
      XExp step{j < r.t_exp.dim() ? r.t_exp.coeff(j) : Rat(0),
                j < r.l_exp.dim() ? r.l_exp.coeff(j) : Rat(0)};
      if (level.lo && level.hi) {
        AffineForm a = lower_int_bound(r, j, *level.lo);
        AffineForm b = upper_int_bound(r, j, *level.hi);
        AffineForm width = b - a;  // integer-valued; empty iff < 0
        if (width.is_constant()) {
          if (width.constant() < 0) continue;
        } else {
          CylCell prefix_cell;
          prefix_cell.levels.assign(cell_.levels.begin(),
                                    cell_.levels.begin() + j);
          auto cs = prefix_cell.constraints();
          AffineForm wz = to_z_space(r, width);
          FMInterval itv = fm_range(cs, j, wz.truncate(j));
          if (itv.empty) continue;
          bool maybe_neg = !itv.lo || *itv.lo < 0;
          bool maybe_nonneg = !itv.hi || *itv.hi >= 0;
          if (maybe_neg && maybe_nonneg) return SplitRequest{wz.truncate(j)};
          if (!maybe_nonneg) continue;  // empty on the whole cell
        }
        if (step.is_zero()) {
          Term piece = r;
          piece.poly = faulhaber(r.poly, j, a, b);
          out.push_back(std::move(piece));
        } else {
          tail(r, j, step, a, out, Rat(1));
          AffineForm b1 = b;
          b1.constant() += 1;
          tail(r, j, step, b1, out, Rat(-1));
        }
        continue;
      }
      if (level.lo) {  // [A, infinity)
        if (step.is_zero() || !is_small(step, mode_)) {
          std::ostringstream os;
          os << "divergent sum: unbounded direction at level " << j
             << " with step T^" << rat_to_string(step.t) << " L^"
             << rat_to_string(step.l);
          throw DivergentSum(os.str());
        }
        AffineForm a = lower_int_bound(r, j, *level.lo);
        tail(r, j, step, a, out, Rat(1));
        continue;
      }
      if (level.hi) {  // (-infinity, B]
        XExp rstep = -step;
        if (step.is_zero() || !is_small(rstep, mode_)) {
          std::ostringstream os;
          os << "divergent sum: downward-unbounded direction at level " << j;
          throw DivergentSum(os.str());
        }
        AffineForm b = upper_int_bound(r, j, *level.hi);
        Term neg = r;
        AffineForm minus = AffineForm::coordinate(n_, j) * Rat(-1);
        neg.poly = neg.poly.substitute(j, minus);
        neg.t_exp = subst_affine(neg.t_exp, j, minus);
        neg.l_exp = subst_affine(neg.l_exp, j, minus);
        tail(neg, j, rstep, b * Rat(-1), out, Rat(1));
        continue;
      }
      throw DivergentSum("divergent sum: full-line direction at level " +
                         std::to_string(j));
    }
    return std::nullopt;
  }
};

}  // namespace

GenSum gen_sum(const SemilinearSet& region, const AffineForm& t_form,
               const AffineForm& l_form, SmallMode mode) {
  int n = region.ambient_dim();
  std::vector<std::vector<LinConstraint>> work;
  for (const auto& c : region.cells()) work.push_back(c.constraints());
  GenSum out;
  int guard = 0;
  while (!work.empty()) {
    if (++guard > 4096)
      throw std::runtime_error("gen_sum: region splitting failed to settle");
    std::vector<LinConstraint> sys = std::move(work.back());
    work.pop_back();
    auto cells = decompose_union({sys}, n);
    for (const auto& cell : cells) {
      CellSummer summer(cell, t_form, l_form, mode);
      GenSum local;
      auto split = summer.run(local);
      if (split) {
        auto base = cell.constraints();
        AffineForm f = split->form.lift(n);
        auto lo_side = base;
        lo_side.emplace_back(f * Rat(-1), Rel::LE);  // f >= 0
        auto hi_side = base;
        hi_side.emplace_back(f, Rel::LT);  // f < 0
        work.push_back(std::move(lo_side));
        work.push_back(std::move(hi_side));
        continue;
      }
      out.insert(out.end(), local.begin(), local.end());
    }
  }
  // fold identical shapes
  using DenKey = std::vector<std::pair<std::pair<Rat, Rat>, int>>;
  std::map<std::pair<std::pair<Rat, Rat>, DenKey>, Rat> acc;
  for (const auto& g : out) {
    DenKey dkey;
    for (const auto& [e, m] : g.dens) dkey.push_back({{e.t, e.l}, m});
    acc[{{g.exp.t, g.exp.l}, dkey}] += g.coeff;
  }
  GenSum folded;
  for (const auto& [key, c] : acc) {
    if (c == 0) continue;
    GTerm g;
    g.coeff = c;
    g.exp = XExp{key.first.first, key.first.second};
    for (const auto& [e, m] : key.second) g.dens[XExp{e.first, e.second}] = m;
    folded.push_back(std::move(g));
  }
  return folded;
}

GenSum lattice_sum(const SemilinearSet& s, const AffineForm& sigma, long m) {
  if (m <= 0) throw std::invalid_argument("lattice_sum: m must be positive");
  int n = s.ambient_dim();
  if (auto dir = bad_recession_direction(s, sigma)) {
    std::ostringstream os;
    os << "divergent sum: sigma has nonpositive slope along direction (";
    for (int i = 0; i < dir->size(); ++i) {
      if (i) os << ", ";
      os << rat_to_string((*dir)(i));
    }
    os << ")";
    throw DivergentSum(os.str());
  }
  std::vector<Cell> cells;
  for (const auto& c : s.cells()) {
    std::vector<LinConstraint> cs;
    for (const auto& cc : c.constraints()) {
      RatVec v = cc.form.coeffs() / Rat(m);
      cs.emplace_back(AffineForm(std::move(v), cc.form.constant()), cc.rel);
    }
    cells.emplace_back(std::move(cs), n);
  }
  SemilinearSet region(std::move(cells), n);
  RatVec tc = -sigma.coeffs();
  AffineForm t_form(std::move(tc), -sigma.constant() * m);
  return gen_sum(region, t_form, AffineForm(n), SmallMode::NegT);
}

Int gensum_exponent_denominator(const GenSum& g) {
  Int l = 1;
  for (const auto& t : g) {
    l = lcm_int(l, den(t.exp.t));
    for (const auto& [v, m] : t.dens) l = lcm_int(l, den(v.t));
  }
  return l;
}

std::map<Rat, Rat> gensum_coeffs_above(const GenSum& g, const Rat& bound) {
  std::map<Rat, Rat> out;
  for (const auto& term : g) {
    if (term.exp.l != 0)
      throw std::logic_error("gensum_coeffs_above: nonzero L-exponent");
    std::map<Rat, Rat> acc{{term.exp.t, term.coeff}};
    for (const auto& [v, mult] : term.dens) {
      if (v.l != 0)
        throw std::logic_error("gensum_coeffs_above: L in denominator");
      if (!(v.t < 0))
        throw std::logic_error("gensum_coeffs_above: non-descending factor");
      for (int rep = 0; rep < mult; ++rep) {
        std::map<Rat, Rat> next;
        for (const auto& [e, c] : acc) {
          for (Rat add = 0; e + add * v.t >= -bound; add += 1)
            next[e + add * v.t] += c;
        }
        acc = std::move(next);
      }
    }
    for (const auto& [e, c] : acc)
      if (e >= -bound) out[e] += c;
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second == 0)
      it = out.erase(it);
    else
      ++it;
  }
  return out;
}

namespace {

void expand_product(const GTerm& g, const std::map<XExp, int>& extra,
                    std::map<std::pair<Rat, Rat>, Rat>& out) {
  std::map<std::pair<Rat, Rat>, Rat> acc{{{g.exp.t, g.exp.l}, g.coeff}};
  for (const auto& [v, mult] : extra) {
    for (int i = 0; i < mult; ++i) {
      std::map<std::pair<Rat, Rat>, Rat> next;
      for (const auto& [e, c] : acc) {
        next[e] += c;
        next[{e.first + v.t, e.second + v.l}] -= c;
      }
      acc = std::move(next);
    }
  }
  for (const auto& [e, c] : acc) out[e] += c;
}

}  // namespace

bool gensum_equal(const GenSum& a, const GenSum& b) {
  std::map<XExp, int> common;
  for (const auto& g : a)
    for (const auto& [v, m] : g.dens) common[v] = std::max(common[v], m);
  for (const auto& g : b)
    for (const auto& [v, m] : g.dens) common[v] = std::max(common[v], m);
  std::map<std::pair<Rat, Rat>, Rat> pa, pb;
  for (const auto& g : a) {
    std::map<XExp, int> extra = common;
    for (const auto& [v, m] : g.dens) extra[v] -= m;
    expand_product(g, extra, pa);
  }
  for (const auto& g : b) {
    std::map<XExp, int> extra = common;
    for (const auto& [v, m] : g.dens) extra[v] -= m;
    expand_product(g, extra, pb);
  }
  for (auto it = pa.begin(); it != pa.end();) {
    if (it->second == 0)
      it = pa.erase(it);
    else
      ++it;
  }
  for (auto it = pb.begin(); it != pb.end();) {
    if (it->second == 0)
      it = pb.erase(it);
    else
      ++it;
  }
  return pa == pb;
}

std::string gensum_to_string(const GenSum& g) {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : g) {
    if (!first) os << " + ";
    first = false;
    os << rat_to_string(t.coeff) << "*T^" << rat_to_string(t.exp.t);
    if (t.exp.l != 0) os << "*L^" << rat_to_string(t.exp.l);
    for (const auto& [v, m] : t.dens) {
      os << "/(1-T^" << rat_to_string(v.t);
      if (v.l != 0) os << "*L^" << rat_to_string(v.l);
      os << ")";
      if (m > 1) os << "^" << m;
    }
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace motint
