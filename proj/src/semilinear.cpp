#include "motint/semilinear.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace motint {

namespace {

// ---------------------------------------------------------------- FM core

// Eliminates the variable `j` from the system; exact, tracks strictness.
std::vector<LinConstraint> fm_eliminate(const std::vector<LinConstraint>& cs,
                                        int dim, int j) {
  std::vector<LinConstraint> kept;
  std::vector<LinConstraint> eqs, lows, ups;  // classified by coeff sign
  for (const auto& c : cs) {
    const Rat& cj = c.form.coeff(j);
    if (cj == 0) {
      kept.push_back(c);
    } else if (c.rel == Rel::EQ) {
      eqs.push_back(c);
    } else if (cj > 0) {
      ups.push_back(c);  // c.form < 0  =>  x_j < bound
    } else {
      lows.push_back(c);
    }
  }
  auto drop_var = [&](const AffineForm& f) {
    RatVec v = RatVec::Zero(dim - 1);
    int t = 0;
    for (int i = 0; i < dim; ++i)
      if (i != j) v(t++) = f.coeff(i);
    return AffineForm(std::move(v), f.constant());
  };
  std::vector<LinConstraint> out;
  if (!eqs.empty()) {
    // substitute x_j from the first equality into everything else
    const AffineForm& e = eqs[0].form;
    Rat c0 = e.coeff(j);
    auto subst = [&](const AffineForm& f) {
      AffineForm g = f - e * (f.coeff(j) / c0);
      return drop_var(g);
    };
    for (const auto& c : kept) out.emplace_back(drop_var(c.form), c.rel);
    for (size_t i = 1; i < eqs.size(); ++i)
      out.emplace_back(subst(eqs[i].form), Rel::EQ);
    for (const auto& c : lows) out.emplace_back(subst(c.form), c.rel);
    for (const auto& c : ups) out.emplace_back(subst(c.form), c.rel);
    return out;
  }
  for (const auto& c : kept) out.emplace_back(drop_var(c.form), c.rel);
  for (const auto& lo : lows)
    for (const auto& up : ups) {
      // lo.form has negative x_j coeff, up.form positive; cancel x_j
      AffineForm comb = lo.form * up.form.coeff(j) - up.form * lo.form.coeff(j);
      Rel r = (lo.rel == Rel::LT || up.rel == Rel::LT) ? Rel::LT : Rel::LE;
      out.emplace_back(drop_var(comb), r);
    }
  return out;
}

bool constants_feasible(const std::vector<LinConstraint>& cs) {
  for (const auto& c : cs) {
    const Rat& v = c.form.constant();
    switch (c.rel) {
      case Rel::LT:
        if (!(v < 0)) return false;
        break;
      case Rel::LE:
        if (!(v <= 0)) return false;
        break;
      case Rel::EQ:
        if (v != 0) return false;
        break;
    }
  }
  return true;
}

}  // namespace

bool fm_feasible(const std::vector<LinConstraint>& cs, int dim) {
  std::vector<LinConstraint> cur = cs;
  for (int j = dim - 1; j >= 0; --j) cur = fm_eliminate(cur, j + 1, j);
  return constants_feasible(cur);
}

FMInterval fm_range(const std::vector<LinConstraint>& cs, int dim,
                    const AffineForm& objective) {
  // introduce t as variable index `dim`, constrained t = objective
  std::vector<LinConstraint> cur;
  for (const auto& c : cs) cur.emplace_back(c.form.lift(dim + 1), c.rel);
  RatVec tc = RatVec::Zero(dim + 1);
  for (int i = 0; i < dim; ++i) tc(i) = -objective.coeff(i);
  tc(dim) = 1;
  cur.emplace_back(AffineForm(std::move(tc), -objective.constant()), Rel::EQ);
  // eliminate the original variables, keeping t (now index shifts as we go)
  for (int j = dim - 1; j >= 0; --j) cur = fm_eliminate(cur, j + 2, j);
  FMInterval out;
  for (const auto& c : cur) {
    Rat a = c.form.coeff(0), b = c.form.constant();
    if (a == 0) {
      bool ok = (c.rel == Rel::EQ) ? (b == 0)
                                   : (c.rel == Rel::LT ? b < 0 : b <= 0);
      if (!ok) {
        out.empty = true;
        return out;
      }
      continue;
    }
    if (c.rel == Rel::EQ) {
      Rat v = -b / a;
      if ((out.lo && (*out.lo > v || (*out.lo == v && out.lo_strict))) ||
          (out.hi && (*out.hi < v || (*out.hi == v && out.hi_strict)))) {
        out.empty = true;
        return out;
      }
      out.lo = out.hi = v;
      out.lo_strict = out.hi_strict = false;
      continue;
    }
    Rat bound = -b / a;
    bool strict = (c.rel == Rel::LT);
    if (a > 0) {  // t <(=) bound
      if (!out.hi || bound < *out.hi || (bound == *out.hi && strict))
        out.hi = bound, out.hi_strict = strict;
    } else {
      if (!out.lo || bound > *out.lo || (bound == *out.lo && strict))
        out.lo = bound, out.lo_strict = strict;
    }
  }
  if (out.lo && out.hi &&
      (*out.lo > *out.hi ||
       (*out.lo == *out.hi && (out.lo_strict || out.hi_strict))))
    out.empty = true;
  return out;
}

// ---------------------------------------------------------------- CylCell

RatVec CylCell::sample() const {
  RatVec x(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) {
    const CylLevel& l = levels[i];
    RatVec pre = x.head(i);
    if (l.is_section) {
      x(i) = l.section.eval(pre);
    } else if (l.lo && l.hi) {
      x(i) = (l.lo->eval(pre) + l.hi->eval(pre)) / 2;
    } else if (l.lo) {
      x(i) = l.lo->eval(pre) + 1;
    } else if (l.hi) {
      x(i) = l.hi->eval(pre) - 1;
    } else {
      x(i) = 0;
    }
  }
  return x;
}

bool CylCell::contains(const RatVec& x) const {
  for (int i = 0; i < ambient_dim(); ++i) {
    const CylLevel& l = levels[i];
    RatVec pre = x.head(i);
    if (l.is_section) {
      if (x(i) != l.section.eval(pre)) return false;
    } else {
      if (l.lo && !(x(i) > l.lo->eval(pre))) return false;
      if (l.hi && !(x(i) < l.hi->eval(pre))) return false;
    }
  }
  return true;
}

std::vector<LinConstraint> CylCell::constraints() const {
  std::vector<LinConstraint> cs;
  int k = ambient_dim();
  for (int i = 0; i < k; ++i) {
    const CylLevel& l = levels[i];
    AffineForm xi = AffineForm::coordinate(k, i);
    if (l.is_section) {
      cs.emplace_back(xi - l.section.lift(k), Rel::EQ);
    } else {
      if (l.lo) cs.emplace_back(l.lo->lift(k) - xi, Rel::LT);
      if (l.hi) cs.emplace_back(xi - l.hi->lift(k), Rel::LT);
    }
  }
  return cs;
}

std::vector<RatVec> CylCell::closure_vertices() const {
  std::vector<RatVec> verts;
  verts.push_back(RatVec(0));
  for (int i = 0; i < ambient_dim(); ++i) {
    const CylLevel& l = levels[i];
    std::vector<RatVec> next;
    for (const auto& p : verts) {
      auto extend = [&](const Rat& v) {
        RatVec q(i + 1);
        q.head(i) = p;
        q(i) = v;
        next.push_back(std::move(q));
      };
      if (l.is_section) {
        extend(l.section.eval(p));
      } else {
        if (l.lo) extend(l.lo->eval(p));
        if (l.hi) extend(l.hi->eval(p));
      }
    }
    verts = std::move(next);
  }
  std::sort(verts.begin(), verts.end(), [](const RatVec& a, const RatVec& b) {
    for (int i = 0; i < a.size(); ++i)
      if (a(i) != b(i)) return a(i) < b(i);
    return false;
  });
  verts.erase(std::unique(verts.begin(), verts.end(),
                          [](const RatVec& a, const RatVec& b) {
                            return a == b;
                          }),
              verts.end());
  return verts;
}

int CylCell::chi_b_value() const {
  int v = 1;
  for (const auto& l : levels) {
    if (l.is_section) continue;
    if (l.lo && l.hi)
      v = -v;
    else if (!l.lo && !l.hi)
      ;  // full line: multiplier 1
    else
      return 0;
  }
  return v;
}

// ---------------------------------------------------------------- Cell

Cell Cell::from_cyl(const CylCell& c) {
  Cell out(c.constraints(), c.ambient_dim());
  out.cyl_ = c;
  return out;
}

int Cell::dim() const {
  if (cyl_) return cyl_->dim();
  // rank of the equality part of the closure
  std::vector<std::vector<LinConstraint>> one{constraints_};
  auto cells = decompose_union(one, ambient_dim_);
  int d = -1;
  for (const auto& c : cells) d = std::max(d, c.dim());
  return d < 0 ? 0 : d;
}

// ---------------------------------------------------------------- UniMap

UniMap::UniMap(IntMat m, RatVec shift) : m_(std::move(m)), shift_(std::move(shift)) {
  if (m_.rows() != m_.cols() || shift_.size() != m_.rows())
    throw std::invalid_argument("UniMap: shape mismatch");
  RatMat q(m_.rows(), m_.cols());
  for (int i = 0; i < m_.rows(); ++i)
    for (int j = 0; j < m_.cols(); ++j) q(i, j) = Rat(m_(i, j));
  Rat det = Eigen::FullPivLU<RatMat>(q).determinant();
  if (det != 1 && det != -1)
    throw std::invalid_argument("UniMap: determinant must be +-1");
}

RatVec UniMap::apply(const RatVec& x) const {
  RatVec y = shift_;
  for (int i = 0; i < m_.rows(); ++i)
    for (int j = 0; j < m_.cols(); ++j) y(i) += Rat(m_(i, j)) * x(j);
  return y;
}

UniMap UniMap::inverse() const {
  int k = dim();
  RatMat q(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) q(i, j) = Rat(m_(i, j));
  RatMat inv = Eigen::FullPivLU<RatMat>(q).inverse();
  IntMat mi(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (!is_integer(inv(i, j)))
        throw std::logic_error("UniMap::inverse: non-integral entry");
      mi(i, j) = to_long(num(inv(i, j)));
    }
  RatVec s = -(inv * shift_);
  return UniMap(std::move(mi), std::move(s));
}

// ------------------------------------------------------------ arrangement

namespace {

// Scales so the leading nonzero coefficient is 1 (or the constant for
// constant forms); drops nothing else.
AffineForm canonical_direction(const AffineForm& f) {
  for (int i = 0; i < f.dim(); ++i) {
    if (f.coeff(i) != 0) {
      Rat s = f.coeff(i);
      AffineForm g = f * (1 / s);
      return g;
    }
  }
  return f;
}

void push_unique(std::vector<AffineForm>& v, const AffineForm& f) {
  if (f.is_constant()) return;
  AffineForm c = canonical_direction(f);
  for (const auto& g : v)
    if (g == c) return;
  v.push_back(c);
}

std::vector<CylCell> arrangement(const std::vector<AffineForm>& forms, int k) {
  std::vector<CylCell> out;
  if (k == 0) {
    out.push_back(CylCell{});
    return out;
  }
  std::vector<AffineForm> solved;  // candidate section values for x_{k-1}
  std::vector<AffineForm> base_forms;
  for (const auto& f : forms) {
    if (f.dim() != k) throw std::logic_error("arrangement: dim mismatch");
    if (f.coeff(k - 1) == 0) {
      push_unique(base_forms, f.truncate(k - 1));
      continue;
    }
    Rat c = f.coeff(k - 1);
    RatVec v = RatVec::Zero(k - 1);
    for (int i = 0; i < k - 1; ++i) v(i) = -f.coeff(i) / c;
    AffineForm phi(std::move(v), -f.constant() / c);
    bool seen = false;
    for (const auto& g : solved)
      if (g == phi) {
        seen = true;
        break;
      }
    if (!seen) solved.push_back(phi);
  }
  for (size_t i = 0; i < solved.size(); ++i)
    for (size_t j = i + 1; j < solved.size(); ++j)
      push_unique(base_forms, solved[i] - solved[j]);
  auto base = arrangement(base_forms, k - 1);
  for (const auto& b : base) {
    RatVec s = b.sample();
    std::vector<std::pair<Rat, int>> vals;
    for (size_t i = 0; i < solved.size(); ++i) vals.emplace_back(solved[i].eval(s), static_cast<int>(i));
    std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& bb) {
      if (a.first != bb.first) return a.first < bb.first;
      return a.second < bb.second;
    });
    std::vector<int> reps;  // one representative per distinct value
    for (size_t i = 0; i < vals.size(); ++i)
      if (i == 0 || vals[i].first != vals[i - 1].first)
        reps.push_back(vals[i].second);
    auto emit = [&](CylLevel l) {
      CylCell c = b;
      c.levels.push_back(std::move(l));
      out.push_back(std::move(c));
    };
    if (reps.empty()) {
      emit(CylLevel::make_sector(std::nullopt, std::nullopt));
      continue;
    }
    emit(CylLevel::make_sector(std::nullopt, solved[reps[0]]));
    for (size_t i = 0; i < reps.size(); ++i) {
      emit(CylLevel::make_section(solved[reps[i]]));
      if (i + 1 < reps.size())
        emit(CylLevel::make_sector(solved[reps[i]], solved[reps[i + 1]]));
    }
    emit(CylLevel::make_sector(solved[reps.back()], std::nullopt));
  }
  return out;
}

}  // namespace

std::vector<CylCell> decompose_union(
    const std::vector<std::vector<LinConstraint>>& conjs, int dim) {
  std::vector<AffineForm> forms;
  for (const auto& conj : conjs)
    for (const auto& c : conj) push_unique(forms, c.form);
  auto cells = arrangement(forms, dim);
  std::vector<CylCell> out;
  for (auto& c : cells) {
    RatVec s = c.sample();
    bool in = false;
    for (const auto& conj : conjs) {
      bool ok = true;
      for (const auto& cc : conj)
        if (!cc.satisfied(s)) {
          ok = false;
          break;
        }
      if (ok) {
        in = true;
        break;
      }
    }
    if (in) out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------- SemilinearSet

SemilinearSet SemilinearSet::whole(int ambient) {
  SemilinearSet s(ambient);
  s.cells_.emplace_back(std::vector<LinConstraint>{}, ambient);
  return s;
}

SemilinearSet SemilinearSet::point(const RatVec& p) {
  int k = static_cast<int>(p.size());
  std::vector<LinConstraint> cs;
  for (int i = 0; i < k; ++i) {
    AffineForm f = AffineForm::coordinate(k, i);
    f.constant() = -p(i);
    cs.emplace_back(std::move(f), Rel::EQ);
  }
  SemilinearSet s(k);
  s.cells_.emplace_back(std::move(cs), k);
  return s;
}

SemilinearSet SemilinearSet::interval(std::optional<Rat> lo, bool lo_strict,
                                      std::optional<Rat> hi, bool hi_strict) {
  std::vector<LinConstraint> cs;
  AffineForm x = AffineForm::coordinate(1, 0);
  if (lo) {
    AffineForm f = -x;
    f.constant() += *lo;
    cs.emplace_back(std::move(f), lo_strict ? Rel::LT : Rel::LE);
  }
  if (hi) {
    AffineForm f = x;
    f.constant() -= *hi;
    cs.emplace_back(std::move(f), hi_strict ? Rel::LT : Rel::LE);
  }
  SemilinearSet s(1);
  s.cells_.emplace_back(std::move(cs), 1);
  return s;
}

bool SemilinearSet::is_empty() const {
  for (const auto& c : cells_)
    if (fm_feasible(c.constraints(), ambient_dim_)) return false;
  return true;
}

SemilinearSet SemilinearSet::normalize() const {
  std::vector<std::vector<LinConstraint>> conjs;
  for (const auto& c : cells_) conjs.push_back(c.constraints());
  auto cyl = decompose_union(conjs, ambient_dim_);
  SemilinearSet out(ambient_dim_);
  for (const auto& c : cyl) out.cells_.push_back(Cell::from_cyl(c));
  out.normalized_ = true;
  return out;
}

int SemilinearSet::chi_g() const {
  if (!normalized_) return normalize().chi_g();
  int v = 0;
  for (const auto& c : cells_) v += c.cyl()->chi_g_value();
  return v;
}

int SemilinearSet::chi_b() const {
  if (!normalized_) return normalize().chi_b();
  int v = 0;
  for (const auto& c : cells_) v += c.cyl()->chi_b_value();
  return v;
}

bool SemilinearSet::is_doubly_bounded() const {
  if (!normalized_) return normalize().is_doubly_bounded();
  for (const auto& c : cells_)
    if (!c.cyl()->bounded()) return false;
  return true;
}

SemilinearSet SemilinearSet::apply_unimodular(const UniMap& um) const {
  if (um.dim() != ambient_dim_)
    throw std::invalid_argument("apply_unimodular: dimension mismatch");
  UniMap inv = um.inverse();
  int k = ambient_dim_;
  RatMat mi(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) mi(i, j) = Rat(inv.matrix()(i, j));
  SemilinearSet out(k);
  for (const auto& cell : cells_) {
    std::vector<LinConstraint> cs;
    for (const auto& c : cell.constraints()) {
      // f(x) REL 0 with x = Minv x' + s'  =>  f'(x') = (Minv^T c) . x' + ...
      RatVec nc = mi.transpose() * c.form.coeffs();
      Rat ncst = c.form.constant() + c.form.coeffs().dot(inv.shift());
      cs.emplace_back(AffineForm(std::move(nc), std::move(ncst)), c.rel);
    }
    out.cells_.emplace_back(std::move(cs), k);
  }
  return out;
}

SemilinearSet SemilinearSet::set_union(const SemilinearSet& o) const {
  if (o.ambient_dim_ != ambient_dim_)
    throw std::invalid_argument("set_union: dimension mismatch");
  SemilinearSet out(ambient_dim_);
  out.cells_ = cells_;
  out.cells_.insert(out.cells_.end(), o.cells_.begin(), o.cells_.end());
  return out;
}

SemilinearSet SemilinearSet::intersect(const SemilinearSet& o) const {
  if (o.ambient_dim_ != ambient_dim_)
    throw std::invalid_argument("intersect: dimension mismatch");
  SemilinearSet out(ambient_dim_);
  for (const auto& a : cells_)
    for (const auto& b : o.cells_) {
      std::vector<LinConstraint> cs = a.constraints();
      cs.insert(cs.end(), b.constraints().begin(), b.constraints().end());
      out.cells_.emplace_back(std::move(cs), ambient_dim_);
    }
  return out;
}

SemilinearSet SemilinearSet::product(const SemilinearSet& o) const {
  int k = ambient_dim_ + o.ambient_dim_;
  SemilinearSet out(k);
  for (const auto& a : cells_)
    for (const auto& b : o.cells_) {
      std::vector<LinConstraint> cs;
      for (const auto& c : a.constraints()) cs.emplace_back(c.form.lift(k), c.rel);
      for (const auto& c : b.constraints()) {
        RatVec v = RatVec::Zero(k);
        for (int i = 0; i < o.ambient_dim_; ++i)
          v(ambient_dim_ + i) = c.form.coeff(i);
        cs.emplace_back(AffineForm(std::move(v), c.form.constant()), c.rel);
      }
      out.cells_.emplace_back(std::move(cs), k);
    }
  return out;
}

SemilinearSet SemilinearSet::restrict(const LinConstraint& c) const {
  SemilinearSet out(ambient_dim_);
  for (const auto& a : cells_) {
    std::vector<LinConstraint> cs = a.constraints();
    cs.push_back(c);
    out.cells_.emplace_back(std::move(cs), ambient_dim_);
  }
  return out;
}

// ----------------------------------------------- integer-point feasibility

namespace {

struct IntLinSolve {
  bool feasible = false;
  std::vector<std::vector<Int>> basis;  // kernel lattice basis, length-k cols
  std::vector<Int> particular;
};

// Solves A z = b over the integers via unimodular column reduction.
IntLinSolve integer_solve(std::vector<std::vector<Int>> a,
                          std::vector<Int> b, int k) {
  int q = static_cast<int>(a.size());
  std::vector<std::vector<Int>> v(k, std::vector<Int>(k, 0));
  for (int i = 0; i < k; ++i) v[i][i] = 1;
  auto colop = [&](int c1, int c2, const Int& s, const Int& t, const Int& u,
                   const Int& w) {
    // (col c1, col c2) <- (s*col1 + t*col2, u*col1 + w*col2)
    for (int i = 0; i < q; ++i) {
      Int x = a[i][c1], y = a[i][c2];
      a[i][c1] = s * x + t * y;
      a[i][c2] = u * x + w * y;
    }
    for (int i = 0; i < k; ++i) {
      Int x = v[i][c1], y = v[i][c2];
      v[i][c1] = s * x + t * y;
      v[i][c2] = u * x + w * y;
    }
  };
  std::vector<int> pivot_col(q, -1);
  int r = 0;
  for (int i = 0; i < q && r < k; ++i) {
    for (int j = r + 1; j < k; ++j) {
      if (a[i][j] == 0) continue;
      if (a[i][r] == 0) {
        colop(r, j, 0, 1, 1, 0);  // swap
        continue;
      }
      Int g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(),
                 a[i][r].get_mpz_t(), a[i][j].get_mpz_t());
      Int x = a[i][r] / g, y = a[i][j] / g;
      colop(r, j, s, t, -y, x);
    }
    if (a[i][r] != 0) pivot_col[i] = r++;
  }
  IntLinSolve out;
  std::vector<Int> y(k, 0);
  for (int i = 0; i < q; ++i) {
    Int rhs = b[i];
    for (int j = 0; j < k; ++j)
      if (j != pivot_col[i]) rhs -= a[i][j] * y[j];
    if (pivot_col[i] < 0) {
      if (rhs != 0) return out;  // inconsistent
      continue;
    }
    Int p = a[i][pivot_col[i]];
    if (rhs % p != 0) return out;  // no integral solution
    y[pivot_col[i]] = rhs / p;
  }
  out.feasible = true;
  out.particular.assign(k, 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out.particular[i] += v[i][j] * y[j];
  std::vector<bool> is_pivot(k, false);
  for (int i = 0; i < q; ++i)
    if (pivot_col[i] >= 0) is_pivot[pivot_col[i]] = true;
  for (int j = 0; j < k; ++j) {
    if (is_pivot[j]) continue;
    std::vector<Int> col(k);
    for (int i = 0; i < k; ++i) col[i] = v[i][j];
    out.basis.push_back(std::move(col));
  }
  return out;
}

std::vector<LinConstraint> drop_variable(const std::vector<LinConstraint>& cs,
                                         int dim, int j, const Rat& value) {
  std::vector<LinConstraint> out;
  for (const auto& c : cs) {
    RatVec v = RatVec::Zero(dim - 1);
    int t = 0;
    for (int i = 0; i < dim; ++i)
      if (i != j) v(t++) = c.form.coeff(i);
    out.emplace_back(
        AffineForm(std::move(v), c.form.constant() + c.form.coeff(j) * value),
        c.rel);
  }
  return out;
}

bool open_int_feasible(std::vector<LinConstraint> cs, int r);

// Substitutes z = z0 + U w into the constraints and recurses.
bool int_feasible_affine_sublattice(const std::vector<LinConstraint>& cs,
                                    int k, const IntLinSolve& sol) {
  int r = static_cast<int>(sol.basis.size());
  std::vector<LinConstraint> sub;
  for (const auto& c : cs) {
    if (c.rel == Rel::EQ) continue;  // already folded into the lattice solve
    RatVec v = RatVec::Zero(r);
    Rat cst = c.form.constant();
    for (int i = 0; i < k; ++i) cst += c.form.coeff(i) * Rat(sol.particular[i]);
    for (int j = 0; j < r; ++j) {
      Rat s = 0;
      for (int i = 0; i < k; ++i) s += c.form.coeff(i) * Rat(sol.basis[j][i]);
      v(j) = s;
    }
    sub.emplace_back(AffineForm(std::move(v), std::move(cst)), c.rel);
  }
  return open_int_feasible(std::move(sub), r);
}

bool int_point_feasible(const std::vector<LinConstraint>& cs, int k) {
  std::vector<std::vector<Int>> rows;
  std::vector<Int> rhs;
  for (const auto& c : cs) {
    if (c.rel != Rel::EQ) continue;
    Int d = den(c.form.constant());
    for (int i = 0; i < k; ++i) d = lcm_int(d, den(c.form.coeff(i)));
    std::vector<Int> row(k);
    for (int i = 0; i < k; ++i) row[i] = num(c.form.coeff(i) * Rat(d));
    rows.push_back(std::move(row));
    rhs.push_back(num(-c.form.constant() * Rat(d)));
  }
  if (rows.empty()) {
    std::vector<std::vector<Int>> id;
    IntLinSolve sol;
    sol.feasible = true;
    sol.particular.assign(k, 0);
    for (int j = 0; j < k; ++j) {
      std::vector<Int> col(k, 0);
      col[j] = 1;
      sol.basis.push_back(std::move(col));
    }
    return int_feasible_affine_sublattice(cs, k, sol);
  }
  IntLinSolve sol = integer_solve(std::move(rows), std::move(rhs), k);
  if (!sol.feasible) return false;
  return int_feasible_affine_sublattice(cs, k, sol);
}

bool open_int_feasible(std::vector<LinConstraint> cs, int r) {
  if (!fm_feasible(cs, r)) return false;
  if (r == 0) return true;
  // a variable with bounded real range can be enumerated exactly
  for (int j = 0; j < r; ++j) {
    FMInterval itv = fm_range(cs, r, AffineForm::coordinate(r, j));
    if (itv.empty) return false;
    if (itv.lo && itv.hi) {
      Int zlo = itv.lo_strict ? floor_rat(*itv.lo) + 1 : ceil_rat(*itv.lo);
      Int zhi = itv.hi_strict ? ceil_rat(*itv.hi) - 1 : floor_rat(*itv.hi);
      if (zhi - zlo > 1000000)
        throw std::runtime_error("integer feasibility: range too large");
      for (Int t = zlo; t <= zhi; ++t)
        if (open_int_feasible(drop_variable(cs, r, j, Rat(t)), r - 1))
          return true;
      return false;
    }
  }
  // all variables unbounded; look for an implicit equality of the recession
  // cone, otherwise the cone is full-dimensional and integer points exist
  std::vector<LinConstraint> hom;
  for (const auto& c : cs) {
    AffineForm f = c.form;
    f.constant() = 0;
    hom.emplace_back(std::move(f), Rel::LE);
  }
  for (const auto& c : cs) {
    AffineForm probe = c.form;
    probe.constant() = 1;  // a . v <= -1
    std::vector<LinConstraint> test = hom;
    test.emplace_back(std::move(probe), Rel::LE);
    if (fm_feasible(test, r)) continue;  // not implicit
    // u = this row's coefficients, integral and primitive
    Int d = 1;
    for (int i = 0; i < r; ++i) d = lcm_int(d, den(c.form.coeff(i)));
    std::vector<Int> u(r);
    Int g = 0;
    for (int i = 0; i < r; ++i) {
      u[i] = num(c.form.coeff(i) * Rat(d));
      g = gcd_int(g, u[i]);
    }
    if (g == 0) continue;
    for (int i = 0; i < r; ++i) u[i] /= g;
    RatVec uq(r);
    for (int i = 0; i < r; ++i) uq(i) = Rat(u[i]);
    FMInterval itv = fm_range(cs, r, AffineForm(uq, Rat(0)));
    if (itv.empty) return false;
    if (!itv.lo || !itv.hi)
      throw std::logic_error("implicit equality with unbounded functional");
    Int zlo = itv.lo_strict ? floor_rat(*itv.lo) + 1 : ceil_rat(*itv.lo);
    Int zhi = itv.hi_strict ? ceil_rat(*itv.hi) - 1 : floor_rat(*itv.hi);
    for (Int t = zlo; t <= zhi; ++t) {
      std::vector<std::vector<Int>> rows{u};
      std::vector<Int> rhs{t};
      IntLinSolve sol = integer_solve(rows, rhs, r);
      if (!sol.feasible) continue;
      if (int_feasible_affine_sublattice(cs, r, sol)) return true;
    }
    return false;
  }
  return true;  // full-dimensional recession cone
}

void enumerate_cell(const CylCell& cell, long m, int level, RatVec& prefix,
                    std::vector<RatVec>& out) {
  int k = cell.ambient_dim();
  if (level == k) {
    out.push_back(prefix);
    return;
  }
  const CylLevel& l = cell.levels[level];
  RatVec pre = prefix.head(level);
  if (l.is_section) {
    Rat v = l.section.eval(pre);
    if (!is_integer(v * m)) return;
    prefix(level) = v;
    enumerate_cell(cell, m, level + 1, prefix, out);
    return;
  }
  Rat lo = l.lo->eval(pre), hi = l.hi->eval(pre);
  Int zlo = floor_rat(lo * m) + 1;
  Int zhi = ceil_rat(hi * m) - 1;
  for (Int z = zlo; z <= zhi; ++z) {
    prefix(level) = Rat(z) / m;
    enumerate_cell(cell, m, level + 1, prefix, out);
  }
}

}  // namespace

std::vector<RatVec> SemilinearSet::lattice_points(long m) const {
  if (m <= 0) throw std::invalid_argument("lattice_points: m must be positive");
  if (!normalized_) return normalize().lattice_points(m);
  std::vector<RatVec> out;
  for (const auto& cell : cells_) {
    const CylCell& cyl = *cell.cyl();
    if (cyl.bounded()) {
      RatVec prefix(ambient_dim_);
      enumerate_cell(cyl, m, 0, prefix, out);
      continue;
    }
    // Unbounded relatively open cell: lattice points are either absent or
    // infinite (translation along a rational recession direction stays in
    // the cell).
    std::vector<LinConstraint> scaled;
    for (const auto& c : cyl.constraints()) {
      AffineForm f = c.form;
      RatVec v = f.coeffs() / Rat(m);
      scaled.emplace_back(AffineForm(std::move(v), f.constant()), c.rel);
    }
    if (int_point_feasible(scaled, ambient_dim_))
      throw InfiniteLattice("lattice intersection is infinite");
  }
  std::sort(out.begin(), out.end(), [](const RatVec& a, const RatVec& b) {
    for (int i = 0; i < a.size(); ++i)
      if (a(i) != b(i)) return a(i) < b(i);
    return false;
  });
  return out;
}

std::string SemilinearSet::to_string() const {
  std::ostringstream os;
  bool first_cell = true;
  for (const auto& c : cells_) {
    if (!first_cell) os << " | ";
    first_cell = false;
    if (c.constraints().empty()) {
      os << "true";
      continue;
    }
    bool first = true;
    for (const auto& cc : c.constraints()) {
      if (!first) os << " & ";
      first = false;
      os << cc.form.to_string()
         << (cc.rel == Rel::LT ? " < 0" : (cc.rel == Rel::LE ? " <= 0" : " = 0"));
    }
  }
  if (first_cell) os << "false";
  return os.str();
}

Rat jcb_gamma(const RatVec& u, const RatVec& v) {
  Rat s = 0;
  for (int i = 0; i < u.size(); ++i) s -= u(i);
  for (int i = 0; i < v.size(); ++i) s += v(i);
  return s;
}

std::optional<RatVec> bad_recession_direction(const SemilinearSet& s,
                                              const AffineForm& slope) {
  SemilinearSet n = s.normalized() ? s : s.normalize();
  int k = n.ambient_dim();
  for (const auto& cell : n.cells()) {
    std::vector<LinConstraint> hom;
    for (const auto& c : cell.constraints()) {
      AffineForm f = c.form;
      f.constant() = 0;
      hom.emplace_back(std::move(f), c.rel == Rel::EQ ? Rel::EQ : Rel::LE);
    }
    AffineForm sl = slope;
    sl.constant() = 0;
    hom.emplace_back(sl, Rel::LE);  // slope . v <= 0
    for (int i = 0; i < k; ++i) {
      for (int sgn : {1, -1}) {
        std::vector<LinConstraint> test = hom;
        AffineForm f = AffineForm::coordinate(k, i) * Rat(-sgn);
        f.constant() = 1;  // sgn * v_i >= 1
        test.emplace_back(std::move(f), Rel::LE);
        if (!fm_feasible(test, k)) continue;
        // extract a witness by sampling the feasible polyhedron
        std::vector<std::vector<LinConstraint>> one{test};
        auto cells = decompose_union(one, k);
        if (!cells.empty()) return cells.front().sample();
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- parser

namespace {

struct RegionParser {
  const std::string& s;
  size_t pos = 0;
  int max_var = 0;

  explicit RegionParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw RegionSyntaxError(msg, static_cast<int>(pos));
  }

  // linear expression as (coeff map var->Rat, constant); dimension fixed later
  struct LinExpr {
    std::map<int, Rat> coeffs;
    Rat constant = 0;
  };

  Rat parse_number() {
    skip_ws();
    size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    size_t digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      ++pos;
      ++digits;
    }
    if (digits == 0) fail("expected number");
    if (pos < s.size() && s[pos] == '/') {
      ++pos;
      size_t d2 = 0;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        ++pos;
        ++d2;
      }
      if (d2 == 0) fail("expected denominator");
    }
    return parse_rat(s.substr(start, pos - start));
  }

  int parse_var() {
    skip_ws();
    if (pos >= s.size() || s[pos] != 'g') fail("expected variable");
    ++pos;
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos == start) fail("expected variable index");
    int idx = std::stoi(s.substr(start, pos - start));
    if (idx <= 0) fail("variable index must be >= 1");
    max_var = std::max(max_var, idx);
    return idx - 1;
  }

  LinExpr parse_term(bool negated) {
    skip_ws();
    LinExpr e;
    Rat sign = negated ? -1 : 1;
    if (pos < s.size() && s[pos] == 'g') {
      e.coeffs[parse_var()] = sign;
      return e;
    }
    Rat c = parse_number() * sign;
    skip_ws();
    if (pos < s.size() && (s[pos] == '*' || s[pos] == 'g')) {
      if (s[pos] == '*') ++pos;
      skip_ws();
      if (pos < s.size() && s[pos] == 'g') {
        e.coeffs[parse_var()] = c;
        return e;
      }
      fail("expected variable after coefficient");
    }
    e.constant = c;
    return e;
  }

  LinExpr parse_linexpr() {
    LinExpr acc = parse_term(false);
    while (true) {
      skip_ws();
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        bool neg = s[pos] == '-';
        ++pos;
        LinExpr t = parse_term(neg);
        for (auto& [k, v] : t.coeffs) acc.coeffs[k] += v;
        acc.constant += t.constant;
      } else {
        return acc;
      }
    }
  }

  struct RawConstraint {
    std::map<int, Rat> coeffs;
    Rat constant;
    Rel rel;
  };

  RawConstraint parse_comparison() {
    LinExpr lhs = parse_linexpr();
    skip_ws();
    Rel rel;
    bool flip = false;
    if (eat('<')) {
      rel = eat('=') ? Rel::LE : Rel::LT;
    } else if (eat('>')) {
      rel = eat('=') ? Rel::LE : Rel::LT;
      flip = true;
    } else if (eat('=')) {
      rel = Rel::EQ;
    } else {
      fail("expected relation");
    }
    LinExpr rhs = parse_linexpr();
    RawConstraint out;
    out.rel = rel;
    const LinExpr& a = flip ? rhs : lhs;
    const LinExpr& b = flip ? lhs : rhs;
    out.coeffs = a.coeffs;
    for (const auto& [k, v] : b.coeffs) out.coeffs[k] -= v;
    out.constant = a.constant - b.constant;
    return out;
  }

  using DNF = std::vector<std::vector<RawConstraint>>;

  DNF parse_expr() {
    DNF acc = parse_conj();
    while (true) {
      skip_ws();
      if (eat('|')) {
        DNF rhs = parse_conj();
        acc.insert(acc.end(), rhs.begin(), rhs.end());
      } else {
        return acc;
      }
    }
  }

  DNF parse_conj() {
    DNF acc = parse_atom();
    while (true) {
      skip_ws();
      if (eat('&')) {
        DNF rhs = parse_atom();
        DNF prod;
        for (const auto& a : acc)
          for (const auto& b : rhs) {
            auto c = a;
            c.insert(c.end(), b.begin(), b.end());
            prod.push_back(std::move(c));
          }
        acc = std::move(prod);
      } else {
        return acc;
      }
    }
  }

  DNF parse_atom() {
    skip_ws();
    if (eat('(')) {
      DNF inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    return DNF{{parse_comparison()}};
  }
};

}  // namespace

SemilinearSet parse_region(const std::string& text, int expected_dim) {
  RegionParser p(text);
  auto dnf = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw RegionSyntaxError("unexpected trailing input", static_cast<int>(p.pos));
  int k = expected_dim > 0 ? expected_dim : p.max_var;
  if (expected_dim > 0 && p.max_var > expected_dim)
    throw RegionSyntaxError("dimension mismatch: variable g" +
                                std::to_string(p.max_var) + " exceeds ambient " +
                                std::to_string(expected_dim),
                            0);
  if (k == 0) k = 1;
  SemilinearSet out(k);
  std::vector<Cell> cells;
  for (const auto& conj : dnf) {
    std::vector<LinConstraint> cs;
    for (const auto& rc : conj) {
      RatVec v = RatVec::Zero(k);
      for (const auto& [idx, coef] : rc.coeffs) v(idx) = coef;
      cs.emplace_back(AffineForm(std::move(v), rc.constant), rc.rel);
    }
    cells.emplace_back(std::move(cs), k);
  }
  return SemilinearSet(std::move(cells), k);
}

}  // namespace motint
