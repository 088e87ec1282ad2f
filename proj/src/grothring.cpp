#include "motint/grothring.hpp"

#include <algorithm>
#include <sstream>

namespace motint {

// ------------------------------------------------------------------ LPoly

void LPoly::add_term(const std::vector<int>& exps, long long coeff) {
  if (static_cast<int>(exps.size()) != nvars_)
    throw std::invalid_argument("LPoly: exponent arity");
  auto it = terms_.find(exps);
  if (it == terms_.end()) {
    if (coeff != 0) terms_.emplace(exps, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

LPoly LPoly::operator+(const LPoly& o) const {
  LPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

LPoly LPoly::operator-(const LPoly& o) const {
  LPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

namespace {

long mod_pow(long base, long exp, long p) {
  long long b = ((base % p) + p) % p, r = 1;
  long long e = exp;
  bool invert = false;
  if (e < 0) {
    invert = true;
    e = -e;
  }
  while (e) {
    if (e & 1) r = (r * b) % p;
    b = (b * b) % p;
    e >>= 1;
  }
  if (invert) {
    // Fermat inverse (p prime, r a unit)
    long long inv = 1, bb = r, ee = p - 2;
    while (ee) {
      if (ee & 1) inv = (inv * bb) % p;
      bb = (bb * bb) % p;
      ee >>= 1;
    }
    r = inv;
  }
  return static_cast<long>(r);
}

}  // namespace

long LPoly::eval_mod(const std::vector<long>& point, long p) const {
  long long acc = 0;
  for (const auto& [e, c] : terms_) {
    long long t = ((c % p) + p) % p;
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      t = (t * mod_pow(point[i], e[i], p)) % p;
    }
    acc = (acc + t) % p;
  }
  return static_cast<long>(acc);
}

std::vector<RatVec> LPoly::support_points() const {
  std::vector<RatVec> out;
  for (const auto& [e, c] : terms_) {
    RatVec v(nvars_);
    for (int i = 0; i < nvars_; ++i) v(i) = e[i];
    out.push_back(std::move(v));
  }
  return out;
}

std::string LPoly::to_string(const std::vector<std::string>& vars) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    first = false;
    long long a = c < 0 ? -c : c;
    bool printed = false;
    if (a != 1) {
      os << a;
      printed = true;
    }
    for (int i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      if (printed) os << "*";
      os << vars[i];
      if (e[i] != 1) os << "^" << e[i];
      printed = true;
    }
    if (!printed) os << 1;
  }
  return os.str();
}

// -------------------------------------------------------------- VMonomial

bool VMonomial::operator<(const VMonomial& o) const {
  if (l_power != o.l_power) return l_power < o.l_power;
  if (symbols.size() != o.symbols.size())
    return symbols.size() < o.symbols.size();
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i]->name != o.symbols[i]->name)
      return symbols[i]->name < o.symbols[i]->name;
  return false;
}

bool VMonomial::operator==(const VMonomial& o) const {
  if (l_power != o.l_power || symbols.size() != o.symbols.size()) return false;
  for (size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i]->name != o.symbols[i]->name) return false;
  return true;
}

// ------------------------------------------------------------------ VClass

void VClass::add_term(const VMonomial& m, const Rat& c) {
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (c != 0) terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

VClass VClass::operator+(const VClass& o) const {
  VClass r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, c);
  return r;
}

VClass VClass::operator-(const VClass& o) const {
  VClass r = *this;
  for (const auto& [m, c] : o.terms_) r.add_term(m, -c);
  return r;
}

VClass VClass::operator-() const {
  VClass r;
  for (const auto& [m, c] : terms_) r.terms_[m] = -c;
  return r;
}

VClass VClass::operator*(const VClass& o) const {
  VClass r;
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) {
      VMonomial m;
      m.l_power = m1.l_power + m2.l_power;
      m.symbols = m1.symbols;
      m.symbols.insert(m.symbols.end(), m2.symbols.begin(), m2.symbols.end());
      std::sort(m.symbols.begin(), m.symbols.end(),
                [](const SymbolPtr& a, const SymbolPtr& b) {
                  return a->name < b->name;
                });
      r.add_term(m, c1 * c2);
    }
  return r;
}

VClass VClass::operator*(const Rat& s) const {
  VClass r;
  if (s == 0) return r;
  for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
  return r;
}

VClass VClass::mul_L(int k) const {
  VClass r;
  for (const auto& [m, c] : terms_) {
    VMonomial m2 = m;
    m2.l_power += k;
    r.terms_[m2] = c;
  }
  return r;
}

VClass VClass::pow(int k) const {
  if (k < 0) throw std::invalid_argument("VClass::pow: negative exponent");
  VClass r(1);
  for (int i = 0; i < k; ++i) r = r * (*this);
  return r;
}

VClass VClass::reduce_mod_L() const {
  VClass r;
  for (const auto& [m, c] : terms_) {
    if (m.l_power > 0) continue;
    if (m.l_power < 0)
      throw UnsupportedClass("reduce_mod_L: negative power of L");
    r.terms_[m] = c;
  }
  return r;
}

std::set<std::string> VClass::symbol_names() const {
  std::set<std::string> out;
  for (const auto& [m, c] : terms_)
    for (const auto& s : m.symbols) out.insert(s->name);
  return out;
}

std::vector<SymbolPtr> VClass::distinct_symbols() const {
  std::map<std::string, SymbolPtr> by_name;
  for (const auto& [m, c] : terms_)
    for (const auto& s : m.symbols) by_name[s->name] = s;
  std::vector<SymbolPtr> out;
  for (auto& [n, s] : by_name) out.push_back(s);
  return out;
}

std::string VClass::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rat a = c;
    if (!first)
      os << (a > 0 ? " + " : " - ");
    else if (a < 0)
      os << "-";
    first = false;
    if (a < 0) a = -a;
    bool printed = false;
    if (a != 1 || (m.l_power == 0 && m.symbols.empty())) {
      os << rat_to_string(a);
      printed = true;
    }
    for (const auto& s : m.symbols) {
      if (printed) os << "*";
      os << "[" << s->name << "]";
      printed = true;
    }
    if (m.l_power != 0) {
      if (printed) os << "*";
      os << "L";
      if (m.l_power != 1) os << "^" << m.l_power;
    }
  }
  return os.str();
}

std::string VClass::to_latex() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    Rat a = c;
    if (!first)
      os << (a > 0 ? " + " : " - ");
    else if (a < 0)
      os << "-";
    first = false;
    if (a < 0) a = -a;
    bool printed = false;
    if (a != 1 || (m.l_power == 0 && m.symbols.empty())) {
      os << rat_to_string(a);
      printed = true;
    }
    for (const auto& s : m.symbols) {
      if (printed) os << " ";
      os << "[" << (s->display_name.empty() ? s->name : s->display_name)
         << "]";
      printed = true;
    }
    if (m.l_power != 0) {
      if (printed) os << " ";
      os << "\\mathds{L}";
      if (m.l_power != 1) os << "^{" << m.l_power << "}";
    }
  }
  return os.str();
}

// ------------------------------------------------------------ point_count

namespace {

long long count_symbol_points(const VarietySymbol& sym, long p,
                              long long cap) {
  if (p <= 1) throw BadPrime("point_count: p must be a prime >= 2");
  if ((p - 1) % sym.action_order != 0)
    throw BadPrime("point_count: p = " + std::to_string(p) +
                   " is not 1 mod " + std::to_string(sym.action_order) +
                   " (action order of " + sym.name + ")");
  double total = 1;
  for (int i = 0; i < sym.torus_dim; ++i) total *= static_cast<double>(p - 1);
  if (total > static_cast<double>(cap))
    throw TooLarge("point_count: enumeration of " + sym.name +
                   " exceeds the cap");
  int d = sym.torus_dim;
  std::vector<long> pt(d, 1);
  long long count = 0;
  while (true) {
    bool ok = true;
    for (const auto& eq : sym.equations)
      if (eq.eval_mod(pt, p) != 0) {
        ok = false;
        break;
      }
    if (ok) ++count;
    int i = 0;
    for (; i < d; ++i) {
      if (++pt[i] <= p - 1) break;
      pt[i] = 1;
    }
    if (i == d) break;
    if (d == 0) break;
  }
  return count;
}

}  // namespace

Rat point_count(const VClass& x, long p, long long cap) {
  static std::map<std::pair<std::string, long>, long long> cache;
  Rat total = 0;
  for (const auto& [m, c] : x.terms()) {
    Rat term = c;
    if (m.l_power >= 0) {
      for (int i = 0; i < m.l_power; ++i) term *= p;
    } else {
      for (int i = 0; i < -m.l_power; ++i) term /= p;
    }
    for (const auto& s : m.symbols) {
      auto key = std::make_pair(s->name, p);
      auto it = cache.find(key);
      long long n;
      if (it != cache.end()) {
        n = it->second;
      } else {
        n = count_symbol_points(*s, p, cap);
        cache[key] = n;
      }
      term *= Rat(static_cast<long>(n));
    }
    total += term;
  }
  return total;
}

// ----------------------------------------------------------------- volume

namespace {

int affine_rank(const std::vector<RatVec>& pts, int d) {
  if (pts.empty()) return -1;
  RatMat m(static_cast<int>(pts.size()) - 1, d);
  for (size_t i = 1; i < pts.size(); ++i)
    for (int j = 0; j < d; ++j) m(static_cast<int>(i) - 1, j) = pts[i](j) - pts[0](j);
  if (m.rows() == 0) return 0;
  return static_cast<int>(Eigen::FullPivLU<RatMat>(m).rank());
}

Rat volume_rec(std::vector<RatVec> pts, int d) {
  // dedupe
  std::sort(pts.begin(), pts.end(), [](const RatVec& a, const RatVec& b) {
    for (int i = 0; i < a.size(); ++i)
      if (a(i) != b(i)) return a(i) < b(i);
    return false;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const RatVec& a, const RatVec& b) { return a == b; }),
            pts.end());
  if (d == 0) return Rat(0);
  if (static_cast<int>(pts.size()) < d + 1) return Rat(0);
  if (d == 1) {
    Rat lo = pts[0](0), hi = pts[0](0);
    for (const auto& p : pts) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    return hi - lo;
  }
  if (affine_rank(pts, d) < d) return Rat(0);
  int n = static_cast<int>(pts.size());
  // enumerate supporting hyperplanes spanned by (d)-subsets
  std::vector<std::pair<RatVec, Rat>> facets;  // (normal, offset), n.x <= c
  std::vector<int> idx(d);
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == d) {
      RatMat m(d - 1, d);
      for (int i = 1; i < d; ++i)
        for (int j = 0; j < d; ++j)
          m(i - 1, j) = pts[idx[i]](j) - pts[idx[0]](j);
      Eigen::FullPivLU<RatMat> lu(m);
      if (lu.rank() != d - 1) return;
      RatMat ker = lu.kernel();
      RatVec nvec = ker.col(0);
      Rat c = nvec.dot(pts[idx[0]]);
      bool above = false, below = false;
      for (const auto& p : pts) {
        Rat v = nvec.dot(p);
        if (v > c) above = true;
        if (v < c) below = true;
      }
      if (above && below) return;
      if (above) {
        nvec = -nvec;
        c = -c;
      }
      // canonicalize for dedup: scale so first nonzero entry is +-1
      for (int i = 0; i < d; ++i)
        if (nvec(i) != 0) {
          Rat s = nvec(i) > 0 ? nvec(i) : -nvec(i);
          nvec /= s;
          c /= s;
          break;
        }
      for (const auto& [fn, fc] : facets)
        if (fn == nvec && fc == c) return;
      facets.emplace_back(nvec, c);
      return;
    }
    for (int i = start; i <= n - (d - k); ++i) {
      idx[k] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  Rat vol = 0;
  const RatVec& base = pts[0];
  for (const auto& [nvec, c] : facets) {
    Rat dist_num = c - nvec.dot(base);
    if (dist_num == 0) continue;
    if (dist_num < 0) dist_num = -dist_num;
    int drop = -1;
    for (int i = 0; i < d; ++i)
      if (nvec(i) != 0) {
        drop = i;
        break;
      }
    Rat ni = nvec(drop) > 0 ? nvec(drop) : -nvec(drop);
    std::vector<RatVec> proj;
    for (const auto& p : pts) {
      if (nvec.dot(p) != c) continue;
      RatVec q(d - 1);
      int t = 0;
      for (int i = 0; i < d; ++i)
        if (i != drop) q(t++) = p(i);
      proj.push_back(std::move(q));
    }
    vol += dist_num * volume_rec(std::move(proj), d - 1) / ni;
  }
  return vol / d;
}

}  // namespace

Rat normalized_volume(const std::vector<RatVec>& points, int d) {
  Rat v = volume_rec(points, d);
  Rat fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  return v * fact;
}

// ------------------------------------------------------------------ euler

namespace {

// univariate polynomial over Q as dense coefficient vector, lowest first
using UPoly = std::vector<Rat>;

void utrim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

UPoly uderiv(const UPoly& p) {
  UPoly d;
  for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * Rat(static_cast<long>(i)));
  utrim(d);
  return d;
}

UPoly urem(UPoly a, const UPoly& b) {
  utrim(a);
  while (a.size() >= b.size() && !a.empty()) {
    Rat f = a.back() / b.back();
    size_t off = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[off + i] -= f * b[i];
    utrim(a);
  }
  return a;
}

UPoly ugcd(UPoly a, UPoly b) {
  utrim(a);
  utrim(b);
  while (!b.empty()) {
    UPoly r = urem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Rat lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

// distinct nonzero complex roots of a univariate Laurent polynomial
long distinct_torus_roots(const LPoly& f) {
  if (f.is_zero())
    throw UnsupportedClass("euler: identically zero 1-variable equation");
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto& [e, c] : f.terms()) {
    if (first) {
      lo = hi = e[0];
      first = false;
    }
    lo = std::min(lo, e[0]);
    hi = std::max(hi, e[0]);
  }
  UPoly p(hi - lo + 1, Rat(0));
  for (const auto& [e, c] : f.terms()) p[e[0] - lo] = Rat(static_cast<long>(c));
  utrim(p);
  UPoly g = ugcd(p, uderiv(p));
  long deg = static_cast<long>(p.size()) - 1;
  long deg_g = g.empty() ? 0 : static_cast<long>(g.size()) - 1;
  long distinct = deg - deg_g;
  // remove the root at 0 if present (p[0] == 0 cannot happen after shift,
  // but the squarefree part may still vanish at 0 when p[0] == 0)
  if (!p.empty() && p[0] == 0) distinct -= 1;
  return distinct;
}

Int euler_symbol(const VarietySymbol& sym) {
  int d = sym.torus_dim;
  if (sym.equations.empty()) return d == 0 ? Int(1) : Int(0);
  if (sym.equations.size() == 1 && sym.nondegenerate && d >= 1) {
    const LPoly& eq = sym.equations[0];
    Rat nv = normalized_volume(eq.support_points(), d);
    if (nv == 0) return Int(0);
    if (!is_integer(nv))
      throw UnsupportedClass("euler: non-integral normalized volume");
    return (d % 2 == 1) ? num(nv) : -num(nv);
  }
  if (d == 0) {
    // equations are integer constants
    for (const auto& eq : sym.equations)
      if (!eq.is_zero()) return Int(0);
    return Int(1);
  }
  if (d == 1) {
    // intersection of root sets: gcd of the polynomials
    LPoly combined = sym.equations[0];
    if (sym.equations.size() > 1) {
      // gcd over Q of all equations
      int lo = 0, hi = 0;
      UPoly acc;
      bool first = true;
      for (const auto& eq : sym.equations) {
        int elo = 0, ehi = 0;
        bool f2 = true;
        for (const auto& [e, c] : eq.terms()) {
          if (f2) {
            elo = ehi = e[0];
            f2 = false;
          }
          elo = std::min(elo, e[0]);
          ehi = std::max(ehi, e[0]);
        }
        UPoly p(ehi - elo + 1, Rat(0));
        for (const auto& [e, c] : eq.terms()) p[e[0] - elo] = Rat(static_cast<long>(c));
        utrim(p);
        if (first) {
          acc = p;
          first = false;
        } else {
          acc = ugcd(acc, p);
        }
        (void)lo;
        (void)hi;
      }
      if (acc.empty()) return Int(0);
      // count distinct nonzero roots of acc
      UPoly g = ugcd(acc, uderiv(acc));
      long deg = static_cast<long>(acc.size()) - 1;
      long deg_g = g.empty() ? 0 : static_cast<long>(g.size()) - 1;
      long distinct = deg - deg_g;
      size_t z = 0;
      while (z < acc.size() && acc[z] == 0) ++z;
      if (z > 0) distinct -= 1;
      return Int(distinct);
    }
    return Int(distinct_torus_roots(combined));
  }
  throw UnsupportedClass("euler: unsupported symbol " + sym.name);
}

}  // namespace

Int euler(const VClass& x) {
  static std::map<std::string, Int> cache;
  Rat total = 0;
  for (const auto& [m, c] : x.terms()) {
    Rat term = c;  // L -> 1
    for (const auto& s : m.symbols) {
      auto it = cache.find(s->name);
      Int e;
      if (it != cache.end()) {
        e = it->second;
      } else {
        e = euler_symbol(*s);
        cache[s->name] = e;
      }
      term *= Rat(e);
    }
    total += term;
  }
  if (!is_integer(total))
    throw UnsupportedClass("euler: non-integral result");
  return num(total);
}

// ------------------------------------------------------------------ TForm

bool TForm::is_zero() const { return num_.empty(); }

void TForm::add_den_factor(int a, const Rat& b, int mult) {
  if (b == 0) throw std::invalid_argument("TForm: denominator with b = 0");
  den_[{a, b}] += mult;
  if (den_[{a, b}] == 0) den_.erase({a, b});
}

std::map<Rat, VClass> TForm::expanded_num_times(
    const std::map<std::pair<int, Rat>, int>& extra) const {
  std::map<Rat, VClass> acc = num_;
  for (const auto& [f, mult] : extra) {
    for (int i = 0; i < mult; ++i) {
      std::map<Rat, VClass> next;
      for (const auto& [e, v] : acc) {
        next[e] += v;
        VClass shifted = v.mul_L(f.first);
        auto it = next.find(e + f.second);
        if (it == next.end())
          next[e + f.second] = -shifted;
        else
          it->second += -shifted;
      }
      acc = std::move(next);
    }
  }
  for (auto it = acc.begin(); it != acc.end();) {
    if (it->second.is_zero())
      it = acc.erase(it);
    else
      ++it;
  }
  return acc;
}

TForm TForm::operator+(const TForm& o) const {
  TForm r;
  // common denominator
  std::map<std::pair<int, Rat>, int> common = den_;
  for (const auto& [f, m] : o.den_)
    common[f] = std::max(common.count(f) ? common[f] : 0, m);
  std::map<std::pair<int, Rat>, int> extra1 = common, extra2 = common;
  for (const auto& [f, m] : den_) extra1[f] -= m;
  for (const auto& [f, m] : o.den_) extra2[f] -= m;
  auto n1 = expanded_num_times(extra1);
  auto n2 = o.expanded_num_times(extra2);
  r.num_ = std::move(n1);
  for (const auto& [e, v] : n2) {
    r.num_[e] += v;
    if (r.num_[e].is_zero()) r.num_.erase(e);
  }
  for (const auto& [f, m] : common)
    if (m != 0) r.den_[f] = m;
  return r;
}

TForm TForm::operator-(const TForm& o) const {
  TForm neg;
  for (const auto& [e, v] : o.num_) neg.num_[e] = -v;
  neg.den_ = o.den_;
  return *this + neg;
}

TForm TForm::operator*(const TForm& o) const {
  TForm r;
  for (const auto& [e1, v1] : num_)
    for (const auto& [e2, v2] : o.num_) {
      VClass p = v1 * v2;
      if (p.is_zero()) continue;
      r.num_[e1 + e2] += p;
      if (r.num_[e1 + e2].is_zero()) r.num_.erase(e1 + e2);
    }
  r.den_ = den_;
  for (const auto& [f, m] : o.den_) r.den_[f] += m;
  return r;
}

TForm TForm::operator*(const VClass& c) const {
  TForm r;
  for (const auto& [e, v] : num_) {
    VClass p = v * c;
    if (!p.is_zero()) r.num_[e] = p;
  }
  r.den_ = den_;
  return r;
}

bool TForm::equals(const TForm& o) const {
  std::map<std::pair<int, Rat>, int> common = den_;
  for (const auto& [f, m] : o.den_)
    common[f] = std::max(common.count(f) ? common[f] : 0, m);
  std::map<std::pair<int, Rat>, int> extra1 = common, extra2 = common;
  for (const auto& [f, m] : den_) extra1[f] -= m;
  for (const auto& [f, m] : o.den_) extra2[f] -= m;
  return expanded_num_times(extra1) == o.expanded_num_times(extra2);
}

bool TForm::is_dagger() const {
  for (const auto& [f, m] : den_)
    if (!(f.second > 0)) return false;
  return true;
}

Int TForm::exponent_denominator() const {
  Int l = 1;
  for (const auto& [e, v] : num_) l = lcm_int(l, motint::den(e));
  for (const auto& [f, m] : den_) l = lcm_int(l, motint::den(f.second));
  return l;
}

std::map<Rat, VClass> TForm::coeffs_ascending(const Rat& max_exp) const {
  std::map<Rat, VClass> acc = num_;
  for (const auto& [f, mult] : den_) {
    if (!(f.second > 0))
      throw std::logic_error("coeffs_ascending: non-dagger factor");
    for (int i = 0; i < mult; ++i) {
      std::map<Rat, VClass> next;
      for (const auto& [e, v] : acc) {
        VClass cur = v;
        for (Rat exp = e; exp <= max_exp; exp += f.second) {
          next[exp] += cur;
          cur = cur.mul_L(f.first);
        }
      }
      acc = std::move(next);
    }
  }
  std::map<Rat, VClass> out;
  for (auto& [e, v] : acc)
    if (e <= max_exp && !v.is_zero()) out[e] = v;
  return out;
}

std::map<Rat, VClass> TForm::coeffs_descending(const Rat& min_exp) const {
  std::map<Rat, VClass> acc = num_;
  for (const auto& [f, mult] : den_) {
    if (!(f.second < 0))
      throw std::logic_error("coeffs_descending: ascending factor");
    for (int i = 0; i < mult; ++i) {
      std::map<Rat, VClass> next;
      for (const auto& [e, v] : acc) {
        VClass cur = v;
        for (Rat exp = e; exp >= min_exp; exp += f.second) {
          next[exp] += cur;
          cur = cur.mul_L(f.first);
        }
      }
      acc = std::move(next);
    }
  }
  std::map<Rat, VClass> out;
  for (auto& [e, v] : acc)
    if (e >= min_exp && !v.is_zero()) out[e] = v;
  return out;
}

namespace {

// exact division of a VClass by (1 - L^j), j a nonzero integer
VClass divide_by_one_minus_L(const VClass& v, int j) {
  if (j == 0) throw std::logic_error("division by zero factor");
  if (j < 0) {
    // 1 - L^{-k} = -L^{-k} (1 - L^k): divide by (1 - L^k), multiply by -L^k
    VClass w = divide_by_one_minus_L(v, -j);
    return (-w).mul_L(-j);
  }
  // group terms by symbol part; divide each Laurent polynomial in L
  std::map<std::vector<std::string>, std::map<int, std::pair<VMonomial, Rat>>>
      groups;
  for (const auto& [m, c] : v.terms()) {
    std::vector<std::string> key;
    for (const auto& s : m.symbols) key.push_back(s->name);
    groups[key][m.l_power] = {m, c};
  }
  VClass out;
  for (auto& [key, poly] : groups) {
    // long division from the top by (1 - L^j): quotient accumulates
    std::map<int, Rat> rem;
    VMonomial base;
    bool have_base = false;
    for (auto& [lp, mc] : poly) {
      rem[lp] = mc.second;
      if (!have_base) {
        base = mc.first;
        base.l_power = 0;
        have_base = true;
      }
    }
    int lo_exp = rem.begin()->first;
    std::map<int, Rat> quot;
    while (!rem.empty()) {
      auto top = std::prev(rem.end());
      int e = top->first;
      Rat c = top->second;
      // leading term of (1 - L^j) is -L^j
      int qe = e - j;
      if (qe < lo_exp)
        throw std::logic_error("eta: series does not telescope (inexact division)");
      Rat qc = -c;
      quot[qe] += qc;
      // rem -= qc * (L^qe - L^{qe+j}) = qc*L^qe - qc*L^{e}
      rem[qe] -= qc;
      rem[e] += qc;
      for (auto it = rem.begin(); it != rem.end();) {
        if (it->second == 0)
          it = rem.erase(it);
        else
          ++it;
      }
      if (!rem.empty() && std::prev(rem.end())->first >= e)
        throw std::logic_error("exact division failed to reduce degree");
    }
    VClass symprod(1);
    for (const auto& sp : base.symbols) symprod = symprod * VClass::symbol(sp);
    for (const auto& [qe, qc] : quot) {
      if (qc == 0) continue;
      out += (VClass(qc).mul_L(qe)) * symprod;
    }
  }
  return out;
}

}  // namespace

VClass exact_div_one_minus_L(const VClass& v, int j) {
  return divide_by_one_minus_L(v, j);
}

VClass TForm::eta() const {
  VClass acc;
  // numerator: T^e -> L^e
  for (const auto& [e, v] : num_) {
    if (!is_integer(e))
      throw NonIntegralExponent("eta: non-integral exponent " +
                                rat_to_string(e));
    acc += v.mul_L(static_cast<int>(to_long(motint::num(e))));
  }
  // denominators: (1 - L^a T^b) -> (1 - L^{a+b}), divided out exactly
  for (const auto& [f, mult] : den_) {
    if (!is_integer(f.second))
      throw NonIntegralExponent("eta: non-integral denominator exponent");
    int j = f.first + static_cast<int>(to_long(motint::num(f.second)));
    if (j == 0)
      throw PoleAtInfinity("eta: denominator factor vanishes at T = L");
    for (int i = 0; i < mult; ++i) acc = divide_by_one_minus_L(acc, j);
  }
  return acc;
}

VClass TForm::neg_lim() const {
  if (!is_dagger())
    throw PoleAtInfinity("neg_lim: form is not in the dagger ring");
  // substitute T = 1/S; each 1/(1 - L^a T^b) = prod of -L^{-a} S^b series.
  // collect coefficients of S^w for w <= 0 exactly.
  std::map<Rat, VClass> low;  // exponent -> coefficient, exponents <= 0
  std::vector<std::pair<std::pair<int, Rat>, int>> factors(den_.begin(),
                                                           den_.end());
  for (const auto& [e, v] : num_) {
    // base S-exponent: -e + sum b_i over all factor copies; coefficient
    // gains prod(-L^{-a_i}); then extra n_i >= 0 copies of (L^{-a_i} S^{b_i})
    Rat base_exp = -e;
    VClass base_coeff = v;
    for (const auto& [f, mult] : factors) {
      for (int i = 0; i < mult; ++i) {
        base_exp += f.second;
        base_coeff = -(base_coeff.mul_L(-f.first));
      }
    }
    // enumerate additional multiples
    std::function<void(size_t, int, const Rat&, const VClass&)> rec =
        [&](size_t fi, int copy, const Rat& exp, const VClass& coeff) {
          if (exp > 0) return;  // beyond S^0: irrelevant for the limit
          if (fi == factors.size()) {
            low[exp] += coeff;
            return;
          }
          const auto& [f, mult] = factors[fi];
          if (copy == mult) {
            rec(fi + 1, 0, exp, coeff);
            return;
          }
          // n extra steps of this factor copy
          Rat e2 = exp;
          VClass c2 = coeff;
          while (true) {
            rec(fi, copy + 1, e2, c2);
            e2 += f.second;
            c2 = c2.mul_L(-f.first);
            if (e2 > 0) break;
          }
        };
    rec(0, 0, base_exp, base_coeff);
  }
  VClass at_zero;
  for (const auto& [w, c] : low) {
    if (c.is_zero()) continue;
    if (w < 0)
      throw PoleAtInfinity("neg_lim: pole at T = infinity (S^" +
                           rat_to_string(w) + " term remains)");
    at_zero += c;
  }
  return -at_zero;
}

VClass neg_lim(const TForm& f) { return f.neg_lim(); }

std::string TForm::to_string() const {
  std::ostringstream os;
  if (num_.empty()) return "0";
  os << "(";
  bool first = true;
  for (const auto& [e, v] : num_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << v.to_string() << ")";
    if (e != 0) os << "*T^" << rat_to_string(e);
  }
  os << ")";
  for (const auto& [f, m] : den_) {
    os << " / (1 - ";
    if (f.first != 0) os << "L^" << f.first << " ";
    os << "T^" << rat_to_string(f.second) << ")";
    if (m > 1) os << "^" << m;
  }
  return os.str();
}

std::string TForm::to_latex() const {
  std::ostringstream os;
  if (num_.empty()) return "0";
  os << "\\frac{";
  bool first = true;
  for (const auto& [e, v] : num_) {
    if (!first) os << " + ";
    first = false;
    os << "\\left(" << v.to_latex() << "\\right)";
    if (e != 0) os << " T^{" << rat_to_string(e) << "}";
  }
  os << "}{";
  if (den_.empty()) os << "1";
  for (const auto& [f, m] : den_) {
    os << "\\left(1 - \\mathds{L}^{" << f.first << "} T^{"
       << rat_to_string(f.second) << "}\\right)";
    if (m > 1) os << "^{" << m << "}";
  }
  os << "}";
  return os.str();
}

// ---------------------------------------------------------------- streams

CoeffStream stream_of(const TForm& f) {
  CoeffStream s;
  s.closed = f;
  TForm copy = f;
  s.at = [copy](long m) {
    auto coeffs = copy.coeffs_ascending(Rat(m));
    auto it = coeffs.find(Rat(m));
    return it == coeffs.end() ? VClass() : it->second;
  };
  return s;
}

CoeffStream hadamard(const CoeffStream& a, const CoeffStream& b) {
  CoeffStream s;
  auto fa = a.at, fb = b.at;
  s.at = [fa, fb](long m) { return fa(m) * fb(m); };
  if (!a.closed || !b.closed) return s;
  const TForm& A = *a.closed;
  const TForm& B = *b.closed;
  if (A.den().size() > 1 || B.den().size() > 1) return s;
  for (const auto& [f, m] : A.den())
    if (m != 1 || !is_integer(f.second)) return s;
  for (const auto& [f, m] : B.den())
    if (m != 1 || !is_integer(f.second)) return s;
  // period: lcm of the factor T-exponents (1 when no denominator)
  long ba = 1, bb = 1;
  int aa = 0, ab = 0;
  for (const auto& [f, m] : A.den()) {
    ba = to_long(num(f.second));
    aa = f.first;
  }
  for (const auto& [f, m] : B.den()) {
    bb = to_long(num(f.second));
    ab = f.first;
  }
  for (const auto& [e, v] : A.num())
    if (!is_integer(e)) return s;
  for (const auto& [e, v] : B.num())
    if (!is_integer(e)) return s;
  long period = std::lcm(ba, bb);
  long max_num_exp = 0;
  for (const auto& [e, v] : A.num()) max_num_exp = std::max(max_num_exp, to_long(num(e)));
  for (const auto& [e, v] : B.num()) max_num_exp = std::max(max_num_exp, to_long(num(e)));
  long start = max_num_exp + period + 1;
  // ratio per period step
  int lam = aa * static_cast<int>(period / ba) + ab * static_cast<int>(period / bb);
  TForm closed;
  bool geometric_tail = !A.den().empty() || !B.den().empty();
  // transient part: coefficients below start + one period
  for (long m = 1; m < start + period; ++m) {
    VClass c = s.at(m);
    if (m < start) {
      if (!c.is_zero()) closed = closed + TForm::monomial(c, Rat(m));
    } else {
      // geometric tail starting at m over this residue class
      TForm tail = TForm::monomial(c, Rat(m));
      if (geometric_tail) tail.add_den_factor(lam, Rat(period));
      closed = closed + tail;
    }
  }
  // verification over two extra periods
  auto check = stream_of(closed);
  for (long m = 1; m <= start + 3 * period; ++m)
    if (!(check.at(m) == s.at(m))) return s;
  s.closed = closed;
  return s;
}

// ------------------------------------------------------------ SymbolTable

SymbolPtr SymbolTable::intern(const std::string& name, int torus_dim,
                              std::vector<LPoly> equations, long action_order,
                              bool nondegenerate,
                              const std::string& display_name) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    const auto& s = *it->second;
    if (s.torus_dim != torus_dim || !(s.equations == equations) ||
        s.action_order != action_order)
      throw std::logic_error("symbol name collision: " + name);
    return it->second;
  }
  auto s = std::make_shared<VarietySymbol>();
  s->name = name;
  s->torus_dim = torus_dim;
  s->equations = std::move(equations);
  s->action_order = action_order;
  s->nondegenerate = nondegenerate;
  s->display_name = display_name.empty() ? name : display_name;
  by_name_[name] = s;
  return s;
}

SymbolPtr SymbolTable::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

std::vector<SymbolPtr> SymbolTable::all() const {
  std::vector<SymbolPtr> out;
  for (const auto& [n, s] : by_name_) out.push_back(s);
  return out;
}

}  // namespace motint
