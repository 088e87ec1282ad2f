#include "motint/gammaring.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace motint {

// ------------------------------------------------------------------ StepFn

void StepFn::canonicalize() {
  for (size_t i = 0; i < breaks_.size();) {
    if (point_vals_[i] == interval_vals_[i] &&
        interval_vals_[i] == interval_vals_[i + 1]) {
      breaks_.erase(breaks_.begin() + i);
      point_vals_.erase(point_vals_.begin() + i);
      interval_vals_.erase(interval_vals_.begin() + i + 1);
    } else {
      ++i;
    }
  }
}

StepFn StepFn::from_samples(const std::vector<Rat>& breaks,
                            const std::vector<long>& point_vals,
                            const std::vector<long>& interval_vals) {
  StepFn f;
  f.breaks_ = breaks;
  f.point_vals_ = point_vals;
  f.interval_vals_ = interval_vals;
  f.canonicalize();
  return f;
}

StepFn StepFn::constant(long v) {
  StepFn f;
  f.interval_vals_ = {v};
  return f;
}

StepFn StepFn::point(const Rat& g, long v) {
  StepFn f;
  f.breaks_ = {g};
  f.point_vals_ = {v};
  f.interval_vals_ = {0, 0};
  f.canonicalize();
  return f;
}

StepFn StepFn::open_interval(const Rat& a, const Rat& b, long v) {
  if (!(a < b)) throw std::invalid_argument("open_interval: need a < b");
  StepFn f;
  f.breaks_ = {a, b};
  f.point_vals_ = {0, 0};
  f.interval_vals_ = {0, v, 0};
  f.canonicalize();
  return f;
}

StepFn StepFn::ray_above(const Rat& g, long v) {
  StepFn f;
  f.breaks_ = {g};
  f.point_vals_ = {0};
  f.interval_vals_ = {0, v};
  f.canonicalize();
  return f;
}

long StepFn::value_at(const Rat& x) const {
  size_t lo = 0, hi = breaks_.size();
  while (lo < hi) {  // first break >= x
    size_t mid = (lo + hi) / 2;
    if (breaks_[mid] < x)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < breaks_.size() && breaks_[lo] == x) return point_vals_[lo];
  return interval_vals_[lo];
}

bool StepFn::is_zero() const {
  for (long v : point_vals_)
    if (v != 0) return false;
  for (long v : interval_vals_)
    if (v != 0) return false;
  return true;
}

bool StepFn::doubly_bounded_support() const {
  return interval_vals_.front() == 0 && interval_vals_.back() == 0;
}

StepFn StepFn::operator+(const StepFn& o) const {
  std::vector<Rat> breaks;
  std::merge(breaks_.begin(), breaks_.end(), o.breaks_.begin(),
             o.breaks_.end(), std::back_inserter(breaks));
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<long> pv, iv;
  for (const auto& b : breaks) pv.push_back(value_at(b) + o.value_at(b));
  for (size_t i = 0; i <= breaks.size(); ++i) {
    Rat sample;
    if (breaks.empty())
      sample = 0;
    else if (i == 0)
      sample = breaks[0] - 1;
    else if (i == breaks.size())
      sample = breaks.back() + 1;
    else
      sample = (breaks[i - 1] + breaks[i]) / 2;
    iv.push_back(value_at(sample) + o.value_at(sample));
  }
  return from_samples(breaks, pv, iv);
}

StepFn StepFn::operator-(const StepFn& o) const { return *this + o * -1; }

StepFn StepFn::operator*(long s) const {
  StepFn f = *this;
  if (s == 0) return StepFn();
  for (auto& v : f.point_vals_) v *= s;
  for (auto& v : f.interval_vals_) v *= s;
  return f;
}

bool StepFn::operator==(const StepFn& o) const {
  return breaks_ == o.breaks_ && point_vals_ == o.point_vals_ &&
         interval_vals_ == o.interval_vals_;
}

std::vector<StepFn::Piece> StepFn::pieces() const {
  std::vector<Piece> out;
  if (breaks_.empty()) {
    if (interval_vals_[0] != 0)
      out.push_back({SemilinearSet::whole(1), interval_vals_[0]});
    return out;
  }
  if (interval_vals_[0] != 0)
    out.push_back({SemilinearSet::interval(std::nullopt, true, breaks_[0], true),
                   interval_vals_[0]});
  for (size_t i = 0; i < breaks_.size(); ++i) {
    if (point_vals_[i] != 0) {
      RatVec p(1);
      p(0) = breaks_[i];
      out.push_back({SemilinearSet::point(p), point_vals_[i]});
    }
    if (interval_vals_[i + 1] != 0) {
      std::optional<Rat> hi;
      if (i + 1 < breaks_.size()) hi = breaks_[i + 1];
      out.push_back(
          {SemilinearSet::interval(breaks_[i], true, hi, true),
           interval_vals_[i + 1]});
    }
  }
  return out;
}

std::string StepFn::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const std::string& sup, long v) {
    if (v == 0) return;
    if (!first) os << " + ";
    first = false;
    if (v != 1) os << v << "*";
    os << sup;
  };
  if (breaks_.empty()) {
    emit("1 on Q", interval_vals_[0]);
    return os.str();
  }
  emit("1 on (-inf," + rat_to_string(breaks_[0]) + ")", interval_vals_[0]);
  for (size_t i = 0; i < breaks_.size(); ++i) {
    emit("1 at " + rat_to_string(breaks_[i]), point_vals_[i]);
    std::string hi =
        i + 1 < breaks_.size() ? rat_to_string(breaks_[i + 1]) : "inf";
    emit("1 on (" + rat_to_string(breaks_[i]) + "," + hi + ")",
         interval_vals_[i + 1]);
  }
  return os.str();
}

StepFn basis_p(const Rat& g) { return StepFn::point(g); }
StepFn basis_q(const Rat& g) { return StepFn::ray_above(g); }
StepFn basis_r() { return StepFn::constant(1); }

StepFn basis_o(const Rat& g) {
  if (g < 0) throw std::invalid_argument("basis_o: negative radius");
  if (g == 0) return StepFn::point(Rat(0), -1);  // o_0 = -p_0
  return StepFn::open_interval(Rat(0), g);
}

// ---------------------------------------------------------- chi functional

long chi_functional(const StepFn& f, ChiVariant variant) {
  const auto& breaks = f.breakpoints();
  long acc = 0;
  if (breaks.empty()) {
    long v = f.value_at(Rat(0));
    return variant == ChiVariant::g ? -v : v;  // chi of the full line
  }
  size_t n = breaks.size();
  for (size_t i = 0; i < n; ++i) acc += f.point_val(i);
  for (size_t i = 0; i <= n; ++i) {
    long v = f.interval_val(i);
    if (v == 0) continue;
    bool ray = (i == 0) || (i == n);
    if (variant == ChiVariant::g)
      acc -= v;
    else if (!ray)
      acc -= v;
    // half-infinite pieces contribute 0 to chi_b
  }
  return acc;
}

// ------------------------------------------------------------ convolution

namespace {

// sum_m m*chi({t : f(t)*g(x-t) = m}) for one fixed x
long conv_value(const StepFn& f, const StepFn& g, const Rat& x,
                ChiVariant variant) {
  std::vector<Rat> breaks = f.breakpoints();
  for (const auto& b : g.breakpoints()) breaks.push_back(x - b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto h = [&](const Rat& t) { return f.value_at(t) * g.value_at(x - t); };
  if (breaks.empty()) {
    long v = h(Rat(0));
    return variant == ChiVariant::g ? -v : v;
  }
  long acc = 0;
  size_t n = breaks.size();
  for (size_t i = 0; i < n; ++i) acc += h(breaks[i]);
  for (size_t i = 0; i <= n; ++i) {
    Rat sample;
    if (i == 0)
      sample = breaks[0] - 1;
    else if (i == n)
      sample = breaks.back() + 1;
    else
      sample = (breaks[i - 1] + breaks[i]) / 2;
    long v = h(sample);
    if (v == 0) continue;
    bool ray = (i == 0) || (i == n);
    if (variant == ChiVariant::g)
      acc -= v;
    else if (!ray)
      acc -= v;
  }
  return acc;
}

}  // namespace

StepFn conv(const StepFn& f, const StepFn& g, ChiVariant variant) {
  std::vector<Rat> cands;
  for (const auto& a : f.breakpoints())
    for (const auto& b : g.breakpoints()) cands.push_back(a + b);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  std::vector<long> pv, iv;
  for (const auto& c : cands) pv.push_back(conv_value(f, g, c, variant));
  for (size_t i = 0; i <= cands.size(); ++i) {
    Rat sample;
    if (cands.empty())
      sample = 0;
    else if (i == 0)
      sample = cands[0] - 1;
    else if (i == cands.size())
      sample = cands.back() + 1;
    else
      sample = (cands[i - 1] + cands[i]) / 2;
    iv.push_back(conv_value(f, g, sample, variant));
  }
  return StepFn::from_samples(cands, pv, iv);
}

// ---------------------------------------------------------- decomposition

PQRDecomposition decompose_pqr(const StepFn& f) {
  PQRDecomposition d;
  const auto& breaks = f.breakpoints();
  d.r_coeff = f.interval_val(0);
  long running = d.r_coeff;
  for (size_t i = 0; i < breaks.size(); ++i) {
    long pc = f.point_val(i) - running;
    long qc = f.interval_val(i + 1) - running;
    if (pc != 0) d.p.push_back({breaks[i], pc});
    if (qc != 0) d.q.push_back({breaks[i], qc});
    running = f.interval_val(i + 1);
  }
  return d;
}

// ------------------------------------------------------------------ WClass

void WClass::add(const Rat& weight, const VClass& cls) {
  if (cls.is_zero()) return;
  terms_[weight] += cls;
  if (terms_[weight].is_zero()) terms_.erase(weight);
}

WClass WClass::operator+(const WClass& o) const {
  if (grade_ != o.grade_)
    throw std::invalid_argument("WClass: grade mismatch in sum");
  WClass r = *this;
  for (const auto& [w, c] : o.terms_) r.add(w, c);
  return r;
}

WClass WClass::operator*(const WClass& o) const {
  WClass r(grade_ + o.grade_);
  for (const auto& [w1, c1] : terms_)
    for (const auto& [w2, c2] : o.terms_) r.add(w1 + w2, c1 * c2);
  return r;
}

WClass WClass::reduce_mod_L() const {
  WClass r(grade_);
  for (const auto& [w, c] : terms_) r.add(w, c.reduce_mod_L());
  return r;
}

std::string WClass::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.to_string() << ", " << rat_to_string(w) << ")";
  }
  os << " [grade " << grade_ << "]";
  return os.str();
}

WClass psi(const StepFn& f, int k, bool reduce) {
  PQRDecomposition d = decompose_pqr(f);
  if (k == 0 && (d.r_coeff != 0 || !d.q.empty()))
    throw std::invalid_argument(
        "psi: grade 0 is only defined on the span of the p generators");
  WClass out(k);
  VClass gm = VClass::gm();
  for (const auto& [g, c] : d.p) {
    VClass cls = (k == 0) ? VClass(1) : gm.pow(k);  // Gm^{k-1} * [G_m]
    out.add(g, cls * Rat(c));
  }
  for (const auto& [g, c] : d.q) {
    VClass cls = gm.pow(k - 1);  // Gm^{k-1} * [{1}]
    out.add(g, cls * Rat(c));
  }
  // r X^k -> 0
  return reduce ? out.reduce_mod_L() : out;
}

VClass psi_db(const StepFn& f, int k) {
  if (!f.doubly_bounded_support())
    throw UnboundedSupport("psi_db: support is not doubly bounded");
  long chi = chi_functional(f, ChiVariant::b);
  return VClass::gm().pow(k) * Rat(chi);
}

long chi_quotient(const StepFn& f) {
  if (!f.doubly_bounded_support())
    throw UnboundedSupport("chi_quotient: support is not doubly bounded");
  return chi_functional(f, ChiVariant::b);
}

// ------------------------------------------------------------------ lambda

StepFn lambda_fn(const SemilinearSet& I, const AffineForm& mu,
                 ChiVariant variant) {
  int k = I.ambient_dim();
  // region {(t, x) : x in I, t = mu(x) + sum(x)} with t as coordinate 0
  std::vector<std::vector<LinConstraint>> conjs;
  AffineForm mu_i = mu + AffineForm::coordinate_sum(k, 0, k);
  for (const auto& cell : I.cells()) {
    std::vector<LinConstraint> cs;
    for (const auto& c : cell.constraints()) {
      RatVec v = RatVec::Zero(k + 1);
      for (int i = 0; i < k; ++i) v(i + 1) = c.form.coeff(i);
      cs.emplace_back(AffineForm(std::move(v), c.form.constant()), c.rel);
    }
    RatVec tv = RatVec::Zero(k + 1);
    tv(0) = 1;
    for (int i = 0; i < k; ++i) tv(i + 1) = -mu_i.coeff(i);
    cs.emplace_back(AffineForm(std::move(tv), -mu_i.constant()), Rel::EQ);
    conjs.push_back(std::move(cs));
  }
  auto cells = decompose_union(conjs, k + 1);
  // accumulate fiber chi per t-piece
  struct Contribution {
    std::optional<Rat> lo, hi;  // absent endpoint = infinite
    bool is_point;
    long value;
  };
  std::vector<Contribution> contribs;
  for (const auto& cell : cells) {
    const CylLevel& t_level = cell.levels[0];
    long mult = 1;
    for (int i = 1; i <= k; ++i) {
      const CylLevel& l = cell.levels[i];
      if (l.is_section) continue;
      if (variant == ChiVariant::g) {
        mult = -mult;
      } else {
        if (l.lo && l.hi)
          mult = -mult;
        else if (!l.lo && !l.hi)
          ;  // full line: factor 1
        else {
          mult = 0;
          break;
        }
      }
    }
    if (mult == 0) continue;
    Contribution c;
    if (t_level.is_section) {
      c.is_point = true;
      c.lo = t_level.section.constant();
    } else {
      c.is_point = false;
      if (t_level.lo) c.lo = t_level.lo->constant();
      if (t_level.hi) c.hi = t_level.hi->constant();
    }
    c.value = mult;
    contribs.push_back(std::move(c));
  }
  std::vector<Rat> breaks;
  for (const auto& c : contribs) {
    if (c.lo) breaks.push_back(*c.lo);
    if (c.hi) breaks.push_back(*c.hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto value_at = [&](const Rat& t, bool as_point) {
    long acc = 0;
    for (const auto& c : contribs) {
      if (c.is_point) {
        if (as_point && *c.lo == t) acc += c.value;
      } else {
        bool in = true;
        if (c.lo && !(t > *c.lo)) in = false;
        if (c.hi && !(t < *c.hi)) in = false;
        if (in) acc += c.value;
      }
    }
    return acc;
  };
  std::vector<long> pv, iv;
  for (const auto& b : breaks) pv.push_back(value_at(b, true));
  for (size_t i = 0; i <= breaks.size(); ++i) {
    Rat sample;
    if (breaks.empty())
      sample = 0;
    else if (i == 0)
      sample = breaks[0] - 1;
    else if (i == breaks.size())
      sample = breaks.back() + 1;
    else
      sample = (breaks[i - 1] + breaks[i]) / 2;
    iv.push_back(value_at(sample, false));
  }
  return StepFn::from_samples(breaks, pv, iv);
}

// ------------------------------------------------------------------ parser

namespace {

struct StepParser {
  const std::string& s;
  size_t pos = 0;
  ChiVariant variant;

  StepParser(const std::string& text, ChiVariant v) : s(text), variant(v) {}

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
    throw std::invalid_argument("step expression: " + msg + " at position " +
                                std::to_string(pos));
  }

  Rat parse_rat_arg() {
    skip_ws();
    size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '/'))
      ++pos;
    if (pos == start) fail("expected rational");
    return parse_rat(s.substr(start, pos - start));
  }

  struct Factor {
    bool is_scalar;
    long scalar = 1;
    StepFn fn;
  };

  Factor parse_factor() {
    skip_ws();
    if (eat('(')) {
      StepFn e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return {false, 1, std::move(e)};
    }
    if (pos < s.size() && (s[pos] == 'p' || s[pos] == 'q' || s[pos] == 'o')) {
      char kind = s[pos++];
      if (!eat('(')) fail("expected '('");
      Rat g = parse_rat_arg();
      if (!eat(')')) fail("expected ')'");
      if (kind == 'p') return {false, 1, basis_p(g)};
      if (kind == 'q') return {false, 1, basis_q(g)};
      return {false, 1, basis_o(g)};
    }
    if (pos < s.size() && s[pos] == 'r') {
      ++pos;
      return {false, 1, basis_r()};
    }
    skip_ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos == start) fail("expected factor");
    return {true, std::stol(s.substr(start, pos - start)), StepFn()};
  }

  StepFn parse_term() {
    long scalar = 1;
    std::optional<StepFn> acc;
    while (true) {
      Factor f = parse_factor();
      if (f.is_scalar)
        scalar *= f.scalar;
      else
        acc = acc ? conv(*acc, f.fn, variant) : f.fn;
      skip_ws();
      if (!eat('*')) break;
    }
    // a bare scalar means scalar * p_0, the convolution identity
    StepFn base = acc ? *acc : basis_p(Rat(0));
    return base * scalar;
  }

  StepFn parse_expr() {
    skip_ws();
    bool neg = false;
    if (eat('-')) neg = true;
    StepFn acc = parse_term();
    if (neg) acc = acc * -1;
    while (true) {
      skip_ws();
      if (eat('+')) {
        acc = acc + parse_term();
      } else if (eat('-')) {
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }
};

}  // namespace

StepFn parse_step_expr(const std::string& text, ChiVariant variant) {
  StepParser p(text, variant);
  StepFn f = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw std::invalid_argument("step expression: trailing input");
  return f;
}

}  // namespace motint
