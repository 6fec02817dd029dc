#include "liefam/poly.hpp"

#include <cstdio>
#include <limits>
#include <unordered_map>

namespace liefam {

namespace {

constexpr double kMaxExpandedTerms = 4096;

std::string pad(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", v);
  return buf;
}

std::string var_key(const Symbol& s) {
  switch (s.kind) {
    case SymbolKind::Time:
      return "0t";
    case SymbolKind::Opaque:
      return "1" + s.name + "#" + pad(s.order);
    case SymbolKind::Param:
      return "2" + s.name;
    case SymbolKind::State:
      return "3" + pad(s.copy) + "_" + pad(s.coord);
  }
  return "?";
}

AtomPtr make_composite(AtomKind kind, Poly arg, long root = 0, const Poly* arg2 = nullptr) {
  auto a = std::make_shared<Atom>();
  a->kind = kind;
  a->root = root;
  a->state_dependent = arg.depends_on_state() || (arg2 && arg2->depends_on_state());
  static const char* tags[] = {"", "5E", "6L", "7S", "8C", "9R", "AB", "BP"};
  a->key = tags[static_cast<int>(kind)];
  if (kind == AtomKind::Root) a->key += std::to_string(root);
  a->key += "[" + arg.key();
  if (arg2) a->key += "|" + arg2->key();
  a->key += "]";
  a->arg = std::make_shared<const Poly>(std::move(arg));
  if (arg2) a->arg2 = std::make_shared<const Poly>(*arg2);
  return a;
}

Poly::Monomial multiply(const Poly::Monomial& a, const Poly::Monomial& b) {
  Poly::Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].atom->key < b[j].atom->key)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].atom->key < a[i].atom->key) {
      out.push_back(b[j++]);
    } else {
      long e = a[i].exponent + b[j].exponent;
      if (e != 0) out.push_back({a[i].atom, e});
      ++i;
      ++j;
    }
  }
  return out;
}

Poly::Monomial monomial_pow(const Poly::Monomial& m, long n) {
  Poly::Monomial out = m;
  for (auto& f : out) f.exponent *= n;
  return out;
}

Rational rational_pow(const Rational& base, long n) {
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), k);
  Rational r = n < 0 ? Rational(den, num) : Rational(num, den);
  r.canonicalize();
  return r;
}

// P = c * g * B with g a monomial and B having leading coefficient 1 and no
// common monomial factor.
struct BaseSplit {
  Rational c;
  Poly::Monomial g;
  Poly base;
};

BaseSplit split_base(const Poly& p) {
  std::map<std::string, Poly::Factor> mins;
  for (const auto& [m, c] : p.terms())
    for (const auto& f : m) mins.emplace(f.atom->key, Poly::Factor{f.atom, 0});
  // Absent atoms count as exponent 0.
  for (auto it = mins.begin(); it != mins.end();) {
    long mn = std::numeric_limits<long>::max();
    for (const auto& [m, c] : p.terms()) {
      long e = 0;
      for (const auto& f : m)
        if (f.atom->key == it->first) e = f.exponent;
      mn = std::min(mn, e);
    }
    it->second.exponent = mn;
    it = mn == 0 ? mins.erase(it) : std::next(it);
  }
  BaseSplit out;
  for (const auto& [k, f] : mins) out.g.push_back(f);
  Poly::Monomial ginv = monomial_pow(out.g, -1);
  Poly b;
  for (const auto& [m, c] : p.terms()) b.add_term(multiply(m, ginv), c);
  out.c = b.terms().begin()->second;
  out.base = b.scaled(1 / out.c);
  return out;
}

double expansion_estimate(std::size_t terms, long n) {
  double est = 1.0;
  for (long k = 1; k <= n; ++k) est = est * static_cast<double>(terms + k - 1) / static_cast<double>(k);
  return est;
}

Poly perfect_root(const Rational& c, long q, bool& ok) {
  ok = false;
  if (sgn(c) < 0 && q % 2 == 0) return {};
  mpz_class num = abs(c.get_num()), den = c.get_den(), rn, rd;
  if (!mpz_root(rn.get_mpz_t(), num.get_mpz_t(), static_cast<unsigned long>(q))) return {};
  if (!mpz_root(rd.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(q))) return {};
  ok = true;
  Rational r(rn, rd);
  r.canonicalize();
  return Poly::constant(sgn(c) < 0 ? Rational(-r) : r);
}

// A^(p/q) with q > 1 coprime to p.
Poly rational_power(const Poly& a, long p, long q) {
  if (a.is_zero()) return p > 0 ? Poly() : Poly::atom(make_composite(AtomKind::Root, a, q), p);
  if (a.is_constant()) {
    bool ok = false;
    Poly r = perfect_root(a.constant_term(), q, ok);
    if (ok) return r.pow(p);
  }
  long whole = p >= 0 ? p / q : -((-p + q - 1) / q);
  long rest = p - whole * q;
  Poly out = a.pow(whole);
  if (rest != 0) out = out * Poly::atom(make_composite(AtomKind::Root, a, q), rest);
  return out;
}

Poly exp_of(const Poly& a) {
  Poly out = Poly::constant(1);
  for (const auto& [m, c] : a.terms()) {
    Poly arg;
    arg.add_term(m, Rational(1, c.get_den()));
    if (!c.get_num().fits_slong_p()) throw InvalidArgument("exponent coefficient too large");
    out = out * Poly::atom(make_composite(AtomKind::Exp, arg), c.get_num().get_si());
  }
  return out;
}

Poly general_power(const Poly& a, const Poly& b) {
  if (b.is_constant()) {
    Rational e = b.constant_term();
    if (e.get_num().fits_slong_p() && e.get_den().fits_slong_p()) {
      if (e.get_den() == 1) return a.pow(e.get_num().get_si());
      return rational_power(a, e.get_num().get_si(), e.get_den().get_si());
    }
  }
  return Poly::atom(make_composite(AtomKind::Power, a, 0, &b));
}

class Converter {
 public:
  Poly operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Poly p = convert(e);
    memo_.emplace(e.id(), p);
    return p;
  }

 private:
  Poly convert(const Expr& e) {
    switch (e.op()) {
      case Op::Rational:
        return Poly::constant(e.rational());
      case Op::Float:
        return Poly::constant(Rational(e.float_value()));
      case Op::Symbol:
        return Poly::variable(e.symbol());
      case Op::Neg:
        return -(*this)(e.arg(0));
      case Op::Add:
        return (*this)(e.arg(0)) + (*this)(e.arg(1));
      case Op::Sub:
        return (*this)(e.arg(0)) - (*this)(e.arg(1));
      case Op::Mul:
        return (*this)(e.arg(0)) * (*this)(e.arg(1));
      case Op::Div:
        return (*this)(e.arg(0)) * (*this)(e.arg(1)).pow(-1);
      case Op::IntPow:
        return (*this)(e.arg(0)).pow(e.exponent());
      case Op::RealPow:
        return general_power((*this)(e.arg(0)), (*this)(e.arg(1)));
      case Op::Sqrt:
        return rational_power((*this)(e.arg(0)), 1, 2);
      case Op::Exp:
        return exp_of((*this)(e.arg(0)));
      case Op::Ln:
        return Poly::atom(make_composite(AtomKind::Ln, (*this)(e.arg(0))));
      case Op::Sin:
        return Poly::atom(make_composite(AtomKind::Sin, (*this)(e.arg(0))));
      case Op::Cos:
        return Poly::atom(make_composite(AtomKind::Cos, (*this)(e.arg(0))));
    }
    return {};
  }

  std::unordered_map<const void*, Poly> memo_;
};

}  // namespace

bool Poly::MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = a[i].atom->key.compare(b[i].atom->key); c != 0) return c < 0;
    if (a[i].exponent != b[i].exponent) return a[i].exponent < b[i].exponent;
  }
  return a.size() < b.size();
}

Poly Poly::constant(const Rational& c) {
  Poly p;
  p.add_term({}, c);
  return p;
}

Poly Poly::atom(AtomPtr a, long exponent) {
  Poly p;
  if (exponent == 0) return constant(1);
  p.add_term({{std::move(a), exponent}}, 1);
  return p;
}

Poly Poly::variable(const Symbol& s) {
  auto a = std::make_shared<Atom>();
  a->kind = AtomKind::Var;
  a->sym = s;
  a->key = var_key(s);
  a->state_dependent = s.is_state();
  return atom(std::move(a));
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Poly::constant_term() const {
  auto it = terms_.find(Monomial{});
  return it == terms_.end() ? Rational(0) : it->second;
}

const std::string& Poly::key() const {
  if (key_.empty()) {
    std::string k = "{";
    for (const auto& [m, c] : terms_) {
      k += c.get_str() + "*";
      for (const auto& f : m) k += f.atom->key + "^" + std::to_string(f.exponent) + ".";
      k += ";";
    }
    key_ = k + "}";
  }
  return key_;
}

bool Poly::depends_on_state() const {
  for (const auto& [m, c] : terms_)
    for (const auto& f : m)
      if (f.atom->state_dependent) return true;
  return false;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (sgn(c) == 0) return;
  key_.clear();
  auto [it, inserted] = terms_.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly p = *this;
  for (auto& [m, c] : p.terms_) c = -c;
  p.key_.clear();
  return p;
}

Poly& Poly::operator+=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

namespace {

// Index of a root factor whose exponent reaches its index q, or -1.
int oversized_root(const Poly::Monomial& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Atom& a = *m[i].atom;
    if (a.kind == AtomKind::Root && (m[i].exponent >= a.root || m[i].exponent <= -a.root))
      return static_cast<int>(i);
  }
  return -1;
}

// c * m with root^e rewritten as arg^(e / q) * root^(e % q).
Poly reduce_roots(const Poly::Monomial& m, const Rational& c) {
  int i = oversized_root(m);
  if (i < 0) {
    Poly p;
    p.add_term(m, c);
    return p;
  }
  const Poly::Factor& f = m[static_cast<std::size_t>(i)];
  const long whole = f.exponent / f.atom->root, rest = f.exponent % f.atom->root;
  Poly::Monomial left = m;
  if (rest == 0) left.erase(left.begin() + i);
  else left[static_cast<std::size_t>(i)].exponent = rest;
  return reduce_roots(left, c) * f.atom->arg->pow(whole);
}

}  // namespace

Poly operator*(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      Poly::Monomial m = multiply(ma, mb);
      if (oversized_root(m) < 0) out.add_term(m, ca * cb);
      else out += reduce_roots(m, ca * cb);
    }
  return out;
}

Poly Poly::scaled(const Rational& c) const {
  if (sgn(c) == 0) return {};
  Poly p = *this;
  for (auto& [m, v] : p.terms_) v *= c;
  p.key_.clear();
  return p;
}

Poly Poly::pow(long n) const {
  if (n == 0) return constant(1);
  if (n == 1) return *this;
  if (is_monomial()) {
    const auto& [m, c] = *terms_.begin();
    return reduce_roots(monomial_pow(m, n), rational_pow(c, n));
  }
  if (is_zero()) {
    if (n > 0) return {};
    throw DomainError("zero raised to a negative power", "0");
  }
  if (n > 0 && expansion_estimate(terms_.size(), n) <= kMaxExpandedTerms) {
    Poly out = constant(1), base = *this;
    for (long k = n; k > 0; k >>= 1) {
      if (k & 1) out = out * base;
      if (k > 1) base = base * base;
    }
    return out;
  }
  BaseSplit s = split_base(*this);
  Poly out;
  out.add_term(monomial_pow(s.g, n), rational_pow(s.c, n));
  return out * atom(make_composite(AtomKind::Base, s.base), n);
}

Poly to_poly(const Expr& e) {
  Converter c;
  return c(e);
}

namespace {

Expr atom_expr(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Var:
      return symbol(a.sym);
    case AtomKind::Exp:
      return exp(to_expr(*a.arg));
    case AtomKind::Ln:
      return ln(to_expr(*a.arg));
    case AtomKind::Sin:
      return sin(to_expr(*a.arg));
    case AtomKind::Cos:
      return cos(to_expr(*a.arg));
    case AtomKind::Root:
      if (a.root == 2) return sqrt(to_expr(*a.arg));
      return rpow(to_expr(*a.arg), rational(Rational(1, a.root)));
    case AtomKind::Base:
      return to_expr(*a.arg);
    case AtomKind::Power:
      return rpow(to_expr(*a.arg), to_expr(*a.arg2));
  }
  return {};
}

}  // namespace

namespace {

Expr monomial_expr(const Poly::Monomial& m, const Rational& coeff) {
  Expr num = rational(coeff), den = integer(1);
  for (const auto& f : m) {
    if (f.atom->kind == AtomKind::Exp) {
      num = mul(num, exp(to_expr(f.atom->arg->scaled(Rational(f.exponent)))));
    } else if (f.exponent > 0) {
      num = mul(num, ipow(atom_expr(*f.atom), f.exponent));
    } else {
      den = mul(den, ipow(atom_expr(*f.atom), -f.exponent));
    }
  }
  return div(num, den);
}

}  // namespace

Expr to_expr(const Poly::Monomial& m) { return monomial_expr(m, 1); }

Expr to_expr(const Poly& p) {
  Expr acc;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    if (first) {
      acc = monomial_expr(m, c);
      first = false;
      continue;
    }
    Expr term = monomial_expr(m, abs(c));
    acc = sgn(c) < 0 ? sub(acc, term) : add(acc, term);
  }
  return acc;
}

Expr normalize(const Expr& e) { return to_expr(to_poly(e)); }

StateSplit split_by_state(const Poly& p) {
  StateSplit out;
  for (const auto& [m, c] : p.terms()) {
    Poly::Monomial state, rest;
    for (const auto& f : m) {
      if (f.atom->state_dependent) {
        state.push_back(f);
        if (f.atom->kind != AtomKind::Var) out.composite_state = true;
      } else {
        rest.push_back(f);
      }
    }
    out.coeffs[state].add_term(rest, c);
  }
  for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
    it = it->second.is_zero() ? out.coeffs.erase(it) : std::next(it);
  return out;
}

std::string to_string(const Poly::Monomial& m) { return to_string(to_expr(m)); }

}  // namespace liefam
