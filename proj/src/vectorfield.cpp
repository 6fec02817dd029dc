#include "liefam/vectorfield.hpp"

namespace liefam {

namespace {

void require_same_shape(const ProlongedField& a, const ProlongedField& b) {
  if (a.n != b.n || a.m != b.m)
    throw InvalidArgument("vector fields live on different spaces (n, m) = (" +
                          std::to_string(a.n) + ", " + std::to_string(a.m) + ") vs (" +
                          std::to_string(b.n) + ", " + std::to_string(b.m) + ")");
}

ProlongedField lift(const TDVectorField& y, int m, Expr dt) {
  if (m < 0) throw InvalidArgument("number of copies must be non-negative");
  ProlongedField p = ProlongedField::zero(y.n, m);
  p.dt = std::move(dt);
  for (int a = 0; a <= m; ++a)
    for (int i = 1; i <= y.n; ++i) p.coeff(a, i) = move_copy(y[i - 1], y.n, 0, a);
  return p;
}

Expr tidy(const Expr& e, const EqualityConfig& cfg) {
  if (e.is_rational()) return e;
  Expr out = e;
  try {
    Poly p = to_poly(e);
    if (p.is_zero()) return Expr();
    out = to_expr(p);
    if (!p.is_constant() && is_zero(p, cfg)) return Expr();
  } catch (const DomainError&) {
  } catch (const InconclusiveError&) {
  }
  return out;
}

}  // namespace

TDVectorField::TDVectorField(std::vector<Expr> c) : n(static_cast<int>(c.size())), coeffs(std::move(c)) {
  if (coeffs.empty()) throw InvalidArgument("a vector field needs at least one component");
  for (const auto& e : coeffs)
    for (const auto& s : free_symbols(e))
      if (s.is_state() && (s.copy != 0 || s.coord > n))
        throw InvalidArgument("field coefficient references " + to_string(s) +
                              "; only copy 0 coordinates 1.." + std::to_string(n) + " allowed");
}

TDVectorField parse_field(const std::vector<std::string>& components, const ParseContext& ctx) {
  ParseContext c = ctx;
  c.n = static_cast<int>(components.size());
  c.m = 0;
  std::vector<Expr> out;
  for (const auto& s : components) out.push_back(parse(s, c));
  return TDVectorField(std::move(out));
}

ProlongedField ProlongedField::zero(int n, int m) {
  ProlongedField p;
  p.n = n;
  p.m = m;
  p.coeffs.assign(static_cast<std::size_t>(m + 1), std::vector<Expr>(static_cast<std::size_t>(n)));
  return p;
}

ProlongedField autonomize(const TDVectorField& y) { return lift(y, 0, integer(1)); }
ProlongedField prolong(const TDVectorField& y, int m) { return lift(y, m, Expr()); }
ProlongedField time_prolong(const TDVectorField& y, int m) { return lift(y, m, integer(1)); }

Expr apply(const ProlongedField& a, const Expr& f, const DiffOptions& diff) {
  std::vector<Expr> terms;
  if (!(a.dt.is_rational(0))) terms.push_back(mul(a.dt, differentiate(f, Symbol::time(), diff)));
  for (const auto& s : free_symbols(f)) {
    if (!s.is_state()) continue;
    if (s.copy > a.m || s.coord > a.n)
      throw InvalidArgument("function depends on " + to_string(s) + " outside the field's space");
    const Expr& c = a.coeff(s.copy, s.coord);
    if (c.is_rational(0)) continue;
    terms.push_back(mul(c, differentiate(f, s, diff)));
  }
  return sum(terms);
}

ProlongedField lie_bracket(const ProlongedField& a, const ProlongedField& b,
                           const EqualityConfig& cfg, const DiffOptions& diff) {
  require_same_shape(a, b);
  ProlongedField c = ProlongedField::zero(a.n, a.m);
  c.dt = tidy(sub(apply(a, b.dt, diff), apply(b, a.dt, diff)), cfg);
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i)
      c.coeff(k, i) = tidy(sub(apply(a, b.coeff(k, i), diff), apply(b, a.coeff(k, i), diff)), cfg);
  return c;
}

ProlongedField operator+(const ProlongedField& a, const ProlongedField& b) {
  require_same_shape(a, b);
  ProlongedField c = ProlongedField::zero(a.n, a.m);
  c.dt = add(a.dt, b.dt);
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i) c.coeff(k, i) = add(a.coeff(k, i), b.coeff(k, i));
  return c;
}

ProlongedField operator-(const ProlongedField& a, const ProlongedField& b) {
  require_same_shape(a, b);
  ProlongedField c = ProlongedField::zero(a.n, a.m);
  c.dt = sub(a.dt, b.dt);
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i) c.coeff(k, i) = sub(a.coeff(k, i), b.coeff(k, i));
  return c;
}

ProlongedField scale(const Expr& f, const ProlongedField& a) {
  ProlongedField c = ProlongedField::zero(a.n, a.m);
  c.dt = mul(f, a.dt);
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i) c.coeff(k, i) = mul(f, a.coeff(k, i));
  return c;
}

ProlongedField linear_combination(const std::vector<Expr>& coefficients,
                                  const std::vector<ProlongedField>& fields) {
  if (coefficients.size() != fields.size() || fields.empty())
    throw InvalidArgument("linear combination needs one coefficient per field");
  ProlongedField acc = scale(coefficients[0], fields[0]);
  for (std::size_t j = 1; j < fields.size(); ++j) acc = acc + scale(coefficients[j], fields[j]);
  return acc;
}

ProlongedField simplify(const ProlongedField& a, const EqualityConfig& cfg) {
  ProlongedField c = a;
  c.dt = tidy(a.dt, cfg);
  for (auto& block : c.coeffs)
    for (auto& e : block) e = tidy(e, cfg);
  return c;
}

bool is_zero(const ProlongedField& a, const EqualityConfig& cfg) {
  if (!is_zero(a.dt, cfg)) return false;
  for (const auto& block : a.coeffs)
    for (const auto& e : block)
      if (!is_zero(e, cfg)) return false;
  return true;
}

bool equivalent(const ProlongedField& a, const ProlongedField& b, const EqualityConfig& cfg) {
  return is_zero(a - b, cfg);
}

Expr move_copy(const Expr& e, int n, int from, int to) {
  if (from == to) return e;
  Substitution s;
  for (int i = 1; i <= n; ++i) s[Symbol::state(from, i)] = state_var(to, i);
  return substitute(e, s);
}

bool is_slot_coherent(const ProlongedField& a, const EqualityConfig& cfg) {
  const int fresh = a.m + 1;
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i)
      for (const auto& s : free_symbols(a.coeff(k, i)))
        if (s.is_state() && s.copy != k) return false;
  for (int k = 1; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i) {
      Expr base = move_copy(a.coeff(0, i), a.n, 0, fresh);
      Expr here = move_copy(a.coeff(k, i), a.n, k, fresh);
      if (!is_zero(sub(here, base), cfg)) return false;
    }
  return true;
}

bool is_pure_prolongation(const ProlongedField& a, const EqualityConfig& cfg) {
  return is_zero(a.dt, cfg) && is_slot_coherent(a, cfg);
}

bool is_time_prolongation(const ProlongedField& a, const EqualityConfig& cfg) {
  return is_zero(sub(a.dt, integer(1)), cfg) && is_slot_coherent(a, cfg);
}

TDVectorField base_field(const ProlongedField& a) { return TDVectorField(a.coeffs[0]); }

std::string to_string(const ProlongedField& a, const ParseContext& ctx) {
  ParseContext c = ctx;
  c.n = a.n;
  c.m = a.m;
  auto names = c.effective_coord_names();
  std::string out = "d/dt: " + to_string(a.dt, c);
  for (int k = 0; k <= a.m; ++k)
    for (int i = 1; i <= a.n; ++i) {
      std::string coord = names.empty() ? "x" + std::to_string(k) + "_" + std::to_string(i)
                                        : names[i - 1] + std::to_string(k);
      out += "\nd/d" + coord + ": " + to_string(a.coeff(k, i), c);
    }
  return out;
}

std::string to_string(const TDVectorField& y, const ParseContext& ctx) {
  ParseContext c = ctx;
  c.n = y.n;
  std::string out;
  for (int i = 0; i < y.n; ++i) out += (i ? "; " : "") + to_string(y.coeffs[i], c);
  return out;
}

}  // namespace liefam
