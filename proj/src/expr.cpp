#include "liefam/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "liefam/program.hpp"

namespace liefam {

using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

// ---------------------------------------------------------------------------
// Symbol

std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) {
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  switch (a.kind) {
    case SymbolKind::Time:
      return std::strong_ordering::equal;
    case SymbolKind::Opaque:
      if (int c = a.name.compare(b.name); c != 0) return c <=> 0;
      return a.order <=> b.order;
    case SymbolKind::Param:
      return a.name.compare(b.name) <=> 0;
    case SymbolKind::State:
      if (auto c = a.copy <=> b.copy; c != 0) return c;
      return a.coord <=> b.coord;
  }
  return std::strong_ordering::equal;
}

std::string to_string(const Symbol& s) {
  switch (s.kind) {
    case SymbolKind::Time:
      return "t";
    case SymbolKind::Opaque:
      if (s.order == 0) return s.name;
      if (s.order == 1) return "d" + s.name;
      return "d" + std::to_string(s.order) + s.name;
    case SymbolKind::Param:
      return s.name;
    case SymbolKind::State:
      return "x" + std::to_string(s.copy) + "_" + std::to_string(s.coord);
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Node construction

namespace {

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

const NodePtr& zero_node() {
  static const NodePtr z = make_node(Node{});
  return z;
}

Expr unary(Op op, const Expr& a) {
  Node n;
  n.op = op;
  n.a = a.node();
  return Expr(make_node(std::move(n)));
}

Expr binary(Op op, const Expr& a, const Expr& b) {
  Node n;
  n.op = op;
  n.a = a.node();
  n.b = b.node();
  return Expr(make_node(std::move(n)));
}

bool is_numeric(const Expr& e) { return e.op() == Op::Rational || e.op() == Op::Float; }

double numeric_value(const Expr& e) {
  return e.op() == Op::Rational ? e.rational().get_d() : e.float_value();
}

bool is_zero_literal(const Expr& e) { return e.is_rational() && sgn(e.rational()) == 0; }

Rational rational_pow(const Rational& base, long n) {
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), k);
  Rational r = n < 0 ? Rational(den, num) : Rational(num, den);
  r.canonicalize();
  return r;
}

}  // namespace

Expr::Expr() : node_(zero_node()) {}

Op Expr::op() const { return node_->op; }
const Rational& Expr::rational() const { return node_->q; }
double Expr::float_value() const { return node_->f; }
const Symbol& Expr::symbol() const { return node_->sym; }
long Expr::exponent() const { return node_->n; }

Expr Expr::arg(int i) const {
  const NodePtr& p = i == 0 ? node_->a : node_->b;
  if (!p) throw InvalidArgument("expression node has no operand " + std::to_string(i));
  return Expr(p);
}

bool Expr::is_rational(long value) const { return is_rational() && rational() == value; }

int Expr::arity() const {
  switch (op()) {
    case Op::Rational:
    case Op::Float:
    case Op::Symbol:
      return 0;
    case Op::Neg:
    case Op::Exp:
    case Op::Ln:
    case Op::Sin:
    case Op::Cos:
    case Op::Sqrt:
    case Op::IntPow:
      return 1;
    default:
      return 2;
  }
}

Expr rational(const Rational& q) {
  if (sgn(q) == 0) return Expr();
  Node n;
  n.op = Op::Rational;
  n.q = q;
  n.q.canonicalize();
  return Expr(make_node(std::move(n)));
}

Expr integer(long v) { return rational(Rational(v)); }

Expr real(double v) {
  Node n;
  n.op = Op::Float;
  n.f = v;
  return Expr(make_node(std::move(n)));
}

Expr symbol(const Symbol& s) {
  Node n;
  n.op = Op::Symbol;
  n.sym = s;
  return Expr(make_node(std::move(n)));
}

Expr time_var() { return symbol(Symbol::time()); }
Expr state_var(int copy, int coord) { return symbol(Symbol::state(copy, coord)); }
Expr opaque(const std::string& name, int order) { return symbol(Symbol::opaque(name, order)); }
Expr param(const std::string& name) { return symbol(Symbol::param(name)); }

Expr neg(const Expr& a) {
  if (a.is_rational()) return rational(-a.rational());
  if (a.op() == Op::Float) return real(-a.float_value());
  if (a.op() == Op::Neg) return a.arg(0);
  return unary(Op::Neg, a);
}

Expr add(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) return rational(a.rational() + b.rational());
  if (is_numeric(a) && is_numeric(b)) return real(numeric_value(a) + numeric_value(b));
  if (is_zero_literal(a)) return b;
  if (is_zero_literal(b)) return a;
  return binary(Op::Add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) return rational(a.rational() - b.rational());
  if (is_numeric(a) && is_numeric(b)) return real(numeric_value(a) - numeric_value(b));
  if (is_zero_literal(b)) return a;
  if (is_zero_literal(a)) return neg(b);
  if (a.id() == b.id()) return Expr();
  return binary(Op::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational()) return rational(a.rational() * b.rational());
  if (is_numeric(a) && is_numeric(b)) return real(numeric_value(a) * numeric_value(b));
  if (is_zero_literal(a) || is_zero_literal(b)) return Expr();
  if (a.is_rational(1)) return b;
  if (b.is_rational(1)) return a;
  if (a.is_rational(-1)) return neg(b);
  if (b.is_rational(-1)) return neg(a);
  return binary(Op::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  if (a.is_rational() && b.is_rational() && sgn(b.rational()) != 0)
    return rational(a.rational() / b.rational());
  if (is_numeric(a) && is_numeric(b) && numeric_value(b) != 0.0)
    return real(numeric_value(a) / numeric_value(b));
  if (b.is_rational(1)) return a;
  if (b.is_rational(-1)) return neg(a);
  if (is_zero_literal(a) && !is_zero_literal(b)) return Expr();
  return binary(Op::Div, a, b);
}

Expr ipow(const Expr& base, long exponent) {
  if (exponent == 0) return integer(1);
  if (exponent == 1) return base;
  if (base.is_rational() && !(sgn(base.rational()) == 0 && exponent < 0))
    return rational(rational_pow(base.rational(), exponent));
  if (base.op() == Op::Float && !(base.float_value() == 0.0 && exponent < 0))
    return real(std::pow(base.float_value(), static_cast<double>(exponent)));
  if (base.op() == Op::IntPow) return ipow(base.arg(0), base.exponent() * exponent);
  Node n;
  n.op = Op::IntPow;
  n.a = base.node();
  n.n = exponent;
  return Expr(make_node(std::move(n)));
}

Expr rpow(const Expr& base, const Expr& exponent) {
  if (exponent.is_rational() && exponent.rational().get_den() == 1 &&
      exponent.rational().get_num().fits_slong_p())
    return ipow(base, exponent.rational().get_num().get_si());
  if (base.is_rational(1)) return integer(1);
  return binary(Op::RealPow, base, exponent);
}

Expr exp(const Expr& a) {
  if (is_zero_literal(a)) return integer(1);
  return unary(Op::Exp, a);
}

Expr ln(const Expr& a) {
  if (a.is_rational(1)) return Expr();
  return unary(Op::Ln, a);
}

Expr sin(const Expr& a) {
  if (is_zero_literal(a)) return Expr();
  return unary(Op::Sin, a);
}

Expr cos(const Expr& a) {
  if (is_zero_literal(a)) return integer(1);
  return unary(Op::Cos, a);
}

Expr sqrt(const Expr& a) {
  if (is_zero_literal(a)) return Expr();
  if (a.is_rational(1)) return integer(1);
  return unary(Op::Sqrt, a);
}

Expr sum(const std::vector<Expr>& terms) {
  Expr acc;
  for (const auto& t : terms) acc = add(acc, t);
  return acc;
}

Expr product(const std::vector<Expr>& factors) {
  Expr acc = integer(1);
  for (const auto& f : factors) acc = mul(acc, f);
  return acc;
}

// ---------------------------------------------------------------------------
// Structural queries

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Rational:
      return a.rational() == b.rational();
    case Op::Float:
      return a.float_value() == b.float_value();
    case Op::Symbol:
      return a.symbol() == b.symbol();
    case Op::IntPow:
      return a.exponent() == b.exponent() && structurally_equal(a.arg(0), b.arg(0));
    default:
      break;
  }
  if (!structurally_equal(a.arg(0), b.arg(0))) return false;
  return a.arity() == 1 || structurally_equal(a.arg(1), b.arg(1));
}

namespace {

template <typename Visit>
void visit_dag(const Expr& root, Visit&& visit) {
  std::unordered_set<const void*> seen;
  std::vector<Expr> stack{root};
  while (!stack.empty()) {
    Expr e = stack.back();
    stack.pop_back();
    if (!seen.insert(e.id()).second) continue;
    visit(e);
    for (int i = 0; i < e.arity(); ++i) stack.push_back(e.arg(i));
  }
}

}  // namespace

std::vector<Symbol> free_symbols(const Expr& e) {
  std::vector<Symbol> out;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_symbol()) out.push_back(n.symbol());
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool depends_on(const Expr& e, const Symbol& s) {
  bool found = false;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_symbol() && n.symbol() == s) found = true;
  });
  return found;
}

bool is_time_only(const Expr& e) {
  bool state = false;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_symbol() && n.symbol().is_state()) state = true;
  });
  return !state;
}

int max_opaque_order(const Expr& e) {
  int best = -1;
  visit_dag(e, [&](const Expr& n) {
    if (n.is_symbol() && n.symbol().is_opaque()) best = std::max(best, n.symbol().order);
  });
  return best;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

class Differentiator {
 public:
  Differentiator(const Symbol& var, const DiffOptions& opts) : var_(var), opts_(opts) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = compute(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::Rational:
      case Op::Float:
        return Expr();
      case Op::Symbol: {
        const Symbol& s = e.symbol();
        if (s == var_) return integer(1);
        if (var_.is_time() && s.is_opaque()) {
          if (s.order + 1 > opts_.max_opaque_order)
            throw DerivativeOrderError("derivative order of '" + s.name + "' would exceed cap " +
                                       std::to_string(opts_.max_opaque_order));
          return opaque(s.name, s.order + 1);
        }
        return Expr();
      }
      case Op::Neg:
        return neg((*this)(e.arg(0)));
      case Op::Add:
        return add((*this)(e.arg(0)), (*this)(e.arg(1)));
      case Op::Sub:
        return sub((*this)(e.arg(0)), (*this)(e.arg(1)));
      case Op::Mul: {
        Expr a = e.arg(0), b = e.arg(1);
        return add(mul((*this)(a), b), mul(a, (*this)(b)));
      }
      case Op::Div: {
        Expr a = e.arg(0), b = e.arg(1);
        Expr da = (*this)(a), db = (*this)(b);
        if (is_zero_literal(db)) return div(da, b);
        return div(sub(mul(da, b), mul(a, db)), ipow(b, 2));
      }
      case Op::IntPow: {
        Expr a = e.arg(0);
        long n = e.exponent();
        return mul(mul(integer(n), ipow(a, n - 1)), (*this)(a));
      }
      case Op::RealPow: {
        Expr a = e.arg(0), b = e.arg(1);
        Expr da = (*this)(a), db = (*this)(b);
        if (is_zero_literal(db)) return mul(mul(b, rpow(a, sub(b, integer(1)))), da);
        return mul(e, add(mul(db, ln(a)), div(mul(b, da), a)));
      }
      case Op::Exp:
        return mul(e, (*this)(e.arg(0)));
      case Op::Ln:
        return div((*this)(e.arg(0)), e.arg(0));
      case Op::Sin:
        return mul(cos(e.arg(0)), (*this)(e.arg(0)));
      case Op::Cos:
        return neg(mul(sin(e.arg(0)), (*this)(e.arg(0))));
      case Op::Sqrt:
        return div((*this)(e.arg(0)), mul(integer(2), e));
    }
    return Expr();
  }

  Symbol var_;
  DiffOptions opts_;
  std::unordered_map<const void*, Expr> memo_;
};

Expr rebuild(const Expr& e, const Expr& a, const Expr& b) {
  switch (e.op()) {
    case Op::Neg:
      return neg(a);
    case Op::Exp:
      return exp(a);
    case Op::Ln:
      return ln(a);
    case Op::Sin:
      return sin(a);
    case Op::Cos:
      return cos(a);
    case Op::Sqrt:
      return sqrt(a);
    case Op::IntPow:
      return ipow(a, e.exponent());
    case Op::Add:
      return add(a, b);
    case Op::Sub:
      return sub(a, b);
    case Op::Mul:
      return mul(a, b);
    case Op::Div:
      return div(a, b);
    case Op::RealPow:
      return rpow(a, b);
    default:
      return e;
  }
}

}  // namespace

Expr differentiate(const Expr& e, const Symbol& var, const DiffOptions& opts) {
  if (var.is_opaque())
    throw InvalidArgument("cannot differentiate with respect to opaque symbol " + to_string(var));
  Differentiator d(var, opts);
  return d(e);
}

Expr substitute(const Expr& e, const Substitution& bindings) {
  if (bindings.empty()) return e;
  std::unordered_map<const void*, Expr> memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& x) -> Expr {
    if (auto it = memo.find(x.id()); it != memo.end()) return it->second;
    Expr out;
    if (x.is_symbol()) {
      auto it = bindings.find(x.symbol());
      out = it == bindings.end() ? x : it->second;
    } else if (x.arity() == 0) {
      out = x;
    } else {
      Expr a = go(x.arg(0));
      Expr b = x.arity() == 2 ? go(x.arg(1)) : Expr();
      bool same = a.id() == x.arg(0).id() && (x.arity() == 1 || b.id() == x.arg(1).id());
      out = same ? x : rebuild(x, a, b);
    }
    memo.emplace(x.id(), out);
    return out;
  };
  return go(e);
}

// ---------------------------------------------------------------------------
// Printing

std::vector<std::string> ParseContext::effective_coord_names() const {
  if (!coord_names.empty()) return coord_names;
  if (n == 1) return {"x"};
  return {};
}

namespace {

constexpr int kPrecAdd = 1, kPrecMul = 2, kPrecNeg = 3, kPrecPow = 4, kPrecLeaf = 5;

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return kPrecAdd;
    case Op::Mul:
    case Op::Div:
      return kPrecMul;
    case Op::Neg:
      return kPrecNeg;
    case Op::IntPow:
    case Op::RealPow:
      return kPrecPow;
    default:
      return kPrecLeaf;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
  return s;
}

class Printer {
 public:
  explicit Printer(const std::vector<std::string>* names) : names_(names) {}

  /// Top level: a bare constant needs no parentheses.
  std::string top(const Expr& e) const {
    if (e.is_rational()) return e.rational().get_str();
    if (e.op() == Op::Float) return format_double(e.float_value());
    return (*this)(e);
  }

  std::string operator()(const Expr& e) const {
    switch (e.op()) {
      case Op::Rational: {
        const Rational& q = e.rational();
        if (q.get_den() == 1 && sgn(q) >= 0) return q.get_num().get_str();
        return "(" + q.get_str() + ")";
      }
      case Op::Float: {
        std::string s = format_double(e.float_value());
        return e.float_value() < 0 ? "(" + s + ")" : s;
      }
      case Op::Symbol:
        return symbol_name(e.symbol());
      case Op::Neg:
        return "-" + wrap(e.arg(0), precedence(e.arg(0)) < kPrecPow);
      case Op::Exp:
        return "exp(" + (*this)(e.arg(0)) + ")";
      case Op::Ln:
        return "ln(" + (*this)(e.arg(0)) + ")";
      case Op::Sin:
        return "sin(" + (*this)(e.arg(0)) + ")";
      case Op::Cos:
        return "cos(" + (*this)(e.arg(0)) + ")";
      case Op::Sqrt:
        return "sqrt(" + (*this)(e.arg(0)) + ")";
      case Op::Add:
        return infix(e, " + ", kPrecAdd);
      case Op::Sub:
        return infix(e, " - ", kPrecAdd);
      case Op::Mul:
        return infix(e, "*", kPrecMul);
      case Op::Div:
        return infix(e, "/", kPrecMul);
      case Op::IntPow: {
        long n = e.exponent();
        std::string ex = n < 0 ? "(" + std::to_string(n) + ")" : std::to_string(n);
        return wrap(e.arg(0), precedence(e.arg(0)) <= kPrecPow) + "^" + ex;
      }
      case Op::RealPow:
        return wrap(e.arg(0), precedence(e.arg(0)) <= kPrecPow) + "^" +
               wrap(e.arg(1), precedence(e.arg(1)) < kPrecLeaf);
    }
    return "?";
  }

 private:
  std::string wrap(const Expr& e, bool paren) const {
    return paren ? "(" + (*this)(e) + ")" : (*this)(e);
  }

  std::string infix(const Expr& e, const char* op, int prec) const {
    Expr a = e.arg(0), b = e.arg(1);
    // A leading negative coefficient reads back as the same folded constant.
    std::string left = prec == kPrecMul && a.is_rational() && sgn(a.rational()) < 0
                           ? a.rational().get_str()
                           : wrap(a, precedence(a) < prec);
    return left + op + wrap(b, precedence(b) <= prec);
  }

  std::string symbol_name(const Symbol& s) const {
    if (s.is_state() && names_ && s.coord >= 1 && s.coord <= static_cast<int>(names_->size()))
      return (*names_)[s.coord - 1] + std::to_string(s.copy);
    return to_string(s);
  }

  const std::vector<std::string>* names_;
};

}  // namespace

std::string to_string(const Expr& e) { return Printer(nullptr).top(e); }

std::string to_string(const Expr& e, const ParseContext& ctx) {
  auto names = ctx.effective_coord_names();
  return Printer(names.empty() ? nullptr : &names).top(e);
}

// ---------------------------------------------------------------------------
// Assignment / evaluation

Assignment& Assignment::set_time(double t) {
  t_ = t;
  return *this;
}

Assignment& Assignment::set_state(int copy, int coord, double value) {
  state_[{copy, coord}] = value;
  return *this;
}

Assignment& Assignment::set_param(const std::string& name, double value) {
  params_[name] = value;
  return *this;
}

Assignment& Assignment::set_jet(const std::string& name, int order, double value) {
  jets_[{name, order}] = value;
  return *this;
}

Assignment& Assignment::bind_function(const std::string& name, Realization f) {
  functions_[name] = std::move(f);
  return *this;
}

Assignment& Assignment::set(const Symbol& s, double value) {
  switch (s.kind) {
    case SymbolKind::Time:
      return set_time(value);
    case SymbolKind::State:
      return set_state(s.copy, s.coord, value);
    case SymbolKind::Param:
      return set_param(s.name, value);
    case SymbolKind::Opaque:
      return set_jet(s.name, s.order, value);
  }
  return *this;
}

bool Assignment::has(const Symbol& s) const {
  switch (s.kind) {
    case SymbolKind::Time:
      return t_.has_value();
    case SymbolKind::State:
      return state_.count({s.copy, s.coord}) > 0;
    case SymbolKind::Param:
      return params_.count(s.name) > 0;
    case SymbolKind::Opaque:
      return jets_.count({s.name, s.order}) > 0 || (functions_.count(s.name) > 0 && t_);
  }
  return false;
}

double Assignment::value_of(const Symbol& s) const {
  switch (s.kind) {
    case SymbolKind::Time:
      if (t_) return *t_;
      break;
    case SymbolKind::State:
      if (auto it = state_.find({s.copy, s.coord}); it != state_.end()) return it->second;
      break;
    case SymbolKind::Param:
      if (auto it = params_.find(s.name); it != params_.end()) return it->second;
      break;
    case SymbolKind::Opaque:
      if (auto it = jets_.find({s.name, s.order}); it != jets_.end()) return it->second;
      if (auto it = functions_.find(s.name); it != functions_.end()) {
        if (!t_) throw UnboundSymbolError("realization of '" + s.name + "' needs a value of t");
        return it->second(s.order, *t_);
      }
      break;
  }
  throw UnboundSymbolError("unbound symbol '" + to_string(s) + "'");
}

double evaluate(const Expr& e, const Assignment& a) {
  Program p(e);
  return p.run1(p.bind(a));
}

}  // namespace liefam
