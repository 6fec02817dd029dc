#pragma once

// Immutable symbolic expressions over time t, indexed state variables,
// named constants and opaque time functions with derivative chains.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "liefam/errors.hpp"

namespace liefam {

using Rational = mpq_class;

/// Kinds are declared in canonical print order.
enum class SymbolKind : std::uint8_t { Time, Opaque, Param, State };

/// A free symbol of an expression.
///
/// State variables are x[copy][coord] with copy >= 0 and 1 <= coord <= n.
/// Opaque symbols stand for an unspecified function of t and its derivative
/// of order `order` (F, dF, d2F, ...). Params are named scalars such as the
/// superposition constants k1, k2.
struct Symbol {
  SymbolKind kind = SymbolKind::Time;
  std::string name;
  int order = 0;
  int copy = 0;
  int coord = 0;

  static Symbol time() { return {}; }
  static Symbol state(int copy, int coord) { return {SymbolKind::State, {}, 0, copy, coord}; }
  static Symbol opaque(std::string name, int order = 0) {
    return {SymbolKind::Opaque, std::move(name), order, 0, 0};
  }
  static Symbol param(std::string name) { return {SymbolKind::Param, std::move(name), 0, 0, 0}; }

  bool is_time() const { return kind == SymbolKind::Time; }
  bool is_state() const { return kind == SymbolKind::State; }
  bool is_opaque() const { return kind == SymbolKind::Opaque; }
  bool is_param() const { return kind == SymbolKind::Param; }

  friend bool operator==(const Symbol& a, const Symbol& b) { return (a <=> b) == 0; }
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b);
};

/// Canonical spelling: t, x<a>_<i>, name, d<k>name.
std::string to_string(const Symbol& s);

enum class Op : std::uint8_t {
  Rational,
  Float,
  Symbol,
  Neg,
  Exp,
  Ln,
  Sin,
  Cos,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  IntPow,
  RealPow,
};

namespace detail {
struct Node;
}

/// Shared, immutable expression tree. Copies share structure.
class Expr {
 public:
  /// The rational constant 0.
  Expr();

  Op op() const;
  const Rational& rational() const;
  double float_value() const;
  const Symbol& symbol() const;
  /// Operand i of a unary/binary node (0 or 1).
  Expr arg(int i) const;
  long exponent() const;

  bool is_rational() const { return op() == Op::Rational; }
  bool is_rational(long value) const;
  bool is_symbol() const { return op() == Op::Symbol; }
  int arity() const;

  /// Node identity, stable while any copy is alive.
  const void* id() const { return node_.get(); }

  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<const detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op = Op::Rational;
  Rational q;
  double f = 0.0;
  Symbol sym;
  std::shared_ptr<const Node> a, b;
  long n = 0;
};
}  // namespace detail

// Leaf constructors.
Expr rational(const Rational& q);
Expr integer(long v);
Expr real(double v);
Expr time_var();
Expr state_var(int copy, int coord);
Expr opaque(const std::string& name, int order = 0);
Expr param(const std::string& name);
Expr symbol(const Symbol& s);

// Structural constructors. They fold rational constants exactly and drop
// neutral elements but never reorder operands.
Expr neg(const Expr& a);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr ipow(const Expr& base, long exponent);
Expr rpow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sqrt(const Expr& a);

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator+(const Expr& a, long b) { return add(a, integer(b)); }
inline Expr operator+(long a, const Expr& b) { return add(integer(a), b); }
inline Expr operator-(const Expr& a, long b) { return sub(a, integer(b)); }
inline Expr operator-(long a, const Expr& b) { return sub(integer(a), b); }
inline Expr operator*(long a, const Expr& b) { return mul(integer(a), b); }
inline Expr operator*(const Expr& a, long b) { return mul(a, integer(b)); }

/// Sum / product of a list; empty lists give 0 / 1.
Expr sum(const std::vector<Expr>& terms);
Expr product(const std::vector<Expr>& factors);

bool structurally_equal(const Expr& a, const Expr& b);

/// Sorted, duplicate-free list of the free symbols of `e`.
std::vector<Symbol> free_symbols(const Expr& e);
bool depends_on(const Expr& e, const Symbol& s);
/// True when no state variable occurs in `e`.
bool is_time_only(const Expr& e);
/// Largest derivative order of any opaque symbol in `e` (-1 if none).
int max_opaque_order(const Expr& e);

struct DiffOptions {
  /// Largest opaque derivative order that differentiation may produce.
  int max_opaque_order = 4;
};

/// Exact partial derivative. With respect to t, an opaque symbol of order d
/// becomes order d + 1; exceeding the cap throws DerivativeOrderError.
Expr differentiate(const Expr& e, const Symbol& var, const DiffOptions& opts = {});

using Substitution = std::map<Symbol, Expr>;

/// Simultaneous substitution of symbols by expressions.
Expr substitute(const Expr& e, const Substitution& bindings);

/// Declarations needed to read and print expressions.
///
/// Identifier forms accepted by the parser:
///   t                         time
///   x<a>_<i>                  state copy a, coordinate i (always available)
///   <coord><a>, <coord>       copy a (or 0) of a declared coordinate name
///   x<k>                      n == 1: copy k; n > 1: coordinate k of copy 0
///   F, d<k>F (dF = d1F)       opaque function F and its derivatives
///   k1, ...                   declared params
/// Coordinate names default to {"x"} when n == 1.
struct ParseContext {
  int n = 1;
  int m = 0;
  std::vector<std::string> coord_names;
  std::vector<std::string> opaque = {"F", "b", "omega"};
  std::vector<std::string> params;
  int max_opaque_order = 4;

  std::vector<std::string> effective_coord_names() const;
};

Expr parse(const std::string& source, const ParseContext& ctx = {});

/// Canonical, context-free spelling that `parse` reads back under any
/// context with large enough n and m.
std::string to_string(const Expr& e);
/// Spelling with the coordinate names of `ctx` (copy a of "x" prints x<a>).
std::string to_string(const Expr& e, const ParseContext& ctx);

/// Numeric values for the symbols of an expression.
class Assignment {
 public:
  using Realization = std::function<double(int order, double t)>;

  Assignment& set_time(double t);
  Assignment& set_state(int copy, int coord, double value);
  Assignment& set_param(const std::string& name, double value);
  /// Fixed value of derivative `order` of opaque function `name`.
  Assignment& set_jet(const std::string& name, int order, double value);
  /// Callable realization returning any derivative order at any t.
  Assignment& bind_function(const std::string& name, Realization f);
  /// Generic setter dispatching on the symbol kind.
  Assignment& set(const Symbol& s, double value);

  bool has(const Symbol& s) const;
  /// Throws UnboundSymbolError when `s` has no value.
  double value_of(const Symbol& s) const;

 private:
  std::optional<double> t_;
  std::map<std::pair<int, int>, double> state_;
  std::map<std::string, double> params_;
  std::map<std::pair<std::string, int>, double> jets_;
  std::map<std::string, Realization> functions_;
};

/// IEEE evaluation with domain guards.
double evaluate(const Expr& e, const Assignment& a);

}  // namespace liefam
