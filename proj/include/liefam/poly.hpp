#pragma once

// Expanded Laurent polynomials with rational coefficients over "atoms":
// variables plus opaque composite factors (exp, ln, sin, cos, roots, powers
// and non-monomial bases raised to negative powers). Two expressions with the
// same Poly are equal; the converse does not hold, so callers fall back to
// sampling when the Poly is not exactly zero.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "liefam/expr.hpp"

namespace liefam {

class Poly;

enum class AtomKind : std::uint8_t { Var, Exp, Ln, Sin, Cos, Root, Base, Power };

struct Atom {
  AtomKind kind = AtomKind::Var;
  std::string key;
  Symbol sym;                              // Var
  std::shared_ptr<const Poly> arg, arg2;   // composites (arg2: exponent of Power)
  long root = 0;                           // Root: index q of arg^(1/q)
  bool state_dependent = false;
};

using AtomPtr = std::shared_ptr<const Atom>;

class Poly {
 public:
  struct Factor {
    AtomPtr atom;
    long exponent;
  };
  using Monomial = std::vector<Factor>;  // sorted by atom key, nonzero exponents
  struct MonomialLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
  };
  using Terms = std::map<Monomial, Rational, MonomialLess>;

  Poly() = default;
  static Poly constant(const Rational& c);
  static Poly atom(AtomPtr a, long exponent = 1);
  static Poly variable(const Symbol& s);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Single term (including constants).
  bool is_monomial() const { return terms_.size() == 1; }
  Rational constant_term() const;
  std::size_t size() const { return terms_.size(); }
  /// Deterministic canonical spelling.
  const std::string& key() const;
  bool depends_on_state() const;

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rational& c) const;

  /// Integer power; negative powers of non-monomials become Base atoms.
  Poly pow(long n) const;

  void add_term(const Monomial& m, const Rational& c);

 private:
  Terms terms_;
  mutable std::string key_;
};

Poly to_poly(const Expr& e);
Expr to_expr(const Poly& p);
Expr to_expr(const Poly::Monomial& m);
/// Expanded, collected form of `e` (sound rewrite).
Expr normalize(const Expr& e);

/// Splits p = sum_m c_m(t) * m(x) where m collects the state-dependent
/// factors (state variables and state-dependent composites).
struct StateSplit {
  std::map<Poly::Monomial, Poly, Poly::MonomialLess> coeffs;
  /// True when some state-dependent factor is a composite atom; then the
  /// monomials need not be linearly independent.
  bool composite_state = false;
};
StateSplit split_by_state(const Poly& p);

std::string to_string(const Poly::Monomial& m);

}  // namespace liefam
