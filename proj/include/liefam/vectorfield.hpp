#pragma once

// Time-dependent vector fields on R^n and their lifts to R x R^{n(m+1)}.

#include <string>
#include <vector>

#include "liefam/equality.hpp"

namespace liefam {

/// Y = sum_i Y^i(t, x) d/dx^i with coefficients over t and copy 0.
struct TDVectorField {
  int n = 1;
  std::vector<Expr> coeffs;

  TDVectorField() = default;
  /// Throws InvalidArgument when a coefficient references copies other than 0.
  explicit TDVectorField(std::vector<Expr> c);

  const Expr& operator[](int i) const { return coeffs[static_cast<std::size_t>(i)]; }
};

TDVectorField parse_field(const std::vector<std::string>& components, const ParseContext& ctx);

/// dt * d/dt + sum_{a,i} coeffs[a][i-1] * d/dx_a^i.
struct ProlongedField {
  int n = 1;
  int m = 0;
  Expr dt;
  std::vector<std::vector<Expr>> coeffs;

  static ProlongedField zero(int n, int m);
  const Expr& coeff(int copy, int coord) const { return coeffs[copy][coord - 1]; }
  Expr& coeff(int copy, int coord) { return coeffs[copy][coord - 1]; }
};

ProlongedField autonomize(const TDVectorField& y);
ProlongedField prolong(const TDVectorField& y, int m);
ProlongedField time_prolong(const TDVectorField& y, int m);

/// Commutator [A, B], coefficients expanded and pruned with is_zero.
ProlongedField lie_bracket(const ProlongedField& a, const ProlongedField& b,
                           const EqualityConfig& cfg = {}, const DiffOptions& diff = {});

/// Directional derivative of f along A.
Expr apply(const ProlongedField& a, const Expr& f, const DiffOptions& diff = {});

ProlongedField operator+(const ProlongedField& a, const ProlongedField& b);
ProlongedField operator-(const ProlongedField& a, const ProlongedField& b);
/// Pointwise product with a function (normally of t only).
ProlongedField scale(const Expr& f, const ProlongedField& a);
ProlongedField linear_combination(const std::vector<Expr>& coefficients,
                                  const std::vector<ProlongedField>& fields);

/// Expand every coefficient; coefficients that test zero become literal 0.
ProlongedField simplify(const ProlongedField& a, const EqualityConfig& cfg = {});

bool is_zero(const ProlongedField& a, const EqualityConfig& cfg = {});
bool equivalent(const ProlongedField& a, const ProlongedField& b, const EqualityConfig& cfg = {});

/// Every copy block is the same function of its own copy.
bool is_slot_coherent(const ProlongedField& a, const EqualityConfig& cfg = {});
/// dt == 0 and slot coherent.
bool is_pure_prolongation(const ProlongedField& a, const EqualityConfig& cfg = {});
/// dt == 1 and slot coherent.
bool is_time_prolongation(const ProlongedField& a, const EqualityConfig& cfg = {});

/// The copy-0 block as a field on R^n (meaningful for coherent fields).
TDVectorField base_field(const ProlongedField& a);

/// Rename state copy `from` to copy `to`.
Expr move_copy(const Expr& e, int n, int from, int to);

std::string to_string(const ProlongedField& a, const ParseContext& ctx);
std::string to_string(const TDVectorField& y, const ParseContext& ctx);

}  // namespace liefam
