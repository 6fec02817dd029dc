#pragma once

// Gauss-Jordan elimination over t-dependent coefficients represented as
// Polys (Laurent in the atoms, with inverted non-monomials as Base atoms).
// Zero tests go through is_zero, so pivots are certified nonzero.

#include <vector>

#include "liefam/equality.hpp"

namespace liefam {

struct LinearSolution {
  bool consistent = false;
  int rank = 0;
  /// rank < number of unknowns; the minimal-support solution is returned.
  bool underdetermined = false;
  /// Solution (consistent) or the best partial solution (inconsistent).
  std::vector<Poly> x;
  /// Indices of rows left unsatisfied by `x`.
  std::vector<std::size_t> violated_rows;
};

/// Solve A x = b. Among solutions of an underdetermined system the one with
/// the fewest nonzero entries wins, ties broken by the lexicographically
/// smallest support.
LinearSolution solve_linear(const std::vector<std::vector<Poly>>& a, const std::vector<Poly>& b,
                            const EqualityConfig& cfg = {});

}  // namespace liefam
