#pragma once

// Structure functions, closure verification, member decomposition and
// bracket-closure search for sets of time-dependent generators.

#include <optional>
#include <string>
#include <vector>

#include "liefam/linsolve.hpp"
#include "liefam/vectorfield.hpp"

namespace liefam {

struct GeneratorSet {
  int n = 1;
  std::vector<TDVectorField> fields;

  GeneratorSet() = default;
  /// Throws InvalidArgument on an empty list or mismatched dimensions.
  explicit GeneratorSet(std::vector<TDVectorField> f);
  int r() const { return static_cast<int>(fields.size()); }
};

/// f(j, k, l), 1-based, with [X_j, X_k] = sum_l f(j, k, l) X_l.
struct StructureFunctions {
  int r = 0;
  std::vector<Expr> f;

  explicit StructureFunctions(int r_ = 0) : r(r_), f(static_cast<std::size_t>(r_ * r_ * r_)) {}
  Expr& operator()(int j, int k, int l) { return f[index(j, k, l)]; }
  const Expr& operator()(int j, int k, int l) const { return f[index(j, k, l)]; }

 private:
  std::size_t index(int j, int k, int l) const {
    return static_cast<std::size_t>(((j - 1) * r + (k - 1)) * r + (l - 1));
  }
};

struct AlgebraConfig {
  EqualityConfig eq;
  DiffOptions diff;
  /// Sample points per numeric rank test and the number of seeds used by
  /// minimal_m.
  int rank_points = 8;
  int rank_seeds = 16;
  double rank_threshold = 1e-8;
};

/// Result of writing `target` as sum_l c_l * basis_l with t-only c_l.
struct SpanFit {
  bool in_span = false;
  bool underdetermined = false;
  std::vector<Expr> coeffs;
  ProlongedField residual;
};

SpanFit express_in_span(const ProlongedField& target, const std::vector<ProlongedField>& basis,
                        const AlgebraConfig& cfg = {});

struct StructureResult {
  bool closed = false;
  bool underdetermined = false;
  StructureFunctions f;
  /// First (j, k) whose bracket leaves the span, with the residual field.
  std::optional<std::pair<int, int>> failed_pair;
  std::optional<ProlongedField> residual;
};

/// Structure functions of the autonomizations (m = 0) or of the
/// time-prolongations to m copies.
StructureResult solve_structure_functions(const GeneratorSet& g, const AlgebraConfig& cfg = {},
                                          int m = 0);

struct ClosureReport {
  bool lie_family = false;
  bool antisymmetric = false;
  bool row_sums_zero = false;
  StructureResult structure;
};

ClosureReport check_closure(const GeneratorSet& g, const AlgebraConfig& cfg = {});

struct Decomposition {
  bool in_span = false;
  bool underdetermined = false;
  std::vector<Expr> b;
  ProlongedField residual;
};

/// Ybar = sum_j b_j Xbar_j; sum_j b_j = 1 comes from the d/dt row.
Decomposition decompose_member(const TDVectorField& y, const GeneratorSet& g,
                               const AlgebraConfig& cfg = {});

struct ClosureSearchResult {
  enum class Verdict { Closed, RankCapExceeded, DepthExhausted };
  Verdict verdict = Verdict::DepthExhausted;
  GeneratorSet generators;
  std::vector<ProlongedField> prolonged;  // time-prolongations of generators
  /// Bracket depth at which each generator first appeared.
  std::vector<int> depth_found;
  int depth = 0;
  int rank_cap = 0;
  std::optional<StructureResult> structure;
  std::string message;
};

ClosureSearchResult bracket_closure_search(const std::vector<TDVectorField>& members, int m,
                                           int max_depth, const AlgebraConfig& cfg = {});

/// Majority pointwise rank of a set of prolonged fields over sampled points.
int sampled_rank(const std::vector<ProlongedField>& fields, const AlgebraConfig& cfg,
                 std::uint64_t seed);

/// Smallest m whose projected time-prolongations (1, X_j(x_1), ..., X_j(x_m))
/// are independent at generic points; nullopt when none up to m = r.
std::optional<int> minimal_m(const GeneratorSet& g, const AlgebraConfig& cfg = {});

}  // namespace liefam
