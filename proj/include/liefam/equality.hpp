#pragma once

// Semantic zero testing: exact Laurent-polynomial canonicalization first,
// seeded random evaluation as the fallback.

#include <cstdint>
#include <vector>

#include "liefam/kernels.hpp"
#include "liefam/poly.hpp"

namespace liefam {

struct EqualityConfig {
  std::uint64_t seed = 0xC0FFEE;
  int samples = 64;
  double rtol = 1e-9;
  SampleBoxes boxes;
  Exec exec = Exec::Parallel;
};

/// True iff `e` vanishes identically (exactly, or at every valid sample
/// relative to its evaluation scale). Throws InconclusiveError when every
/// sample point hits a domain guard.
bool is_zero(const Expr& e, const EqualityConfig& cfg = {});
bool is_zero(const Poly& p, const EqualityConfig& cfg = {});
bool equivalent(const Expr& a, const Expr& b, const EqualityConfig& cfg = {});
/// True iff every expression is zero.
bool all_zero(const std::vector<Expr>& es, const EqualityConfig& cfg = {});

enum class SampleVerdict { Zero, NonZero, Inconclusive };

/// Sampling only, no canonicalization.
SampleVerdict sample_zero(const std::vector<Expr>& es, const EqualityConfig& cfg);

}  // namespace liefam
