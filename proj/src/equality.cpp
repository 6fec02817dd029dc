#include "liefam/equality.hpp"

#include <cmath>

namespace liefam {

SampleVerdict sample_zero(const std::vector<Expr>& es, const EqualityConfig& cfg) {
  if (es.empty()) return SampleVerdict::Zero;
  Program prog(es);
  std::size_t count = static_cast<std::size_t>(cfg.samples);
  auto pts = sample_points(prog.symbols(), cfg.boxes, cfg.seed, count);
  BatchResult r = evaluate_batch(prog, pts, count, cfg.exec);
  std::size_t valid = 0;
  for (std::size_t p = 0; p < count; ++p) {
    if (!r.ok[p]) continue;
    ++valid;
    for (std::size_t o = 0; o < r.outputs; ++o)
      if (std::abs(r.value(p, o)) > cfg.rtol * r.scale(p, o) + 1e-300) return SampleVerdict::NonZero;
  }
  return valid == 0 ? SampleVerdict::Inconclusive : SampleVerdict::Zero;
}

namespace {

bool verdict(SampleVerdict v, const char* what) {
  if (v == SampleVerdict::Inconclusive)
    throw InconclusiveError(std::string("every sample point hit a domain guard while testing ") + what);
  return v == SampleVerdict::Zero;
}

// Coefficient-wise test of a Laurent polynomial in the state variables.
// Returns nullopt when the split is not decisive.
std::optional<bool> split_test(const Poly& p, const EqualityConfig& cfg) {
  StateSplit split = split_by_state(p);
  std::vector<Expr> coeffs;
  bool constant_nonzero = false;
  for (const auto& [m, c] : split.coeffs) {
    if (c.is_constant()) {
      constant_nonzero = true;
      continue;
    }
    coeffs.push_back(to_expr(c));
  }
  if (!constant_nonzero) {
    SampleVerdict v = sample_zero(coeffs, cfg);
    if (v == SampleVerdict::Zero) return true;
    if (v == SampleVerdict::NonZero && !split.composite_state) return false;
    if (v == SampleVerdict::Inconclusive && !split.composite_state) return verdict(v, "coefficients");
  } else if (!split.composite_state) {
    return false;
  }
  return std::nullopt;
}

}  // namespace

bool is_zero(const Poly& p, const EqualityConfig& cfg) {
  if (p.is_zero()) return true;
  if (p.is_constant()) return false;
  if (auto r = split_test(p, cfg)) return *r;
  return verdict(sample_zero({to_expr(p)}, cfg), "expression");
}

bool is_zero(const Expr& e, const EqualityConfig& cfg) {
  if (e.is_rational()) return sgn(e.rational()) == 0;
  Poly p;
  try {
    p = to_poly(e);
  } catch (const DomainError&) {
    return verdict(sample_zero({e}, cfg), "expression");
  }
  if (p.is_zero()) return true;
  if (p.is_constant()) return false;
  if (auto r = split_test(p, cfg)) return *r;
  // The original tree is numerically better conditioned than the expansion.
  return verdict(sample_zero({e}, cfg), "expression");
}

bool equivalent(const Expr& a, const Expr& b, const EqualityConfig& cfg) {
  return is_zero(sub(a, b), cfg);
}

bool all_zero(const std::vector<Expr>& es, const EqualityConfig& cfg) {
  for (const auto& e : es)
    if (!is_zero(e, cfg)) return false;
  return true;
}

}  // namespace liefam
