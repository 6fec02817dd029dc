#include "liefam/liealgebra.hpp"

#include <algorithm>
#include <map>

namespace liefam {

GeneratorSet::GeneratorSet(std::vector<TDVectorField> f) : fields(std::move(f)) {
  if (fields.empty()) throw InvalidArgument("a generator set needs at least one field");
  n = fields[0].n;
  for (const auto& x : fields)
    if (x.n != n) throw InvalidArgument("generators have different dimensions");
}

namespace {

std::vector<Expr> components(const ProlongedField& p) {
  std::vector<Expr> out{p.dt};
  for (const auto& block : p.coeffs) out.insert(out.end(), block.begin(), block.end());
  return out;
}

Expr poly_expr(const Poly& p) { return p.is_zero() ? Expr() : to_expr(p); }

// Most frequent value; ties go to the larger one.
int majority(const std::vector<int>& v) {
  std::map<int, int> count;
  for (int x : v) ++count[x];
  int best = -1, best_n = 0;
  for (auto [x, c] : count)
    if (c >= best_n) {
      best = x;
      best_n = c;
    }
  return best;
}

// Pointwise ranks of the matrices whose columns are `cols` (each a list of
// component expressions), evaluated at sampled points.
std::vector<int> pointwise_ranks(const std::vector<std::vector<Expr>>& cols,
                                 const AlgebraConfig& cfg, std::uint64_t seed) {
  if (cols.empty()) return {0};
  const std::size_t dim = cols[0].size(), k = cols.size();
  std::vector<Expr> flat;
  for (const auto& c : cols) flat.insert(flat.end(), c.begin(), c.end());
  Program prog(flat);
  const std::size_t count = static_cast<std::size_t>(cfg.rank_points);
  auto pts = sample_points(prog.symbols(), cfg.eq.boxes, seed, count);
  BatchResult res = evaluate_batch(prog, pts, count, cfg.eq.exec);
  std::vector<Eigen::MatrixXd> mats;
  for (std::size_t p = 0; p < count; ++p) {
    if (!res.ok[p]) continue;
    Eigen::MatrixXd m(dim, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t d = 0; d < dim; ++d) m(d, j) = res.value(p, j * dim + d);
    mats.push_back(std::move(m));
  }
  if (mats.empty()) throw InconclusiveError("every rank sample point hit a domain guard");
  return rank_batch(mats, cfg.rank_threshold, cfg.eq.exec);
}

}  // namespace

int sampled_rank(const std::vector<ProlongedField>& fields, const AlgebraConfig& cfg,
                 std::uint64_t seed) {
  std::vector<std::vector<Expr>> cols;
  for (const auto& f : fields) cols.push_back(components(f));
  return majority(pointwise_ranks(cols, cfg, seed));
}

SpanFit express_in_span(const ProlongedField& target, const std::vector<ProlongedField>& basis,
                        const AlgebraConfig& cfg) {
  for (const auto& b : basis)
    if (b.n != target.n || b.m != target.m)
      throw InvalidArgument("span basis and target live on different spaces");
  const std::size_t r = basis.size();
  auto tcomp = components(target);
  std::vector<std::vector<Expr>> bcomp;
  for (const auto& b : basis) bcomp.push_back(components(b));

  std::vector<std::vector<Poly>> a;
  std::vector<Poly> rhs;
  for (std::size_t c = 0; c < tcomp.size(); ++c) {
    StateSplit ts = split_by_state(to_poly(tcomp[c]));
    std::vector<StateSplit> bs;
    for (std::size_t l = 0; l < r; ++l) bs.push_back(split_by_state(to_poly(bcomp[l][c])));
    std::map<Poly::Monomial, int, Poly::MonomialLess> monos;
    for (const auto& [m, p] : ts.coeffs) monos.emplace(m, 0);
    for (const auto& s : bs)
      for (const auto& [m, p] : s.coeffs) monos.emplace(m, 0);
    for (const auto& [m, unused] : monos) {
      std::vector<Poly> row(r);
      for (std::size_t l = 0; l < r; ++l)
        if (auto it = bs[l].coeffs.find(m); it != bs[l].coeffs.end()) row[l] = it->second;
      auto it = ts.coeffs.find(m);
      rhs.push_back(it == ts.coeffs.end() ? Poly() : it->second);
      a.push_back(std::move(row));
    }
  }

  LinearSolution sol = solve_linear(a, rhs, cfg.eq);
  SpanFit fit;
  fit.underdetermined = sol.underdetermined;
  for (const auto& x : sol.x) fit.coeffs.push_back(poly_expr(x));
  ProlongedField combo = r ? linear_combination(fit.coeffs, basis) : ProlongedField::zero(target.n, target.m);
  fit.residual = simplify(target - combo, cfg.eq);
  fit.in_span = sol.consistent && is_zero(fit.residual, cfg.eq);
  return fit;
}

StructureResult solve_structure_functions(const GeneratorSet& g, const AlgebraConfig& cfg, int m) {
  const int r = g.r();
  std::vector<ProlongedField> lifted;
  for (const auto& x : g.fields) lifted.push_back(time_prolong(x, m));
  StructureResult out;
  out.f = StructureFunctions(r);
  out.closed = true;
  for (int j = 1; j <= r; ++j)
    for (int k = 1; k <= r; ++k) {
      ProlongedField br = lie_bracket(lifted[j - 1], lifted[k - 1], cfg.eq, cfg.diff);
      SpanFit fit = express_in_span(br, lifted, cfg);
      out.underdetermined = out.underdetermined || fit.underdetermined;
      for (int l = 1; l <= r; ++l) out.f(j, k, l) = fit.coeffs[l - 1];
      if (!fit.in_span && out.closed) {
        out.closed = false;
        out.failed_pair = {j, k};
        out.residual = fit.residual;
      }
    }
  return out;
}

ClosureReport check_closure(const GeneratorSet& g, const AlgebraConfig& cfg) {
  ClosureReport rep;
  rep.structure = solve_structure_functions(g, cfg, 0);
  const int r = g.r();
  const StructureFunctions& f = rep.structure.f;
  rep.antisymmetric = true;
  rep.row_sums_zero = true;
  for (int j = 1; j <= r; ++j)
    for (int k = 1; k <= r; ++k) {
      std::vector<Expr> row;
      for (int l = 1; l <= r; ++l) {
        row.push_back(f(j, k, l));
        if (!is_zero(add(f(j, k, l), f(k, j, l)), cfg.eq)) rep.antisymmetric = false;
      }
      if (!is_zero(sum(row), cfg.eq)) rep.row_sums_zero = false;
    }
  rep.lie_family = rep.structure.closed && rep.antisymmetric && rep.row_sums_zero;
  return rep;
}

Decomposition decompose_member(const TDVectorField& y, const GeneratorSet& g,
                               const AlgebraConfig& cfg) {
  if (y.n != g.n) throw InvalidArgument("member and generators have different dimensions");
  std::vector<ProlongedField> basis;
  for (const auto& x : g.fields) basis.push_back(autonomize(x));
  SpanFit fit = express_in_span(autonomize(y), basis, cfg);
  return {fit.in_span, fit.underdetermined, fit.coeffs, fit.residual};
}

ClosureSearchResult bracket_closure_search(const std::vector<TDVectorField>& members, int m,
                                           int max_depth, const AlgebraConfig& cfg) {
  if (members.empty()) throw InvalidArgument("closure search needs at least one member");
  const int n = members[0].n;
  ClosureSearchResult res;
  res.rank_cap = m * n + 1;
  std::vector<TDVectorField> gens;
  int rank = 0;

  // Returns false when the rank cap is exceeded.
  auto try_add = [&](ProlongedField f, int depth) {
    if (!res.prolonged.empty() && is_zero(f.dt, cfg.eq)) f = f + res.prolonged[0];
    f = simplify(f, cfg.eq);
    auto trial = res.prolonged;
    trial.push_back(f);
    int new_rank = sampled_rank(trial, cfg, cfg.eq.seed + static_cast<std::uint64_t>(trial.size()));
    if (new_rank <= rank) return true;
    rank = new_rank;
    res.prolonged.push_back(f);
    gens.push_back(base_field(f));
    res.depth_found.push_back(depth);
    res.depth = depth;
    return rank <= res.rank_cap;
  };

  auto finish = [&](ClosureSearchResult::Verdict v, std::string msg) {
    res.verdict = v;
    res.message = std::move(msg);
    res.generators = GeneratorSet(gens);
    return res;
  };

  for (const auto& y : members) {
    if (y.n != n) throw InvalidArgument("members have different dimensions");
    if (!try_add(time_prolong(y, m), 0))
      return finish(ClosureSearchResult::Verdict::RankCapExceeded, "rank cap exceeded by members");
  }

  for (int d = 1; d <= max_depth; ++d) {
    std::size_t before = res.prolonged.size();
    for (std::size_t i = 0; i < before; ++i)
      for (std::size_t j = i + 1; j < before; ++j) {
        if (std::max(res.depth_found[i], res.depth_found[j]) != d - 1) continue;
        ProlongedField br = lie_bracket(res.prolonged[i], res.prolonged[j], cfg.eq, cfg.diff);
        if (is_zero(br, cfg.eq)) continue;
        if (!try_add(br, d))
          return finish(ClosureSearchResult::Verdict::RankCapExceeded,
                        "pointwise rank exceeds m*n+1 = " + std::to_string(res.rank_cap));
      }
    if (res.prolonged.size() == before) {
      res.generators = GeneratorSet(gens);
      res.structure = solve_structure_functions(res.generators, cfg, m);
      std::string msg = "closed after " + std::to_string(d) + " bracket layer(s)";
      if (!res.structure->closed) msg += "; brackets are not t-only combinations of the generators";
      return finish(ClosureSearchResult::Verdict::Closed, msg);
    }
  }
  return finish(ClosureSearchResult::Verdict::DepthExhausted,
                "new directions still appearing at depth " + std::to_string(max_depth));
}

std::optional<int> minimal_m(const GeneratorSet& g, const AlgebraConfig& cfg) {
  const int r = g.r();
  for (int m = 1; m <= std::max(r, 1); ++m) {
    std::vector<std::vector<Expr>> cols;
    for (const auto& x : g.fields) {
      std::vector<Expr> col{integer(1)};
      for (int a = 1; a <= m; ++a)
        for (int i = 0; i < g.n; ++i) col.push_back(move_copy(x[i], g.n, 0, a));
      cols.push_back(std::move(col));
    }
    int votes = 0;
    for (int s = 0; s < cfg.rank_seeds; ++s) {
      auto ranks = pointwise_ranks(cols, cfg, cfg.eq.seed + static_cast<std::uint64_t>(s));
      int full = static_cast<int>(std::count(ranks.begin(), ranks.end(), r));
      if (2 * full > static_cast<int>(ranks.size())) ++votes;
    }
    if (2 * votes > cfg.rank_seeds) return m;
  }
  return std::nullopt;
}

}  // namespace liefam
