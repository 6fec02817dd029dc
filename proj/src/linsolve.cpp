#include "liefam/linsolve.hpp"

#include <algorithm>

namespace liefam {

namespace {

// 0: rational constant, 1: single term, 2: anything else.
int pivot_class(const Poly& p) {
  if (p.is_constant()) return 0;
  if (p.is_monomial()) return 1;
  return 2;
}

bool zero(const Poly& p, const EqualityConfig& cfg) {
  if (p.is_zero()) return true;
  if (p.is_constant()) return false;
  return is_zero(p, cfg);
}

struct Elimination {
  int rank = 0;
  bool consistent = true;
  std::vector<int> pivot_col;  // per pivot row
  std::vector<std::vector<Poly>> m;  // augmented, reduced
};

// Gauss-Jordan on the augmented matrix restricted to `cols`.
Elimination eliminate(const std::vector<std::vector<Poly>>& a, const std::vector<Poly>& b,
                      const std::vector<int>& cols, const EqualityConfig& cfg) {
  const std::size_t rows = a.size(), k = cols.size();
  Elimination e;
  e.m.assign(rows, std::vector<Poly>(k + 1));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < k; ++c) e.m[r][c] = a[r][static_cast<std::size_t>(cols[c])];
    e.m[r][k] = b[r];
  }
  std::size_t row = 0;
  for (std::size_t c = 0; c < k && row < rows; ++c) {
    int best = -1, best_class = 3;
    for (std::size_t r = row; r < rows; ++r) {
      if (zero(e.m[r][c], cfg)) {
        e.m[r][c] = Poly();
        continue;
      }
      int cl = pivot_class(e.m[r][c]);
      if (cl < best_class) {
        best = static_cast<int>(r);
        best_class = cl;
      }
    }
    if (best < 0) continue;
    std::swap(e.m[row], e.m[static_cast<std::size_t>(best)]);
    Poly inv = e.m[row][c].pow(-1);
    for (std::size_t j = c; j <= k; ++j) e.m[row][j] = e.m[row][j] * inv;
    e.m[row][c] = Poly::constant(1);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row || e.m[r][c].is_zero()) continue;
      Poly factor = e.m[r][c];
      for (std::size_t j = c; j <= k; ++j) e.m[r][j] -= factor * e.m[row][j];
      e.m[r][c] = Poly();
    }
    e.pivot_col.push_back(static_cast<int>(c));
    ++row;
  }
  e.rank = static_cast<int>(row);
  for (std::size_t r = row; r < rows; ++r)
    if (!zero(e.m[r][k], cfg)) e.consistent = false;
  return e;
}

std::vector<Poly> extract(const Elimination& e, const std::vector<int>& cols, std::size_t n) {
  std::vector<Poly> x(n);
  const std::size_t k = cols.size();
  for (std::size_t r = 0; r < e.pivot_col.size(); ++r)
    x[static_cast<std::size_t>(cols[static_cast<std::size_t>(e.pivot_col[r])])] = e.m[r][k];
  return x;
}

bool next_combination(std::vector<int>& idx, int n) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

LinearSolution solve_linear(const std::vector<std::vector<Poly>>& a, const std::vector<Poly>& b,
                            const EqualityConfig& cfg) {
  if (a.size() != b.size()) throw InvalidArgument("matrix and right-hand side sizes differ");
  const std::size_t n = a.empty() ? 0 : a[0].size();
  for (const auto& row : a)
    if (row.size() != n) throw InvalidArgument("ragged coefficient matrix");

  std::vector<int> all(n);
  for (std::size_t j = 0; j < n; ++j) all[j] = static_cast<int>(j);
  Elimination full = eliminate(a, b, all, cfg);

  LinearSolution s;
  s.rank = full.rank;
  s.consistent = full.consistent;
  s.underdetermined = full.rank < static_cast<int>(n);
  s.x = extract(full, all, n);

  if (s.consistent && s.underdetermined) {
    bool found = false;
    for (int size = 0; size <= static_cast<int>(n) && !found; ++size) {
      std::vector<int> idx(static_cast<std::size_t>(size));
      for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
      do {
        Elimination e = eliminate(a, b, idx, cfg);
        if (e.consistent && e.rank == size) {
          s.x = extract(e, idx, n);
          found = true;
          break;
        }
      } while (size > 0 && next_combination(idx, static_cast<int>(n)));
    }
  }

  for (std::size_t r = 0; r < a.size(); ++r) {
    Poly res = b[r];
    for (std::size_t j = 0; j < n; ++j)
      if (!s.x[j].is_zero()) res -= a[r][j] * s.x[j];
    if (!zero(res, cfg)) s.violated_rows.push_back(r);
  }
  if (!s.violated_rows.empty()) s.consistent = false;
  return s;
}

}  // namespace liefam
