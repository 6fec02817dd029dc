#include "liefam/kernels.hpp"

#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace liefam {

bool parallel_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

Box SampleBoxes::box_for(const Symbol& s) const {
  if (auto it = overrides.find(s); it != overrides.end()) return it->second;
  switch (s.kind) {
    case SymbolKind::Time:
      return time;
    case SymbolKind::State:
      return state;
    case SymbolKind::Opaque:
      return opaque;
    case SymbolKind::Param:
      return param;
  }
  return state;
}

std::vector<double> sample_points(const std::vector<Symbol>& symbols, const SampleBoxes& boxes,
                                  std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Box> bx;
  for (const auto& s : symbols) bx.push_back(boxes.box_for(s));
  std::vector<double> pts(count * symbols.size());
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t j = 0; j < symbols.size(); ++j)
      pts[p * symbols.size() + j] = bx[j].lo + (bx[j].hi - bx[j].lo) * unit(rng);
  return pts;
}

namespace {

void eval_point(const Program& prog, std::span<const double> points, std::size_t p,
                BatchResult& r) {
  std::size_t dim = prog.symbols().size();
  std::span<const double> in = points.subspan(p * dim, dim);
  std::span<double> v(r.values.data() + p * r.outputs, r.outputs);
  std::span<double> s(r.scales.data() + p * r.outputs, r.outputs);
  r.ok[p] = prog.run_scaled(in, v, s) ? 1 : 0;
}

}  // namespace

BatchResult evaluate_batch(const Program& prog, std::span<const double> points, std::size_t count,
                           Exec exec) {
  if (points.size() < count * prog.symbols().size())
    throw InvalidArgument("sample matrix smaller than count x dimension");
  BatchResult r;
  r.points = count;
  r.outputs = prog.num_outputs();
  r.values.assign(count * r.outputs, 0.0);
  r.scales.assign(count * r.outputs, 0.0);
  r.ok.assign(count, 0);
  const long n = static_cast<long>(count);
  if (exec == Exec::Parallel && parallel_available()) {
#pragma omp parallel for schedule(static)
    for (long p = 0; p < n; ++p) eval_point(prog, points, static_cast<std::size_t>(p), r);
  } else {
    for (long p = 0; p < n; ++p) eval_point(prog, points, static_cast<std::size_t>(p), r);
  }
  return r;
}

int numeric_rank(const Eigen::MatrixXd& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::MatrixXd a = m;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    double nrm = a.col(j).norm();
    if (nrm > 0.0 && std::isfinite(nrm)) a.col(j) /= nrm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(threshold);
  return static_cast<int>(qr.rank());
}

std::vector<int> rank_batch(const std::vector<Eigen::MatrixXd>& mats, double threshold, Exec exec) {
  std::vector<int> out(mats.size(), 0);
  const long n = static_cast<long>(mats.size());
  if (exec == Exec::Parallel && parallel_available()) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[i] = numeric_rank(mats[i], threshold);
  } else {
    for (long i = 0; i < n; ++i) out[i] = numeric_rank(mats[i], threshold);
  }
  return out;
}

}  // namespace liefam
