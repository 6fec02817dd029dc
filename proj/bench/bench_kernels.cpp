// Serial reference vs OpenMP kernels on the workloads the algebra layer runs.

#include <benchmark/benchmark.h>

#include <random>

#include "liefam/families.hpp"
#include "liefam/kernels.hpp"

using namespace liefam;

namespace {

// Coefficients of a Milne-Pinney bracket: a realistic is_zero workload.
Program bracket_program() {
  FamilyDefinition mp = milne_pinney_family();
  ProlongedField c = lie_bracket(time_prolong(mp.generators.fields[2], 2),
                                 time_prolong(mp.generators.fields[3], 2));
  std::vector<Expr> out{c.dt};
  for (const auto& block : c.coeffs)
    for (const auto& e : block) out.push_back(e);
  return Program(out);
}

void BM_EvaluateBatch(benchmark::State& state, Exec exec) {
  static const Program prog = bracket_program();
  const auto count = static_cast<std::size_t>(state.range(0));
  auto pts = sample_points(prog.symbols(), SampleBoxes{}, 0xC0FFEE, count);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch(prog, pts, count, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RankBatch(benchmark::State& state, Exec exec) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d;
  std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>(state.range(0)));
  for (auto& m : mats) {
    m.resize(13, 6);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) m(i, j) = d(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(rank_batch(mats, 1e-8, exec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_EvaluateBatch, serial, Exec::Serial)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK_CAPTURE(BM_EvaluateBatch, parallel, Exec::Parallel)->RangeMultiplier(8)->Range(64, 32768);
BENCHMARK_CAPTURE(BM_RankBatch, serial, Exec::Serial)->RangeMultiplier(8)->Range(8, 4096);
BENCHMARK_CAPTURE(BM_RankBatch, parallel, Exec::Parallel)->RangeMultiplier(8)->Range(8, 4096);

BENCHMARK_MAIN();
