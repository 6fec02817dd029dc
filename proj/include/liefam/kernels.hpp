#pragma once

// Data-parallel sampling kernels. Each has a serial reference path and an
// OpenMP path selected by Exec; both produce identical results.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "liefam/program.hpp"

namespace liefam {

enum class Exec { Serial, Parallel };

/// True when the library was built with OpenMP.
bool parallel_available();

struct Box {
  double lo = 0.0;
  double hi = 1.0;
};

/// Sampling ranges per symbol kind, with per-symbol overrides.
struct SampleBoxes {
  Box time{0.1, 1.0};
  Box state{0.5, 1.5};
  Box opaque{-1.0, 1.0};
  Box param{0.5, 1.5};
  std::map<Symbol, Box> overrides;

  Box box_for(const Symbol& s) const;
};

/// Row-major count x symbols.size() matrix of uniform samples. Generated
/// serially from `seed` so the draw is independent of the executor.
std::vector<double> sample_points(const std::vector<Symbol>& symbols, const SampleBoxes& boxes,
                                  std::uint64_t seed, std::size_t count);

struct BatchResult {
  std::size_t points = 0;
  std::size_t outputs = 0;
  std::vector<double> values;  // points x outputs
  std::vector<double> scales;  // points x outputs
  std::vector<std::uint8_t> ok;  // per point

  double value(std::size_t p, std::size_t o) const { return values[p * outputs + o]; }
  double scale(std::size_t p, std::size_t o) const { return scales[p * outputs + o]; }
};

BatchResult evaluate_batch(const Program& prog, std::span<const double> points, std::size_t count,
                           Exec exec = Exec::Parallel);

/// Rank of the column-normalized matrix by column-pivoted QR.
int numeric_rank(const Eigen::MatrixXd& m, double threshold = 1e-8);
std::vector<int> rank_batch(const std::vector<Eigen::MatrixXd>& mats, double threshold = 1e-8,
                            Exec exec = Exec::Parallel);

}  // namespace liefam
