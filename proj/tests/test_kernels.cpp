#include <doctest.h>

#include <algorithm>

#include "liefam/kernels.hpp"

using namespace liefam;

TEST_CASE("serial and parallel batches agree bit for bit") {
  ParseContext c;
  c.m = 2;
  Program prog({parse("exp(-2*F)*x0^(-3) + sin(t)*x1*x2", c), parse("ln(x0 - 1)", c)});
  auto pts = sample_points(prog.symbols(), SampleBoxes{}, 42, 5000);
  BatchResult s = evaluate_batch(prog, pts, 5000, Exec::Serial);
  BatchResult p = evaluate_batch(prog, pts, 5000, Exec::Parallel);
  CHECK(s.values == p.values);
  CHECK(s.scales == p.scales);
  CHECK(s.ok == p.ok);
  // ln(x0 - 1) is undefined for roughly half the box.
  std::size_t bad = std::count(s.ok.begin(), s.ok.end(), 0);
  CHECK(bad > 1000);
  CHECK(bad < 4000);
}

TEST_CASE("sample points respect boxes and overrides") {
  std::vector<Symbol> syms{Symbol::time(), Symbol::state(0, 1)};
  SampleBoxes boxes;
  boxes.overrides[Symbol::state(0, 1)] = {-3.0, -2.0};
  auto pts = sample_points(syms, boxes, 7, 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(pts[2 * i] >= 0.1);
    CHECK(pts[2 * i] <= 1.0);
    CHECK(pts[2 * i + 1] >= -3.0);
    CHECK(pts[2 * i + 1] <= -2.0);
  }
  CHECK(sample_points(syms, boxes, 7, 100) == pts);
}

TEST_CASE("numeric rank") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 2, 4, 6, 1e-3, 0, 1;
  CHECK(numeric_rank(m) == 2);
  CHECK(numeric_rank(Eigen::MatrixXd::Identity(4, 4) * 1e-12) == 4);
  CHECK(numeric_rank(Eigen::MatrixXd::Zero(3, 2)) == 0);
  std::vector<Eigen::MatrixXd> mats(64, m);
  auto s = rank_batch(mats, 1e-8, Exec::Serial), p = rank_batch(mats, 1e-8, Exec::Parallel);
  CHECK(s == p);
}
