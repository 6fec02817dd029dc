#include <doctest.h>

#include "liefam/liealgebra.hpp"

using namespace liefam;

namespace {

const char* kX2 = "(1 + t)^3 + t + (3*(1 + t)^2 + 1)*x + 3*(1 + t)*x^2 + x^3";

ParseContext mp() {
  ParseContext c;
  c.n = 2;
  c.coord_names = {"x", "v"};
  return c;
}

TDVectorField f1(const std::string& s) { return parse_field({s}, {}); }
Expr E(const std::string& s, const ParseContext& c = {}) { return parse(s, c); }

GeneratorSet abel() { return GeneratorSet({f1("t + x"), f1(kX2)}); }

TDVectorField y1() { return parse_field({"v", "-dF*v + x + exp(-2*F)*x^(-3)"}, mp()); }
TDVectorField y2() { return parse_field({"v", "-dF*v + exp(-2*F)*x^(-3)"}, mp()); }

}  // namespace

TEST_CASE("generator sets validate their input") {
  CHECK_THROWS_AS(GeneratorSet(std::vector<TDVectorField>{}), InvalidArgument);
  CHECK_THROWS_AS(GeneratorSet({f1("x"), y1()}), InvalidArgument);
}

TEST_CASE("Abel structure constants are exact") {
  ClosureReport rep = check_closure(abel());
  REQUIRE(rep.lie_family);
  const auto& f = rep.structure.f;
  REQUIRE(f(1, 2, 1).is_rational());
  REQUIRE(f(1, 2, 2).is_rational());
  CHECK(f(1, 2, 1).rational() == -2);
  CHECK(f(1, 2, 2).rational() == 2);
  CHECK(f(2, 1, 1).rational() == 2);
  CHECK(f(1, 1, 1).is_rational(0));
  CHECK_FALSE(rep.structure.underdetermined);
}

TEST_CASE("a single generator closes trivially") {
  ClosureReport rep = check_closure(GeneratorSet({f1("x^2 + t")}));
  CHECK(rep.lie_family);
  CHECK(rep.structure.f(1, 1, 1).is_rational(0));
}

TEST_CASE("constant sl(2) fields") {
  // Hand computation: [x dx, x^2 dx] = x^2 dx, [x dx, dx] = -dx,
  // [x^2 dx, dx] = -2x dx. With the zero field Z0 (so Z0bar = d/dt) the
  // relations become t-free combinations with zero row sums.
  GeneratorSet g({TDVectorField({Expr()}), f1("x"), f1("x^2"), f1("1")});
  ClosureReport rep = check_closure(g);
  REQUIRE(rep.lie_family);
  const auto& f = rep.structure.f;
  auto row = [&](int j, int k) {
    std::vector<long> out;
    for (int l = 1; l <= 4; ++l) {
      REQUIRE(f(j, k, l).is_rational());
      out.push_back(f(j, k, l).rational().get_num().get_si());
    }
    return out;
  };
  CHECK(row(2, 3) == std::vector<long>{-1, 0, 1, 0});
  CHECK(row(2, 4) == std::vector<long>{1, 0, 0, -1});
  CHECK(row(3, 4) == std::vector<long>{2, -2, 0, 0});
  CHECK(row(1, 2) == std::vector<long>{0, 0, 0, 0});

  // Without Z0 the first relation needs coefficients summing to 1, which the
  // d/dt row forbids.
  ClosureReport bare = check_closure(GeneratorSet({f1("x"), f1("x^2"), f1("1")}));
  CHECK_FALSE(bare.lie_family);
  REQUIRE(bare.structure.failed_pair);
  CHECK(*bare.structure.failed_pair == std::pair<int, int>{1, 2});
}

TEST_CASE("non-closing generators report the residual") {
  StructureResult s = solve_structure_functions(GeneratorSet({f1("x"), f1("x^3 + t")}));
  CHECK_FALSE(s.closed);
  REQUIRE(s.residual);
  CHECK_FALSE(is_zero(*s.residual));
}

TEST_CASE("dependent generators are flagged") {
  StructureResult s = solve_structure_functions(GeneratorSet({f1("x"), f1("x"), f1("1")}));
  CHECK(s.underdetermined);
}

TEST_CASE("decompose members") {
  Decomposition d = decompose_member(f1("(t + x) + b*(1 + t + x)^3"), abel());
  REQUIRE(d.in_span);
  CHECK(is_zero(d.b[0] - E("1 - b")));
  CHECK(is_zero(d.b[1] - E("b")));

  Decomposition self = decompose_member(f1("t + x"), GeneratorSet({f1("t + x")}));
  REQUIRE(self.in_span);
  CHECK(self.b[0].is_rational(1));

  Decomposition w = decompose_member(parse_field({"v", "-dF*v + omega^2*x + exp(-2*F)*x^(-3)"}, mp()),
                                     GeneratorSet({y1(), y2()}));
  REQUIRE(w.in_span);
  CHECK(is_zero(w.b[0] - E("omega^2")));
  CHECK(is_zero(w.b[1] - E("1 - omega^2")));

  Decomposition out = decompose_member(f1("x^5"), abel());
  CHECK_FALSE(out.in_span);
}

TEST_CASE("closure search") {
  ClosureSearchResult a = bracket_closure_search({f1("t + x"), f1(kX2)}, 1, 3);
  CHECK(a.verdict == ClosureSearchResult::Verdict::Closed);
  CHECK(a.generators.r() == 2);
  CHECK(a.depth == 0);

  ClosureSearchResult one = bracket_closure_search({f1("x^2")}, 1, 3);
  CHECK(one.verdict == ClosureSearchResult::Verdict::Closed);
  CHECK(one.generators.r() == 1);
  CHECK(one.depth == 0);

  ClosureSearchResult m = bracket_closure_search({y1(), y2()}, 2, 3);
  CHECK(m.verdict == ClosureSearchResult::Verdict::Closed);
  REQUIRE(m.generators.r() == 4);
  CHECK(m.depth == 2);
  REQUIRE(m.structure);
  CHECK(m.structure->closed);
  // Third and fourth generators are Y1 + Y3 and Y1 + Y4.
  ParseContext c = mp();
  CHECK(is_zero(m.generators.fields[2][0] - E("x + v", c)));
  CHECK(is_zero(m.generators.fields[3][0] - E("dF*x + 3*v", c)));

  // Nothing closes for x^3 and 1 on R with one copy.
  ClosureSearchResult cap = bracket_closure_search({f1("x^3"), f1("1")}, 1, 6);
  CHECK(cap.verdict == ClosureSearchResult::Verdict::RankCapExceeded);
}

TEST_CASE("minimal number of copies") {
  CHECK(minimal_m(abel()) == 1);
  CHECK(minimal_m(GeneratorSet({f1("x^2 + 1")})) == 1);
  ClosureSearchResult m = bracket_closure_search({y1(), y2()}, 2, 3);
  CHECK(minimal_m(m.generators) == 2);
}
