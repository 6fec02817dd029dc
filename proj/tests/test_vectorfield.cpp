#include <doctest.h>

#include "liefam/vectorfield.hpp"

using namespace liefam;

namespace {

const char* kX2 = "(1 + t)^3 + t + (3*(1 + t)^2 + 1)*x + 3*(1 + t)*x^2 + x^3";

ParseContext mp(int m = 0) {
  ParseContext c;
  c.n = 2;
  c.m = m;
  c.coord_names = {"x", "v"};
  return c;
}

Expr E(const std::string& s, const ParseContext& c = {}) { return parse(s, c); }

}  // namespace

TEST_CASE("fields reject foreign copies") {
  ParseContext c;
  c.m = 1;
  CHECK_THROWS_AS(TDVectorField({E("x1", c)}), InvalidArgument);
  // Components are parsed over copy 0 only.
  CHECK_THROWS_AS(parse_field({"x1"}, ParseContext{}), UndeclaredSymbolError);
}

TEST_CASE("autonomization") {
  ProlongedField z = autonomize(TDVectorField({Expr()}));
  CHECK(z.dt.is_rational(1));
  CHECK(z.coeff(0, 1).is_rational(0));

  ProlongedField a = autonomize(parse_field({"t + x"}, {}));
  CHECK(a.m == 0);
  CHECK(structurally_equal(a.coeff(0, 1), E("t + x")));

  ProlongedField y2 = autonomize(parse_field({"v", "-dF*v + exp(-2*F)*x^(-3)"}, mp()));
  CHECK(y2.dt.is_rational(1));
  CHECK(is_zero(y2.coeff(0, 2) - E("-dF*v + exp(-2*F)*x^(-3)", mp())));
}

TEST_CASE("prolongations copy the coefficient to every slot") {
  TDVectorField x1 = parse_field({"t + x"}, {});
  ProlongedField p = prolong(x1, 1);
  CHECK(p.dt.is_rational(0));
  ParseContext c;
  c.m = 1;
  CHECK(structurally_equal(p.coeff(0, 1), E("t + x0", c)));
  CHECK(structurally_equal(p.coeff(1, 1), E("t + x1", c)));
  CHECK(is_pure_prolongation(p));
  CHECK_FALSE(is_pure_prolongation(autonomize(x1)));

  ProlongedField tp = time_prolong(x1, 0);
  ProlongedField au = autonomize(x1);
  CHECK(equivalent(tp, au));
  CHECK(is_time_prolongation(time_prolong(parse_field({"v", "x"}, mp()), 2)));
}

TEST_CASE("Abel bracket") {
  ProlongedField a = autonomize(parse_field({"t + x"}, {}));
  ProlongedField b = autonomize(parse_field({kX2}, {}));
  ProlongedField c = lie_bracket(a, b);
  CHECK(c.dt.is_rational(0));
  // Hand computation: dX2/dt + (t+x) dX2/dx - X2 = 2 (X2 - X1) on the x slot.
  CHECK(is_zero(c.coeff(0, 1) - 2 * (E(kX2) - E("t + x"))));
  CHECK(equivalent(c, scale(integer(2), b - a)));
  CHECK(is_zero(lie_bracket(a, a)));
}

TEST_CASE("Milne-Pinney bracket gives the x d/dx - (v + x dF) d/dv lift") {
  ProlongedField y1 = time_prolong(parse_field({"v", "-dF*v + x + exp(-2*F)*x^(-3)"}, mp()), 2);
  ProlongedField y2 = time_prolong(parse_field({"v", "-dF*v + exp(-2*F)*x^(-3)"}, mp()), 2);
  ProlongedField y3 = prolong(parse_field({"x", "-(v + x*dF)"}, mp()), 2);
  ProlongedField c = lie_bracket(y1, y2);
  CHECK(equivalent(c, y3));
  CHECK(is_pure_prolongation(c));
}

TEST_CASE("apply") {
  ProlongedField dt = autonomize(TDVectorField({Expr()}));
  CHECK(is_zero(apply(dt, time_var()) - integer(1)));

  ParseContext c;
  c.m = 1;
  Expr delta = E("exp(2*t)*((x0 + t + 1)^(-2) - (x1 + t + 1)^(-2))", c);
  TDVectorField x1 = parse_field({"t + x"}, {});
  TDVectorField x2 = parse_field({kX2}, {});
  CHECK(is_zero(apply(time_prolong(x1, 1), delta)));
  CHECK(is_zero(apply(time_prolong(x2, 1) - time_prolong(x1, 1), delta)));
  CHECK_FALSE(is_zero(apply(time_prolong(x1, 1), E("x0", c))));
}

TEST_CASE("slot coherence survives different spellings") {
  ProlongedField p = prolong(parse_field({"(x + 1)^2"}, {}), 1);
  ParseContext c;
  c.m = 1;
  p.coeff(1, 1) = E("x1^2 + 2*x1 + 1", c);
  CHECK(is_slot_coherent(p));
  p.coeff(1, 1) = E("x1^2 + 2*x1", c);
  CHECK_FALSE(is_slot_coherent(p));
}

TEST_CASE("move_copy and base_field") {
  ParseContext c;
  c.m = 2;
  CHECK(structurally_equal(move_copy(E("x0 + t*x0^2", c), 1, 0, 2), E("x2 + t*x2^2", c)));
  TDVectorField y = parse_field({"v", "x*t"}, mp());
  TDVectorField back = base_field(time_prolong(y, 2));
  CHECK(structurally_equal(back[1], y[1]));
}

TEST_CASE("printing") {
  ProlongedField a = autonomize(parse_field({"t + x"}, {}));
  CHECK(to_string(a, {}) == "d/dt: 1\nd/dx0: t + x0");
  CHECK(to_string(parse_field({"v", "-x"}, mp()), mp()) == "v0; -x0");
}
