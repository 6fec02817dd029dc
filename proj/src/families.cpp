#include "liefam/families.hpp"

#include <algorithm>

#include "liefam/poly.hpp"

namespace liefam {

ParseContext FamilyDefinition::context() const {
  ParseContext ctx;
  ctx.n = n;
  ctx.m = m;
  ctx.coord_names = coord_names;
  ctx.params = rule.constants;
  for (const auto& d : rule.discrete) ctx.params.push_back(d.name);
  return ctx;
}

namespace {

Expr p(const std::string& s, const ParseContext& ctx) { return parse(s, ctx); }

TDVectorField add_fields(const TDVectorField& a, const TDVectorField& b) {
  std::vector<Expr> c;
  for (int i = 0; i < a.n; ++i) c.push_back(normalize(a[i] + b[i]));
  return TDVectorField(std::move(c));
}

void set_row(StructureFunctions& f, int j, int k, const std::vector<Expr>& row) {
  for (int l = 1; l <= f.r; ++l) {
    f(j, k, l) = row[static_cast<std::size_t>(l - 1)];
    f(k, j, l) = neg(row[static_cast<std::size_t>(l - 1)]);
  }
}

}  // namespace

FamilyDefinition abel_family() {
  FamilyDefinition fd;
  fd.name = "abel";
  fd.description = "dx/dt = (t + x) + b(t) (1 + t + x)^3";
  fd.n = 1;
  fd.m = 1;
  fd.coord_names = {"x"};
  fd.parameters = {"b"};

  ParseContext ctx;
  ctx.m = 1;
  ctx.params = {"k1"};

  fd.member = parse_field({"(t + x) + b*(1 + t + x)^3"}, ctx);
  TDVectorField x1 = parse_field({"t + x"}, ctx);
  TDVectorField x2 =
      parse_field({"(1 + t)^3 + t + (3*(1 + t)^2 + 1)*x + 3*(1 + t)*x^2 + x^3"}, ctx);
  fd.generators = GeneratorSet({x1, x2});
  fd.search_members = {x1, x2};

  StructureFunctions f(2);
  set_row(f, 1, 2, {integer(-2), integer(2)});
  fd.expected = f;

  fd.first_integrals = {p("exp(2*t)*((x0 + t + 1)^(-2) - (x1 + t + 1)^(-2))", ctx)};

  SuperpositionRule& r = fd.rule;
  r.name = "abel";
  r.n = 1;
  r.m = 1;
  r.constants = {"k1"};
  r.phi = {p("((x1 + t + 1)^(-2) + k1*exp(-2*t))^(-1/2) - t - 1", ctx)};
  r.psi = fd.first_integrals;
  r.validity = {
      {ConstraintKind::Positive, p("x1 + t + 1", ctx), 0.0, "x1 + t + 1 > 0"},
      {ConstraintKind::Positive, p("(x1 + t + 1)^(-2) + k1*exp(-2*t)", ctx), 0.0,
       "radicand > 0"},
  };

  // Solutions started at |x| <= 0.5 with b = sin t leave every bounded set
  // before t = 1, so the default window stops at t = 1/2.
  fd.scenario.particulars = {{0.3}};
  fd.scenario.reference = {-0.2};
  fd.scenario.t0 = 0.0;
  fd.scenario.t1 = 0.5;
  fd.scenario.grid = 101;
  fd.realizations = {{"b", p("sin(t)", ctx)}};
  return fd;
}

FamilyDefinition milne_pinney_family() {
  FamilyDefinition fd;
  fd.name = "milne-pinney";
  fd.description = "x'' = -F'(t) x' + omega(t)^2 x + exp(-2 F(t)) x^-3, as a system in (x, v)";
  fd.n = 2;
  fd.m = 2;
  fd.coord_names = {"x", "v"};
  fd.parameters = {"F", "omega"};

  ParseContext ctx;
  ctx.n = 2;
  ctx.m = 2;
  ctx.coord_names = {"x", "v"};
  ctx.params = {"k1", "k2", "s"};

  fd.member = parse_field({"v", "-dF*v + omega^2*x + exp(-2*F)*x^(-3)"}, ctx);
  TDVectorField y1 = parse_field({"v", "-dF*v + x + exp(-2*F)*x^(-3)"}, ctx);
  TDVectorField y2 = parse_field({"v", "-dF*v + exp(-2*F)*x^(-3)"}, ctx);

  // Y3 and Y4 come from brackets; [Y1, Y2] and [Y1, Y3] have no d/dt part,
  // so Y1 is added back to obtain fields whose autonomizations are lifts.
  ProlongedField b1 = autonomize(y1);
  TDVectorField y3 = base_field(lie_bracket(b1, autonomize(y2)));
  TDVectorField y4 = base_field(lie_bracket(b1, prolong(y3, 0)));
  fd.generators = GeneratorSet({y1, y2, add_fields(y1, y3), add_fields(y1, y4)});
  fd.search_members = {y1, y2};

  StructureFunctions f(4);
  auto e = [&](const std::string& s) { return p(s, ctx); };
  const std::string A = "(4 + dF^2 + 2*d2F)", B = "(dF*d2F + d3F)";
  set_row(f, 1, 2, {e("-1"), e("0"), e("1"), e("0")});
  set_row(f, 1, 3, {e("-1"), e("0"), e("0"), e("1")});
  set_row(f, 1, 4, {e("-(" + A + " + " + B + ")"), e(B), e(A), e("0")});
  set_row(f, 2, 3, {e("2"), e("-2"), e("-1"), e("1")});
  set_row(f, 2, 4,
          {e("-(1 + dF^2 + 2*d2F + " + B + ")"), e(B), e("1 + dF^2 + 2*d2F"), e("0")});
  set_row(f, 3, 4,
          {e("-9 - 3*dF^2 - 6*d2F - " + B), e("8 + d3F + dF*d2F + 2*dF^2 + 4*d2F"), e(A),
           e("-3")});
  fd.expected = f;

  auto pair_invariant = [&](const std::string& a, const std::string& b) {
    return e("exp(2*F)*(x" + a + "*v" + b + " - x" + b + "*v" + a + ")^2 + (x" + a + "/x" + b +
             ")^2 + (x" + b + "/x" + a + ")^2");
  };
  fd.first_integrals = {pair_invariant("0", "1"), pair_invariant("0", "2"),
                        pair_invariant("1", "2")};

  // Position from the two-solution invariant; the inner radical is continued
  // through zeros of x1 v2 - x2 v1 with a branch sign s fixed at t0.
  const std::string I = "(exp(2*F)*(x1*v2 - x2*v1)^2 + (x1/x2)^2 + (x2/x1)^2)";
  const std::string lam = "((k1*k2*" + I + " + (-1 + k1^2 + k2^2))/(" + I + "^2 - 4))";
  // lambda12 is a function of I, hence constant along solutions; it is held
  // fixed as the placeholder L while differentiating so the velocity stays
  // regular where lambda12 = 0.
  ParseContext with_l = ctx;
  with_l.params.push_back("L");
  const std::string radicand = "k1*x1^2 + k2*x2^2 + 2*s*L*exp(F)*x1*x2*(x1*v2 - x2*v1)";
  Expr x0_l = p("sqrt(" + radicand + ")", with_l);
  // Velocity: total derivative of the position along any member (Y2 here).
  Expr v0_l = apply(time_prolong(y2, 2), x0_l);
  Substitution root{{Symbol::param("L"), e("sqrt(" + lam + ")")}};
  Expr x0 = substitute(x0_l, root), v0 = substitute(v0_l, root);

  SuperpositionRule& r = fd.rule;
  r.name = "milne-pinney";
  r.n = 2;
  r.m = 2;
  r.constants = {"k1", "k2"};
  r.phi = {x0, v0};
  r.validity = {
      {ConstraintKind::NonZero, e("x1"), 0.0, "x1 != 0"},
      {ConstraintKind::NonZero, e("x2"), 0.0, "x2 != 0"},
      {ConstraintKind::NonSingular, e(I + "^2 - 4"), 1e-10, "I^2 - 4 != 0"},
      {ConstraintKind::NonNegative, e(lam + "*(-(x1^4 + x2^4) + " + I + "*x1^2*x2^2)"), 0.0,
       "lambda12*(I x1^2 x2^2 - x1^4 - x2^4) >= 0"},
      {ConstraintKind::NonNegative, e(lam), 0.0, "lambda12 >= 0"},
      {ConstraintKind::NonNegative,
       e("k1*x1^2 + k2*x2^2 + 2*s*sqrt(" + lam + ")*exp(F)*x1*x2*(x1*v2 - x2*v1)"), 0.0,
       "outer radicand >= 0"},
  };
  r.discrete = {{"s", {1.0, -1.0}}};

  fd.scenario.particulars = {{1.0, 0.0}, {1.3, 0.1}};
  fd.scenario.reference = {1.2, 0.0};
  fd.scenario.t0 = 0.0;
  fd.scenario.t1 = 1.0;
  fd.scenario.grid = 101;
  fd.realizations = {{"F", e("t/5")}, {"omega", e("1")}};
  return fd;
}

std::vector<std::string> builtin_family_names() { return {"abel", "milne-pinney"}; }

FamilyDefinition builtin_family(const std::string& name) {
  if (name == "abel") return abel_family();
  if (name == "milne-pinney" || name == "mp") return milne_pinney_family();
  throw InvalidArgument("unknown family '" + name + "' (known: abel, milne-pinney)");
}

TDVectorField instantiate(const FamilyDefinition& fd, const Realizations& z) {
  for (const auto& name : fd.parameters)
    if (!z.count(name)) throw UnboundSymbolError("no realization bound for '" + name + "'");
  return bind_realizations(fd.member, z);
}

Realizations parse_realizations(const std::vector<std::string>& bindings,
                                const std::vector<std::string>& allowed) {
  Realizations z;
  ParseContext ctx;
  ctx.opaque.clear();
  for (const auto& b : bindings) {
    auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidArgument("realization '" + b + "' is not of the form name=expr");
    std::string name = b.substr(0, eq);
    name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw InvalidArgument("'" + name + "' is not a parameter of this family");
    Expr e = parse(b.substr(eq + 1), ctx);
    for (const auto& s : free_symbols(e))
      if (!s.is_time())
        throw InvalidArgument("realization of '" + name + "' may only depend on t");
    z[name] = e;
  }
  return z;
}

std::vector<Expr> abel_generator_residuals() {
  ParseContext ctx;
  Expr b2 = p("3*(1 + t)", ctx);
  Expr b1 = p("3*(1 + t)^2 + 1", ctx);
  Expr b0 = p("(1 + t)^3 + t", ctx);
  Expr t = time_var();
  auto d = [&](const Expr& e) { return differentiate(e, Symbol::time()); };
  return {
      d(b2) - (b2 - 3 * t),
      d(b1) - (2 * (b1 - 1) - 2 * t * b2),
      d(b0) - (2 * (b0 - t) + b0 - t * b1 + 1),
  };
}

}  // namespace liefam
