#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "liefam/families.hpp"

using namespace liefam;

namespace {

constexpr int kCases = 200;

using gen::Gen;

Assignment at(double t, double x) {
  Assignment a;
  a.set_time(t).set_state(0, 1, x);
  return a;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1 + std::abs(b)); }

}  // namespace

TEST_CASE("bracket antisymmetry") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(1000 + s);
    const int n = g.integer(1, 2);
    ProlongedField a = time_prolong(g.field(n, 3), 1), b = time_prolong(g.field(n, 3), 1);
    CHECK(is_zero(lie_bracket(a, b) + lie_bracket(b, a)));
  }
}

TEST_CASE("Jacobi identity") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(2000 + s);
    ProlongedField a = time_prolong(g.field(1, 2), 1), b = prolong(g.field(1, 2), 1),
                   c = g.coin() ? time_prolong(g.field(1, 2), 1) : prolong(g.field(1, 2), 1);
    ProlongedField j = lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a)) +
                       lie_bracket(c, lie_bracket(a, b));
    CHECK(is_zero(j));
  }
}

TEST_CASE("bracket is bilinear over constants") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(3000 + s);
    const int n = g.integer(1, 2);
    ProlongedField a = time_prolong(g.field(n, 2), 1), b = prolong(g.field(n, 2), 1),
                   c = prolong(g.field(n, 2), 1);
    Expr alpha = liefam::integer(g.integer(-4, 4));
    CHECK(equivalent(lie_bracket(a, scale(alpha, b) + c),
                     scale(alpha, lie_bracket(a, b)) + lie_bracket(a, c)));
  }
}

TEST_CASE("brackets of time-prolongations are pure prolongations") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(4000 + s);
    const int n = g.integer(1, 2), m = g.integer(1, 2);
    ProlongedField c = lie_bracket(time_prolong(g.field(n, 3), m), time_prolong(g.field(n, 3), m));
    CHECK(is_pure_prolongation(c));
  }
}

TEST_CASE("t-only combinations of time-prolongations") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(5000 + s);
    const int n = g.integer(1, 2), r = g.integer(2, 4);
    std::vector<ProlongedField> x;
    std::vector<Expr> b;
    Expr rest = liefam::integer(0);
    for (int j = 0; j < r; ++j) {
      x.push_back(time_prolong(g.field(n, 3), 1));
      if (j + 1 < r) {
        b.push_back(g.t_poly(2));
        rest = rest - b.back();
      }
    }
    std::vector<Expr> zero_sum = b, unit_sum = b;
    zero_sum.push_back(rest);
    unit_sum.push_back(rest + 1);
    CHECK(is_pure_prolongation(linear_combination(zero_sum, x)));
    CHECK(is_time_prolongation(linear_combination(unit_sum, x)));
  }
}

TEST_CASE("structure functions carry over to time-prolongations") {
  // Generators X_j = sum_l M_jl V_l over V = {0, d/dx, x d/dx} with M(t)
  // unimodular and unit row sums, so the autonomizations close.
  const std::vector<TDVectorField> basis{TDVectorField({liefam::integer(0)}),
                                         TDVectorField({liefam::integer(1)}),
                                         TDVectorField({state_var(0, 1)})};
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(6000 + s);
    std::vector<std::vector<Expr>> M(3, std::vector<Expr>(3, liefam::integer(0)));
    for (int j = 0; j < 3; ++j) M[j][j] = liefam::integer(1);
    for (int round = 0; round < 2; ++round) {
      int v[3] = {g.integer(-2, 2), g.integer(-2, 2), 0};
      v[2] = -v[0] - v[1];
      int e[3] = {g.integer(-2, 2), g.integer(-2, 2), g.integer(-2, 2)};
      int w[3] = {v[1] * e[2] - v[2] * e[1], v[2] * e[0] - v[0] * e[2], v[0] * e[1] - v[1] * e[0]};
      Expr p = g.t_poly(1);
      // M <- (I + p w v^T) M
      std::vector<std::vector<Expr>> next = M;
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
          Expr acc = M[j][l];
          for (int q = 0; q < 3; ++q) acc = acc + p * liefam::integer(w[j] * v[q]) * M[q][l];
          next[j][l] = acc;
        }
      M = next;
    }
    std::vector<TDVectorField> fields;
    for (int j = 0; j < 3; ++j) {
      Expr c = liefam::integer(0);
      for (int l = 0; l < 3; ++l) c = c + M[j][l] * basis[l][0];
      fields.push_back(TDVectorField({normalize(c)}));
    }
    StructureResult base = solve_structure_functions(GeneratorSet(fields));
    REQUIRE(base.closed);
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k) {
        Expr row = liefam::integer(0);
        for (int l = 1; l <= 3; ++l) row = row + base.f(j, k, l);
        CHECK(is_zero(row));
      }
    for (int m : {1, 2}) {
      CAPTURE(m);
      std::vector<ProlongedField> tp;
      for (const auto& f : fields) tp.push_back(time_prolong(f, m));
      for (int j = 1; j <= 3; ++j)
        for (int k = j + 1; k <= 3; ++k) {
          std::vector<Expr> c{base.f(j, k, 1), base.f(j, k, 2), base.f(j, k, 3)};
          CHECK(equivalent(lie_bracket(tp[j - 1], tp[k - 1]), linear_combination(c, tp)));
        }
    }
    if (s % 4 == 0) {
      // Closure search on a closed set finds nothing new.
      ClosureSearchResult cs = bracket_closure_search(fields, 2, 2);
      CHECK(cs.verdict == ClosureSearchResult::Verdict::Closed);
      CHECK(cs.generators.r() == 3);
    }
  }
}

TEST_CASE("closure search adds nothing to a closed generator set") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(6500 + s);
    // Affine members a(t) + b(t) x: the zero field, d/dx and x d/dx already
    // span every bracket.
    std::vector<TDVectorField> fields{TDVectorField({liefam::integer(0)}),
                                      TDVectorField({liefam::integer(1) + g.t_poly(1) * state_var(0, 1)}),
                                      TDVectorField({g.t_poly(1) + liefam::integer(g.integer(1, 3)) * state_var(0, 1)})};
    ClosureReport rep = check_closure(GeneratorSet(fields));
    if (!rep.lie_family) continue;
    ClosureSearchResult cs = bracket_closure_search(fields, 2, 2);
    CHECK(cs.verdict == ClosureSearchResult::Verdict::Closed);
    CHECK(cs.generators.r() <= 3);
  }
}

TEST_CASE("member decomposition rebuilds the member") {
  GeneratorSet abel = abel_family().generators;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(7000 + s);
    Expr b1 = g.coin() ? g.t_poly(2) : liefam::sin(g.t_poly(1));
    Expr b2 = 1 - b1;
    TDVectorField y({normalize(b1 * abel.fields[0][0] + b2 * abel.fields[1][0])});
    Decomposition d = decompose_member(y, abel);
    REQUIRE(d.in_span);
    std::vector<ProlongedField> bars{autonomize(abel.fields[0]), autonomize(abel.fields[1])};
    CHECK(equivalent(linear_combination(d.b, bars), autonomize(y)));
    CHECK(is_zero(d.b[0] - b1));
  }
}

TEST_CASE("derivatives agree with central differences") {
  const double h = 1e-5;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(8000 + s);
    Expr e = g.tree(4);
    const double t = g.uniform(-1, 1), x = g.uniform(-1, 1);
    for (const Symbol& var : {Symbol::time(), Symbol::state(0, 1)}) {
      Expr d = differentiate(e, var);
      double exact = evaluate(d, at(t, x));
      double fd = var.is_time() ? (evaluate(e, at(t + h, x)) - evaluate(e, at(t - h, x))) / (2 * h)
                                : (evaluate(e, at(t, x + h)) - evaluate(e, at(t, x - h))) / (2 * h);
      CAPTURE(to_string(e));
      CHECK(std::abs(fd - exact) <= 1e-6 * (1 + std::abs(exact)));
    }
  }
}

TEST_CASE("differentiation is linear") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(9000 + s);
    Expr a = g.tree(3), b = g.tree(3);
    Expr alpha = liefam::rational(Rational(g.integer(-5, 5), g.integer(1, 3)));
    Expr beta = liefam::integer(g.integer(-5, 5));
    Symbol x = Symbol::state(0, 1);
    CHECK(is_zero(differentiate(alpha * a + beta * b, x) -
                  (alpha * differentiate(a, x) + beta * differentiate(b, x))));
  }
}

TEST_CASE("evaluation respects the constructors") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(10000 + s);
    Expr a = g.tree(3), b = g.tree(3);
    Assignment p = at(g.uniform(-1, 1), g.uniform(-1, 1));
    const double va = evaluate(a, p), vb = evaluate(b, p);
    const double tol = 1e-12;
    CHECK(close(evaluate(a + b, p), va + vb, tol));
    CHECK(close(evaluate(a - b, p), va - vb, tol));
    CHECK(close(evaluate(a * b, p), va * vb, tol));
    CHECK(close(evaluate(-a, p), -va, tol));
    CHECK(close(evaluate(liefam::sin(a), p), std::sin(va), tol));
    CHECK(close(evaluate(liefam::cos(a), p), std::cos(va), tol));
    CHECK(close(evaluate(liefam::exp(liefam::sin(a)), p), std::exp(std::sin(va)), tol));
    CHECK(close(evaluate(ipow(a, 3), p), va * va * va, tol));
    CHECK(close(evaluate(liefam::sqrt(2 + liefam::cos(a)), p), std::sqrt(2 + std::cos(va)), tol));
    CHECK(close(evaluate(liefam::ln(2 + liefam::sin(a)), p), std::log(2 + std::sin(va)), tol));
    if (std::abs(vb) > 1e-3) CHECK(close(evaluate(a / b, p), va / vb, 1e-10));
  }
}

TEST_CASE("printed expressions parse back") {
  ParseContext ctx;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(11000 + s);
    Expr e = g.tree(4);
    std::string text = to_string(e, ctx);
    CAPTURE(text);
    Expr back = parse(text, ctx);
    CHECK(equivalent(back, e));
    CHECK(to_string(back, ctx) == text);
  }
}

TEST_CASE("apply is a derivation") {
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(12000 + s);
    ProlongedField a = g.coin() ? time_prolong(g.field(1, 3), 1) : prolong(g.field(1, 3), 1);
    Expr f = g.tree(3), h = move_copy(g.tree(3), 1, 0, 1);
    CHECK(is_zero(apply(a, f * h) - (f * apply(a, h) + h * apply(a, f))));
  }
}

TEST_CASE("forward then backward integration returns to the start") {
  const double rtol = 1e-10;
  IntegratorConfig cfg;
  cfg.rtol = rtol;
  cfg.atol = 1e-14;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(13000 + s);
    const double a = g.uniform(-1, 1), c = g.uniform(-1, 1), w = g.uniform(0.5, 2);
    RHS f = [=](double t, const double* x, double* dx) {
      dx[0] = x[1];
      dx[1] = -w * w * x[0] + a * std::sin(t) * x[1] + c * std::cos(t);
    };
    std::vector<double> x0{g.uniform(-2, 2), g.uniform(-2, 2)};
    const double t1 = g.uniform(0.5, 3);
    Trajectory fw = integrate(f, 2, x0, 0.0, t1, cfg);
    Trajectory bw = integrate(f, 2, fw.sample(t1), t1, 0.0, cfg);
    std::vector<double> back = bw.sample(0.0);
    const double norm = std::hypot(x0[0], x0[1]);
    CHECK(std::hypot(back[0] - x0[0], back[1] - x0[1]) <= 10 * rtol * std::max(norm, 1.0));
  }
}

TEST_CASE("Abel rule and its invariant are inverse") {
  SuperpositionRule r = abel_family().rule;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(14000 + s);
    const double t = g.uniform(0, 1), x1 = g.uniform(-0.5, 1.5);
    const double floor = -std::exp(2 * t) / ((x1 + t + 1) * (x1 + t + 1));
    const double k = g.uniform(0.9 * floor, 3);
    const double x0 = apply_rule(r, t, {{x1}}, {{k}, {}})[0];
    // Independent oracle for Phi.
    const double u = 1 / ((x1 + t + 1) * (x1 + t + 1)) + k * std::exp(-2 * t);
    CHECK(close(x0, 1 / std::sqrt(u) - t - 1, 1e-12));
    Assignment p;
    p.set_time(t).set_state(0, 1, x0).set_state(1, 1, x1);
    CHECK(close(evaluate((*r.psi)[0], p), k, 1e-9));
    ConstantsResult back = compute_constants(r, t, {{x1}}, {x0});
    CHECK(close(back.constants.k[0], k, 1e-9));
  }
}

namespace {

struct MpSample {
  double t, x1, v1, x2, v2, k1, k2, sign;
};

// Closed-form pieces of the two-solution Milne-Pinney rule with F = c t.
struct MpOracle {
  double c;
  double invariant(const MpSample& p) const {
    double w = p.x1 * p.v2 - p.x2 * p.v1;
    return std::exp(2 * c * p.t) * w * w + (p.x1 / p.x2) * (p.x1 / p.x2) + (p.x2 / p.x1) * (p.x2 / p.x1);
  }
  double lambda(const MpSample& p) const {
    double i = invariant(p);
    return (p.k1 * p.k2 * i + p.k1 * p.k1 + p.k2 * p.k2 - 1) / (i * i - 4);
  }
  double radicand(const MpSample& p) const {
    double w = p.x1 * p.v2 - p.x2 * p.v1, l = lambda(p);
    return p.k1 * p.x1 * p.x1 + p.k2 * p.x2 * p.x2 +
           2 * p.sign * std::sqrt(std::max(l, 0.0)) * std::exp(c * p.t) * p.x1 * p.x2 * w;
  }
  bool real(const MpSample& p) const {
    double w = p.x1 * p.v2 - p.x2 * p.v1, i = invariant(p);
    double guard = lambda(p) * (-(std::pow(p.x1, 4) + std::pow(p.x2, 4)) + i * p.x1 * p.x1 * p.x2 * p.x2);
    (void)w;
    return guard >= 0 && lambda(p) >= 0 && radicand(p) >= 0;
  }
};

MpSample mp_sample(Gen& g) {
  MpSample p;
  p.t = g.uniform(0, 1);
  p.x1 = g.uniform(0.3, 2) * (g.coin() ? 1 : -1);
  p.x2 = g.uniform(0.3, 2);
  p.v1 = g.uniform(-1, 1);
  p.v2 = g.uniform(-1, 1);
  p.k1 = g.uniform(-1, 2);
  p.k2 = g.uniform(-1, 2);
  p.sign = g.coin() ? 1.0 : -1.0;
  return p;
}

RuleConstants mp_constants(const MpSample& p) { return {{p.k1, p.k2}, {{"s", p.sign}}}; }

}  // namespace

TEST_CASE("Milne-Pinney rule is real exactly where the guards hold") {
  const double c = 0.2;
  MpOracle o{c};
  SuperpositionRule r = bind_realizations(milne_pinney_family().rule, {{"F", parse("t/5")}});
  int real = 0, rejected = 0;
  for (int s = 0; s < kCases; ++s) {
    CAPTURE(s);
    Gen g(15000 + s);
    MpSample p = mp_sample(g);
    const bool expect = o.real(p);
    try {
      State x = apply_rule(r, p.t, {{p.x1, p.v1}, {p.x2, p.v2}}, mp_constants(p));
      CHECK(expect);
      CHECK(std::isfinite(x[0]));
      CHECK(std::isfinite(x[1]));
      CHECK(close(x[0], std::sqrt(o.radicand(p)), 1e-9));
      ++real;
    } catch (const RuleDomainError&) {
      CHECK_FALSE(expect);
      ++rejected;
    }
  }
  // Both outcomes occur in the sample.
  CHECK(real > 20);
  CHECK(rejected > 20);
}

TEST_CASE("Milne-Pinney constants round trip") {
  SuperpositionRule r = bind_realizations(milne_pinney_family().rule, {{"F", parse("t/5")}});
  MpOracle o{0.2};
  int tested = 0;
  for (int s = 0; tested < kCases; ++s) {
    CAPTURE(s);
    Gen g(16000 + s);
    MpSample p = mp_sample(g);
    p.k1 = g.uniform(0.2, 1.5);
    p.k2 = g.uniform(0.2, 1.5);
    if (!o.real(p) || o.radicand(p) < 1e-2) continue;
    ++tested;
    std::vector<State> xs{{p.x1, p.v1}, {p.x2, p.v2}};
    State x0 = apply_rule(r, p.t, xs, mp_constants(p));
    NewtonConfig nc;
    nc.initial_guess = {p.k1 + 0.05, p.k2 - 0.05};
    ConstantsResult back = compute_constants(r, p.t, xs, x0, nc);
    State again = apply_rule(r, p.t, xs, back.constants);
    CHECK(close(again[0], x0[0], 1e-8));
    CHECK(close(again[1], x0[1], 1e-8));
  }
}

TEST_CASE("Milne-Pinney rule is symmetric in its particular solutions") {
  SuperpositionRule r = bind_realizations(milne_pinney_family().rule, {{"F", parse("t/5")}});
  MpOracle o{0.2};
  int tested = 0;
  for (int s = 0; tested < kCases; ++s) {
    CAPTURE(s);
    Gen g(17000 + s);
    MpSample p = mp_sample(g);
    if (!o.real(p)) continue;
    ++tested;
    State x = apply_rule(r, p.t, {{p.x1, p.v1}, {p.x2, p.v2}}, mp_constants(p));
    // Swapping the solutions flips the sign of x1 v2 - x2 v1.
    State y = apply_rule(r, p.t, {{p.x2, p.v2}, {p.x1, p.v1}}, {{p.k2, p.k1}, {{"s", -p.sign}}});
    CHECK(close(y[0], x[0], 1e-12));
    CHECK(close(y[1], x[1], 1e-10));
  }
}
