#include "liefam/superposition.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace liefam {

namespace {

std::vector<Symbol> rule_inputs(const SuperpositionRule& r) {
  std::vector<Symbol> in{Symbol::time()};
  for (int a = 0; a <= r.m; ++a)
    for (int i = 1; i <= r.n; ++i) in.push_back(Symbol::state(a, i));
  for (const auto& k : r.constants) in.push_back(Symbol::param(k));
  for (const auto& d : r.discrete) in.push_back(Symbol::param(d.name));
  return in;
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Phi, Jacobian dPhi/dk and validity predicates compiled once.
class CompiledRule {
 public:
  explicit CompiledRule(const SuperpositionRule& r)
      : r_(r), inputs_(rule_inputs(r)), phi_(r.phi, inputs_), jac_(jacobian(r), inputs_) {
    if (static_cast<int>(r.phi.size()) != r.n || static_cast<int>(r.constants.size()) != r.n)
      throw InvalidArgument("rule needs n components and n constants");
    for (const auto& c : r.validity) validity_.emplace_back(std::vector<Expr>{c.expr}, inputs_);
    if (r.psi) psi_.emplace(*r.psi, inputs_);
  }

  const SuperpositionRule& rule() const { return r_; }

  std::vector<double> layout(double t, const State* x0, const std::vector<State>& parts,
                             const RuleConstants& c) const {
    const std::size_t n = static_cast<std::size_t>(r_.n);
    if (static_cast<int>(parts.size()) != r_.m)
      throw InvalidArgument("rule needs " + std::to_string(r_.m) + " particular solutions");
    std::vector<double> in(inputs_.size(), 0.0);
    in[0] = t;
    if (x0) std::copy(x0->begin(), x0->end(), in.begin() + 1);
    for (int a = 1; a <= r_.m; ++a) {
      if (parts[a - 1].size() != n) throw InvalidArgument("particular solution has wrong dimension");
      std::copy(parts[a - 1].begin(), parts[a - 1].end(), in.begin() + 1 + a * r_.n);
    }
    std::size_t off = 1 + static_cast<std::size_t>((r_.m + 1) * r_.n);
    if (!c.k.empty()) {
      if (c.k.size() != n) throw InvalidArgument("rule needs " + std::to_string(n) + " constants");
      std::copy(c.k.begin(), c.k.end(), in.begin() + static_cast<long>(off));
    }
    off += n;
    for (const auto& d : r_.discrete) {
      auto it = c.discrete.find(d.name);
      in[off++] = it != c.discrete.end() ? it->second : d.values.at(0);
    }
    return in;
  }

  void set_k(std::vector<double>& in, const std::vector<double>& k) const {
    std::copy(k.begin(), k.end(), in.begin() + 1 + (r_.m + 1) * r_.n);
  }

  void check_validity(const std::vector<double>& in) const {
    for (std::size_t i = 0; i < validity_.size(); ++i) {
      const auto& c = r_.validity[i];
      double v;
      try {
        v = validity_[i].run1(in);
      } catch (const DomainError& e) {
        throw RuleDomainError(c.label, e.what());
      }
      bool ok = true;
      switch (c.kind) {
        case ConstraintKind::NonNegative:
          ok = v >= 0.0;
          break;
        case ConstraintKind::Positive:
          ok = v > 0.0;
          break;
        case ConstraintKind::NonZero:
          ok = std::abs(v) > c.eps;
          break;
        case ConstraintKind::NonSingular:
          if (!(std::abs(v) > c.eps)) throw SingularInvariantError(c.label, "value " + format(v));
          break;
      }
      if (!ok) throw RuleDomainError(c.label, "value " + format(v));
    }
  }

  State phi(const std::vector<double>& in) const {
    check_validity(in);
    State out(static_cast<std::size_t>(r_.n));
    phi_.run(in, out);
    return out;
  }

  Eigen::MatrixXd jac(const std::vector<double>& in) const {
    std::vector<double> v(static_cast<std::size_t>(r_.n * r_.n));
    jac_.run(in, v);
    Eigen::MatrixXd j(r_.n, r_.n);
    for (int a = 0; a < r_.n; ++a)
      for (int b = 0; b < r_.n; ++b) j(a, b) = v[static_cast<std::size_t>(a * r_.n + b)];
    return j;
  }

  std::optional<State> psi(const std::vector<double>& in) const {
    if (!psi_) return std::nullopt;
    State out(static_cast<std::size_t>(r_.n));
    psi_->run(in, out);
    return out;
  }

 private:
  static std::vector<Expr> jacobian(const SuperpositionRule& r) {
    std::vector<Expr> j;
    for (const auto& p : r.phi)
      for (const auto& k : r.constants) j.push_back(differentiate(p, Symbol::param(k)));
    return j;
  }

  const SuperpositionRule& r_;
  std::vector<Symbol> inputs_;
  Program phi_;
  Program jac_;
  std::vector<Program> validity_;
  std::optional<Program> psi_;
};

double inf_norm(const State& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<std::map<std::string, double>> discrete_choices(const SuperpositionRule& r) {
  std::vector<std::map<std::string, double>> out{{}};
  for (const auto& d : r.discrete) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& base : out)
      for (double v : d.values) {
        auto c = base;
        c[d.name] = v;
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

// Residual of Phi(k) - x0; nullopt when Phi is not evaluable at k.
std::optional<State> residual(const CompiledRule& cr, std::vector<double>& in,
                              const std::vector<double>& k, const State& x0) {
  cr.set_k(in, k);
  try {
    State p = cr.phi(in);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= x0[i];
    if (!std::isfinite(inf_norm(p))) return std::nullopt;
    return p;
  } catch (const Error&) {
    return std::nullopt;
  }
}

ConstantsResult newton(const CompiledRule& cr, double t, const std::vector<State>& parts,
                       const State& x0, const std::map<std::string, double>& disc,
                       const NewtonConfig& cfg) {
  const SuperpositionRule& r = cr.rule();
  const int n = r.n;
  std::vector<double> k = cfg.initial_guess.empty() ? std::vector<double>(n, 1.0) : cfg.initial_guess;
  if (static_cast<int>(k.size()) != n) throw InvalidArgument("initial guess has wrong dimension");
  RuleConstants c{k, disc};
  std::vector<double> in = cr.layout(t, nullptr, parts, c);
  const double scale = std::max(1.0, inf_norm(x0));
  auto res = residual(cr, in, k, x0);
  if (!res) throw NewtonError("rule not evaluable at the initial guess");
  for (int it = 0; it <= cfg.max_iter; ++it) {
    double rn = inf_norm(*res);
    if (rn <= cfg.tol * scale) return {{k, disc}, false, it, rn};
    if (it == cfg.max_iter) break;
    cr.set_k(in, k);
    Eigen::MatrixXd j = cr.jac(in);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
    if (!lu.isInvertible() || !std::isfinite(j.norm()))
      throw NewtonError("Jacobian of the rule with respect to k is singular");
    Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(res->data(), n);
    Eigen::VectorXd delta = lu.solve(-rv);
    double lambda = 1.0;
    bool stepped = false;
    while (lambda > 1e-10) {
      std::vector<double> trial(k);
      for (int i = 0; i < n; ++i) trial[i] += lambda * delta(i);
      auto tr = residual(cr, in, trial, x0);
      if (tr && inf_norm(*tr) < rn) {
        k = std::move(trial);
        res = std::move(tr);
        stepped = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!stepped) {
      // Rounding floor: no further decrease is representable.
      if (rn <= 1e3 * cfg.tol * scale) return {{k, disc}, false, it, rn};
      throw NewtonError("damped Newton iteration stalled at residual " + format(rn));
    }
  }
  throw NewtonError("Newton iteration did not converge in " + std::to_string(cfg.max_iter) +
                    " steps");
}

ConstantsResult constants_with(const CompiledRule& cr, double t, const std::vector<State>& parts,
                               const State& x0, const NewtonConfig& cfg) {
  const SuperpositionRule& r = cr.rule();
  if (static_cast<int>(x0.size()) != r.n) throw InvalidArgument("state has wrong dimension");
  std::optional<ConstantsResult> best;
  std::string last_error = "no branch available";
  for (const auto& disc : discrete_choices(r)) {
    try {
      ConstantsResult cand;
      if (r.psi) {
        RuleConstants c{{}, disc};
        std::vector<double> in = cr.layout(t, &x0, parts, c);
        cand.constants = {*cr.psi(in), disc};
        cand.used_psi = true;
        auto res = residual(cr, in, cand.constants.k, x0);
        if (!res) throw NewtonError("rule not evaluable at the recovered constants");
        cand.residual = inf_norm(*res);
      } else {
        cand = newton(cr, t, parts, x0, disc, cfg);
      }
      if (!best || cand.residual < best->residual) best = cand;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NewtonError("could not recover constants: " + last_error);
  return *best;
}

}  // namespace

SuperpositionRule bind_realizations(const SuperpositionRule& r, const Realizations& z) {
  SuperpositionRule out = r;
  for (auto& e : out.phi) e = bind_realizations(e, z);
  if (out.psi)
    for (auto& e : *out.psi) e = bind_realizations(e, z);
  for (auto& c : out.validity) c.expr = bind_realizations(c.expr, z);
  return out;
}

State apply_rule(const SuperpositionRule& r, double t, const std::vector<State>& particulars,
                 const RuleConstants& c) {
  CompiledRule cr(r);
  return cr.phi(cr.layout(t, nullptr, particulars, c));
}

ConstantsResult compute_constants(const SuperpositionRule& r, double t,
                                  const std::vector<State>& particulars, const State& x0,
                                  const NewtonConfig& cfg) {
  CompiledRule cr(r);
  return constants_with(cr, t, particulars, x0, cfg);
}

std::vector<double> uniform_grid(double t0, double t1, int points) {
  if (points < 2) return {t0};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = t0 + (t1 - t0) * i / (points - 1);
  g.back() = t1;
  return g;
}

VerificationReport verify_rule(const SuperpositionRule& r, const TDVectorField& member,
                               const Realizations& z, const Scenario& s, const VerifyConfig& cfg,
                               const std::string& member_name) {
  VerificationReport rep;
  rep.rule = r.name;
  rep.member = member_name;
  rep.scenario = s;
  if (static_cast<int>(s.particulars.size()) != r.m)
    throw InvalidArgument("scenario needs " + std::to_string(r.m) + " particular initial states");

  SuperpositionRule bound = bind_realizations(r, z);
  std::vector<Trajectory> trajs;
  try {
    for (const auto& x0 : s.particulars)
      trajs.push_back(integrate(make_problem(member, z, x0, s.t0, s.t1), cfg.integrator));
    trajs.push_back(integrate(make_problem(member, z, s.reference, s.t0, s.t1), cfg.integrator));
  } catch (const StepSizeUnderflow& e) {
    rep.numerical_failure = true;
    rep.failures.push_back({e.last_reliable_time(), std::string("integration failed: ") + e.what()});
    return rep;
  } catch (const IntegrationDomainError& e) {
    rep.numerical_failure = true;
    rep.failures.push_back({e.time(), std::string("integration failed: ") + e.what()});
    return rep;
  }

  CompiledRule cr(bound);
  auto parts_at = [&](double t) {
    std::vector<State> p;
    for (int a = 0; a < r.m; ++a) p.push_back(trajs[a].sample(t));
    return p;
  };

  try {
    ConstantsResult c = constants_with(cr, s.t0, parts_at(s.t0), trajs.back().sample(s.t0), cfg.newton);
    rep.constants = c.constants;
  } catch (const Error& e) {
    rep.numerical_failure = true;
    rep.failures.push_back({s.t0, std::string("constant recovery failed: ") + e.what()});
    return rep;
  }

  constexpr std::size_t kMaxListed = 20;
  std::size_t violations = 0;
  for (double t : uniform_grid(s.t0, s.t1, s.grid)) {
    State ref = trajs.back().sample(t);
    State x;
    try {
      x = cr.phi(cr.layout(t, nullptr, parts_at(t), *rep.constants));
    } catch (const Error& e) {
      ++violations;
      if (rep.failures.size() < kMaxListed) rep.failures.push_back({t, e.what()});
      continue;
    }
    double err = 0.0;
    bool within = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = std::abs(x[i] - ref[i]);
      err = std::max(err, d);
      if (!(d <= cfg.abs_tol + cfg.rel_tol * std::abs(ref[i]))) within = false;
    }
    rep.max_error = std::max(rep.max_error, err);
    if (!within) {
      ++violations;
      if (rep.failures.size() < kMaxListed)
        rep.failures.push_back({t, "error " + format(err) + " exceeds tolerance"});
    }
  }
  rep.pass = violations == 0;
  return rep;
}

nlohmann::json to_json(const Scenario& s) {
  return {{"particulars", s.particulars},
          {"reference", s.reference},
          {"span", {s.t0, s.t1}},
          {"grid", s.grid}};
}

nlohmann::json to_json(const VerificationReport& rep) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& [t, why] : rep.failures) failures.push_back({{"t", t}, {"reason", why}});
  nlohmann::json j = {{"rule", rep.rule},
                      {"member", rep.member},
                      {"scenario", to_json(rep.scenario)},
                      {"max_error", rep.max_error},
                      {"grid", rep.scenario.grid},
                      {"pass", rep.pass},
                      {"numerical_failure", rep.numerical_failure},
                      {"failures", failures}};
  if (rep.constants) j["constants"] = {{"k", rep.constants->k}, {"discrete", rep.constants->discrete}};
  return j;
}

FirstIntegralReport check_first_integral(const std::vector<Expr>& psi, const Realizations& z,
                                         const std::vector<const Trajectory*>& trajectories,
                                         const std::vector<double>& grid) {
  if (trajectories.empty() || grid.empty()) throw InvalidArgument("need trajectories and a grid");
  const int n = trajectories[0]->dimension();
  const int m = static_cast<int>(trajectories.size()) - 1;
  std::vector<Expr> bound;
  for (const auto& e : psi) bound.push_back(bind_realizations(e, z));
  std::vector<Symbol> inputs{Symbol::time()};
  for (int a = 0; a <= m; ++a)
    for (int i = 1; i <= n; ++i) inputs.push_back(Symbol::state(a, i));
  Program prog(bound, inputs);
  auto eval = [&](double t) {
    std::vector<double> in{t};
    for (const auto* tr : trajectories) {
      auto x = tr->sample(t);
      in.insert(in.end(), x.begin(), x.end());
    }
    std::vector<double> out(bound.size());
    prog.run(in, out);
    return out;
  };
  FirstIntegralReport rep;
  rep.initial_values = eval(grid.front());
  rep.per_component.assign(bound.size(), 0.0);
  for (double t : grid) {
    auto v = eval(t);
    for (std::size_t i = 0; i < v.size(); ++i) {
      double ref = rep.initial_values[i];
      double d = std::abs(v[i] - ref);
      if (std::abs(ref) > 1.0) d /= std::abs(ref);
      rep.per_component[i] = std::max(rep.per_component[i], d);
      rep.max_deviation = std::max(rep.max_deviation, d);
    }
  }
  return rep;
}

AnnihilationReport annihilation_check(const std::vector<Expr>& psi, const GeneratorSet& g, int m,
                                      const EqualityConfig& cfg) {
  AnnihilationReport rep;
  for (int j = 1; j <= g.r(); ++j) {
    ProlongedField xt = time_prolong(g.fields[j - 1], m);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      bool z = is_zero(apply(xt, psi[i]), cfg);
      rep.checks.emplace_back(j, static_cast<int>(i) + 1, z);
      rep.all_zero = rep.all_zero && z;
    }
  }
  return rep;
}

bool validate(const FlowMap& g, const EqualityConfig& cfg) {
  const int n = static_cast<int>(g.forward.size());
  if (n == 0 || static_cast<int>(g.inverse.size()) != n) return false;
  Substitution fwd, at_zero{{Symbol::time(), Expr()}};
  for (int i = 1; i <= n; ++i) fwd[Symbol::state(0, i)] = g.forward[i - 1];
  for (int i = 1; i <= n; ++i) {
    Expr x = state_var(0, i);
    if (!is_zero(sub(substitute(g.inverse[i - 1], fwd), x), cfg)) return false;
    if (!is_zero(sub(substitute(g.forward[i - 1], at_zero), x), cfg)) return false;
  }
  return true;
}

SuperpositionRule transform_rule(const FlowMap& g, const SuperpositionRule& r) {
  const int n = r.n;
  if (static_cast<int>(g.forward.size()) != n || static_cast<int>(g.inverse.size()) != n)
    throw InvalidArgument("flow map dimension does not match the rule");
  for (const auto& e : r.phi)
    for (const auto& s : free_symbols(e))
      if (s.is_time() || s.is_opaque())
        throw InvalidArgument("transform_rule needs a time-independent superposition function");
  auto copies = [&](int from) {
    Substitution s;
    for (int a = from; a <= r.m; ++a)
      for (int i = 1; i <= n; ++i) s[Symbol::state(a, i)] = move_copy(g.forward[i - 1], n, 0, a);
    return s;
  };
  Substitution push = copies(1), push_all = copies(0);
  SuperpositionRule out = r;
  out.name = r.name + " (transformed)";
  Substitution back;
  for (int i = 1; i <= n; ++i) back[Symbol::state(0, i)] = substitute(r.phi[i - 1], push);
  for (int i = 0; i < n; ++i) out.phi[i] = substitute(g.inverse[i], back);
  if (out.psi)
    for (auto& e : *out.psi) e = substitute(e, push_all);
  for (auto& c : out.validity) c.expr = substitute(c.expr, push);
  return out;
}

TDVectorField transform_member(const FlowMap& g, const TDVectorField& y) {
  const int n = y.n;
  if (static_cast<int>(g.inverse.size()) != n) throw InvalidArgument("flow map dimension mismatch");
  Substitution at;
  for (int i = 1; i <= n; ++i) at[Symbol::state(0, i)] = g.forward[i - 1];
  std::vector<Expr> out;
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> terms{differentiate(g.inverse[i], Symbol::time())};
    for (int j = 1; j <= n; ++j)
      terms.push_back(mul(differentiate(g.inverse[i], Symbol::state(0, j)), y[j - 1]));
    out.push_back(substitute(sum(terms), at));
  }
  return TDVectorField(std::move(out));
}

}  // namespace liefam
