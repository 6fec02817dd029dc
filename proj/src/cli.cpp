#include "liefam/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "liefam/family_io.hpp"

namespace liefam {

using nlohmann::json;

namespace {

struct Options {
  std::string family;
  std::string family_file;
  std::vector<std::string> params;
  int m = -1;
  int n = 1;
  std::string vars;
  std::string span;
  int grid = 0;
  double rtol = 1e-9;
  double atol = 1e-12;
  double tol = -1.0;
  std::uint64_t seed = 0xC0FFEE;
  std::string out;
  std::vector<std::string> particulars;
  std::string reference;
  int depth = 3;
  std::vector<std::string> exprs;
  std::vector<std::string> fields;
};

/// A failed run whose report is still worth emitting.
struct Outcome {
  json report;
  int code = kExitPass;
  std::string summary;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("cannot read " + what + " from '" + s + "'");
  }
}

State parse_state(const std::string& s, int n) {
  State x;
  for (const auto& p : split(s, ',')) x.push_back(to_double(p, "state entry"));
  if (static_cast<int>(x.size()) != n)
    throw InvalidArgument("state '" + s + "' needs " + std::to_string(n) + " entries");
  return x;
}

std::pair<double, double> parse_span(const std::string& s) {
  auto parts = split(s, ':');
  if (parts.size() != 2) throw InvalidArgument("span must look like a:b, got '" + s + "'");
  return {to_double(parts[0], "span start"), to_double(parts[1], "span end")};
}

EqualityConfig equality(const Options& o) {
  EqualityConfig cfg;
  cfg.seed = o.seed;
  return cfg;
}

AlgebraConfig algebra(const Options& o) {
  AlgebraConfig cfg;
  cfg.eq = equality(o);
  return cfg;
}

FamilyDefinition resolve_family(const Options& o, const std::string& fallback) {
  if (!o.family.empty() && !o.family_file.empty())
    throw InvalidArgument("--family and --family-file are mutually exclusive");
  FamilyDefinition fd = !o.family_file.empty() ? load_family_file(o.family_file)
                        : builtin_family(o.family.empty() ? fallback : o.family);
  Realizations extra = parse_realizations(o.params, fd.parameters);
  for (auto& [k, v] : extra) fd.realizations[k] = v;
  return fd;
}

Scenario resolve_scenario(const Options& o, const FamilyDefinition& fd) {
  Scenario s = fd.scenario;
  if (!o.particulars.empty()) {
    s.particulars.clear();
    for (const auto& p : o.particulars) s.particulars.push_back(parse_state(p, fd.n));
  }
  if (!o.reference.empty()) s.reference = parse_state(o.reference, fd.n);
  if (!o.span.empty()) std::tie(s.t0, s.t1) = parse_span(o.span);
  if (o.grid > 0) s.grid = o.grid;
  if (static_cast<int>(s.particulars.size()) != fd.m)
    throw InvalidArgument("scenario needs " + std::to_string(fd.m) + " particular states");
  if (static_cast<int>(s.reference.size()) != fd.n)
    throw InvalidArgument("scenario needs a reference state");
  return s;
}

json realizations_json(const Realizations& z) {
  json j = json::object();
  for (const auto& [k, v] : z) j[k] = to_string(v);
  return j;
}

json header(const std::string& command, const Options& o, json config) {
  config["seed"] = o.seed;
  if (!o.family.empty()) config["family"] = o.family;
  if (!o.family_file.empty()) config["family_file"] = o.family_file;
  return {{"tool", "liefam"}, {"version", LIEFAM_VERSION}, {"command", command}, {"config", config}};
}

json structure_json(const StructureFunctions& f, const ParseContext& ctx) {
  json rows = json::array();
  for (int j = 1; j <= f.r; ++j)
    for (int k = j + 1; k <= f.r; ++k) {
      std::vector<std::string> row;
      for (int l = 1; l <= f.r; ++l) row.push_back(to_string(f(j, k, l), ctx));
      rows.push_back({{"j", j}, {"k", k}, {"f", row}});
    }
  return rows;
}

std::vector<std::string> field_strings(const ProlongedField& a, const ParseContext& ctx) {
  std::vector<std::string> out{to_string(a.dt, ctx)};
  for (const auto& block : a.coeffs)
    for (const auto& e : block) out.push_back(to_string(e, ctx));
  return out;
}

ParseContext field_context(const Options& o) {
  ParseContext ctx;
  ctx.n = o.n;
  ctx.m = std::max(o.m, 0);
  if (!o.vars.empty()) ctx.coord_names = split(o.vars, ',');
  if (!ctx.coord_names.empty() && static_cast<int>(ctx.coord_names.size()) != o.n)
    throw InvalidArgument("--vars must list n names");
  return ctx;
}

TDVectorField read_field(const std::string& text, const ParseContext& ctx) {
  auto comps = split(text, ';');
  if (static_cast<int>(comps.size()) != ctx.n)
    throw InvalidArgument("field '" + text + "' needs " + std::to_string(ctx.n) +
                          " ';'-separated components");
  ParseContext c0 = ctx;
  c0.m = 0;
  return parse_field(comps, c0);
}

Outcome cmd_bracket(const Options& o) {
  if (o.fields.size() != 2) throw InvalidArgument("bracket needs exactly two fields");
  ParseContext ctx = field_context(o);
  TDVectorField a = read_field(o.fields[0], ctx), b = read_field(o.fields[1], ctx);
  const int m = std::max(o.m, 0);
  AlgebraConfig cfg = algebra(o);
  ProlongedField pa = time_prolong(a, m), pb = time_prolong(b, m);
  ProlongedField c = lie_bracket(pa, pb, cfg.eq, cfg.diff);
  ctx.m = m;

  Outcome res;
  res.report = header("bracket", o, {{"n", o.n}, {"m", m}, {"fields", o.fields}});
  res.report["bracket"] = field_strings(c, ctx);
  res.report["zero"] = is_zero(c, cfg.eq);
  res.report["pure_prolongation"] = is_pure_prolongation(c, cfg.eq);
  SpanFit fit = express_in_span(c, {pa, pb}, cfg);
  if (fit.in_span) {
    std::vector<std::string> co;
    for (const auto& e : fit.coeffs) co.push_back(to_string(e, ctx));
    res.report["in_span_of_inputs"] = co;
  }
  res.summary = to_string(c, ctx) + "\n";
  if (fit.in_span)
    res.summary += "= (" + to_string(fit.coeffs[0], ctx) + ") A + (" + to_string(fit.coeffs[1], ctx) + ") B\n";
  return res;
}

Outcome cmd_check_family(const Options& o) {
  FamilyDefinition fd = resolve_family(o, "abel");
  ParseContext ctx = fd.context();
  AlgebraConfig cfg = algebra(o);
  ClosureReport rep = check_closure(fd.generators, cfg);

  Outcome res;
  res.report = header("check-family", o, {{"name", fd.name}});
  json& r = res.report;
  r["family"] = fd.name;
  r["r"] = fd.generators.r();
  r["lie_family"] = rep.lie_family;
  r["antisymmetric"] = rep.antisymmetric;
  r["row_sums_zero"] = rep.row_sums_zero;
  r["underdetermined"] = rep.structure.underdetermined;
  bool ok = rep.lie_family;
  if (rep.structure.closed) {
    r["structure"] = structure_json(rep.structure.f, ctx);
    if (fd.expected) {
      bool match = true;
      const int n = fd.generators.r();
      for (int j = 1; j <= n && match; ++j)
        for (int k = 1; k <= n && match; ++k)
          for (int l = 1; l <= n && match; ++l)
            match = equivalent(rep.structure.f(j, k, l), (*fd.expected)(j, k, l), cfg.eq);
      r["matches_expected"] = match;
      ok = ok && match;
    }
    Decomposition d = decompose_member(fd.member, fd.generators, cfg);
    if (d.in_span) {
      std::vector<std::string> b;
      for (const auto& e : d.b) b.push_back(to_string(e, ctx));
      r["member_decomposition"] = b;
    } else {
      r["member_decomposition"] = nullptr;
      ok = false;
    }
    if (auto mm = minimal_m(fd.generators, cfg)) r["minimal_m"] = *mm;
  }
  if (rep.structure.failed_pair) {
    r["failed_pair"] = {rep.structure.failed_pair->first, rep.structure.failed_pair->second};
    ParseContext wide = ctx;
    wide.m = 0;
    if (rep.structure.residual) r["residual"] = field_strings(*rep.structure.residual, wide);
  }
  res.code = ok ? kExitPass : kExitVerdictFalse;
  res.summary = fd.name + ": " + (ok ? "Lie family" : "not verified as a Lie family") + " (r = " +
                std::to_string(fd.generators.r()) + ")\n";
  return res;
}

VerifyConfig verify_config(const Options& o) {
  VerifyConfig cfg;
  cfg.integrator.rtol = o.rtol;
  cfg.integrator.atol = o.atol;
  if (o.tol > 0) cfg.abs_tol = cfg.rel_tol = o.tol;
  return cfg;
}

json run_config(const Options& o, const FamilyDefinition& fd, const Scenario& s,
                const VerifyConfig& cfg) {
  return {{"name", fd.name},
          {"realizations", realizations_json(fd.realizations)},
          {"scenario", to_json(s)},
          {"rtol", cfg.integrator.rtol},
          {"atol", cfg.integrator.atol},
          {"tol", cfg.abs_tol},
          {"seed", o.seed}};
}

Outcome cmd_verify_rule(const Options& o) {
  FamilyDefinition fd = resolve_family(o, "abel");
  if (fd.rule.phi.empty()) throw InvalidArgument("family '" + fd.name + "' has no superposition rule");
  Scenario s = resolve_scenario(o, fd);
  VerifyConfig cfg = verify_config(o);
  TDVectorField member = instantiate(fd, fd.realizations);
  VerificationReport rep = verify_rule(fd.rule, fd.member, fd.realizations, s, cfg, to_string(member, fd.context()));

  Outcome res;
  res.report = header("verify-rule", o, run_config(o, fd, s, cfg));
  res.report.update(to_json(rep));
  res.code = rep.numerical_failure ? kExitNumerical : rep.pass ? kExitPass : kExitVerdictFalse;
  std::ostringstream ss;
  ss << fd.name << ": " << (rep.numerical_failure ? "NUMERICAL FAILURE" : rep.pass ? "PASS" : "FAIL")
     << " max_error = " << rep.max_error << "\n";
  for (const auto& [t, why] : rep.failures) ss << "  t = " << t << ": " << why << "\n";
  res.summary = ss.str();
  return res;
}

Outcome cmd_first_integral(const Options& o) {
  FamilyDefinition fd = resolve_family(o, "abel");
  if (o.m >= 0 && o.m != fd.m) throw InvalidArgument("--m must match the family's m");
  Scenario s = resolve_scenario(o, fd);
  VerifyConfig cfg = verify_config(o);
  ParseContext ctx = fd.context();
  std::vector<Expr> psi;
  for (const auto& e : o.exprs) psi.push_back(parse(e, ctx));
  if (psi.empty()) psi = fd.first_integrals;
  if (psi.empty()) throw InvalidArgument("no first integral given (use --expr)");
  const double tol = o.tol > 0 ? o.tol : 1e-6;

  Outcome res;
  json config = run_config(o, fd, s, cfg);
  config["tol"] = tol;
  std::vector<std::string> texts;
  for (const auto& e : psi) texts.push_back(to_string(e, ctx));
  config["expressions"] = texts;
  res.report = header("first-integral", o, config);

  std::vector<Trajectory> trajs;
  try {
    trajs.push_back(integrate(make_problem(fd.member, fd.realizations, s.reference, s.t0, s.t1), cfg.integrator));
    for (const auto& x0 : s.particulars)
      trajs.push_back(integrate(make_problem(fd.member, fd.realizations, x0, s.t0, s.t1), cfg.integrator));
  } catch (const StepSizeUnderflow& e) {
    res.report["numerical_failure"] = true;
    res.report["failures"] = {{{"t", e.last_reliable_time()}, {"reason", e.what()}}};
    res.code = kExitNumerical;
    res.summary = std::string("integration failed: ") + e.what() + "\n";
    return res;
  } catch (const IntegrationDomainError& e) {
    res.report["numerical_failure"] = true;
    res.report["failures"] = {{{"t", e.time()}, {"reason", e.what()}}};
    res.code = kExitNumerical;
    res.summary = std::string("integration failed: ") + e.what() + "\n";
    return res;
  }
  std::vector<const Trajectory*> ptrs;
  for (const auto& t : trajs) ptrs.push_back(&t);
  FirstIntegralReport fr;
  try {
    fr = check_first_integral(psi, fd.realizations, ptrs, uniform_grid(s.t0, s.t1, s.grid));
  } catch (const DomainError& e) {
    res.report["numerical_failure"] = true;
    res.report["failures"] = {{{"reason", e.what()}}};
    res.code = kExitNumerical;
    res.summary = std::string("evaluation failed: ") + e.what() + "\n";
    return res;
  }
  res.report["max_deviation"] = fr.max_deviation;
  res.report["per_component"] = fr.per_component;
  res.report["initial_values"] = fr.initial_values;
  res.report["numerical_failure"] = false;
  const bool pass = fr.max_deviation <= tol;
  res.report["pass"] = pass;
  res.code = pass ? kExitPass : kExitVerdictFalse;
  std::ostringstream ss;
  ss << fd.name << ": max deviation " << fr.max_deviation << (pass ? " (constant)" : " (not constant)") << "\n";
  res.summary = ss.str();
  return res;
}

Outcome cmd_closure_search(const Options& o) {
  std::vector<TDVectorField> members;
  ParseContext ctx;
  int m = o.m;
  std::string name;
  if (!o.fields.empty()) {
    ctx = field_context(o);
    for (const auto& f : o.fields) members.push_back(read_field(f, ctx));
    if (m < 0) m = 1;
  } else {
    FamilyDefinition fd = resolve_family(o, "abel");
    ctx = fd.context();
    members = fd.search_members;
    name = fd.name;
    if (m < 0) m = fd.m;
  }
  AlgebraConfig cfg = algebra(o);
  ClosureSearchResult cs = bracket_closure_search(members, m, o.depth, cfg);

  Outcome res;
  json config = {{"m", m}, {"max_depth", o.depth}};
  if (!name.empty()) config["name"] = name;
  res.report = header("closure-search", o, config);
  json& r = res.report;
  const char* verdict = cs.verdict == ClosureSearchResult::Verdict::Closed ? "closed"
                        : cs.verdict == ClosureSearchResult::Verdict::RankCapExceeded
                            ? "rank-cap-exceeded"
                            : "depth-exhausted";
  r["verdict"] = verdict;
  r["r"] = cs.generators.r();
  r["depth"] = cs.depth;
  r["rank_cap"] = cs.rank_cap;
  r["depth_found"] = cs.depth_found;
  ParseContext c0 = ctx;
  c0.m = 0;
  json gens = json::array();
  for (const auto& g : cs.generators.fields) {
    std::vector<std::string> comps;
    for (const auto& e : g.coeffs) comps.push_back(to_string(e, c0));
    gens.push_back(comps);
  }
  r["generators"] = gens;
  if (cs.structure && cs.structure->closed) r["structure"] = structure_json(cs.structure->f, ctx);
  if (!cs.message.empty()) r["message"] = cs.message;
  res.code = cs.verdict == ClosureSearchResult::Verdict::Closed ? kExitPass : kExitVerdictFalse;
  res.summary = std::string(verdict) + ": r = " + std::to_string(cs.generators.r()) + " at depth " +
                std::to_string(cs.depth) + "\n";
  for (const auto& g : cs.generators.fields) res.summary += "  " + to_string(g, c0) + "\n";
  return res;
}

Outcome cmd_export(const Options& o) {
  FamilyDefinition fd = resolve_family(o, "abel");
  Outcome res;
  res.report = export_family(fd);
  res.summary = "exported family '" + fd.name + "'\n";
  return res;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lie families, time-dependent superposition rules and their verification", "liefam"};
  app.set_version_flag("--version", LIEFAM_VERSION);
  app.require_subcommand(1);
  Options o;

  auto family_opts = [&](CLI::App* c) {
    c->add_option("--family", o.family, "Built-in family: abel, milne-pinney");
    c->add_option("--family-file", o.family_file, "JSON family definition")->check(CLI::ExistingFile);
    c->add_option("--param", o.params, "Parameter realization name=expr(t), repeatable");
  };
  auto scenario_opts = [&](CLI::App* c) {
    c->add_option("--span", o.span, "Time span a:b");
    c->add_option("--grid", o.grid, "Number of grid points")->check(CLI::PositiveNumber);
    c->add_option("--particular", o.particulars, "Particular initial state, comma separated, repeatable");
    c->add_option("--reference", o.reference, "Initial state of the reproduced solution");
    c->add_option("--rtol", o.rtol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
    c->add_option("--atol", o.atol, "Integrator absolute tolerance")->check(CLI::PositiveNumber);
    c->add_option("--tol", o.tol, "Acceptance tolerance")->check(CLI::PositiveNumber);
  };
  auto common = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Seed for sampled equality tests");
    c->add_option("--out", o.out, "Write the JSON report to this file");
  };

  auto* bracket = app.add_subcommand("bracket", "Bracket of two time-prolonged fields");
  bracket->add_option("fields", o.fields, "Two fields, components separated by ';'")->required()->expected(2);
  bracket->add_option("--n", o.n, "Dimension")->check(CLI::PositiveNumber);
  bracket->add_option("--m", o.m, "Number of extra copies (0: autonomizations)")->check(CLI::NonNegativeNumber);
  bracket->add_option("--vars", o.vars, "Coordinate names, comma separated");
  common(bracket);

  auto* check = app.add_subcommand("check-family", "Closure report for a family's generators");
  family_opts(check);
  common(check);

  auto* verify = app.add_subcommand("verify-rule", "Check a superposition rule against integration");
  family_opts(verify);
  scenario_opts(verify);
  common(verify);

  auto* fi = app.add_subcommand("first-integral", "Constancy of invariants along solutions");
  family_opts(fi);
  scenario_opts(fi);
  fi->add_option("--expr", o.exprs, "Invariant over t and copies 0..m, repeatable");
  fi->add_option("--m", o.m, "Number of particular solutions")->check(CLI::NonNegativeNumber);
  common(fi);

  auto* search = app.add_subcommand("closure-search", "Bracket closure of time-prolonged members");
  family_opts(search);
  search->add_option("--field", o.fields, "Member field, components separated by ';', repeatable");
  search->add_option("--n", o.n, "Dimension for --field")->check(CLI::PositiveNumber);
  search->add_option("--vars", o.vars, "Coordinate names for --field");
  search->add_option("--m", o.m, "Number of extra copies")->check(CLI::NonNegativeNumber);
  search->add_option("--depth", o.depth, "Maximum bracket depth")->check(CLI::NonNegativeNumber);
  common(search);

  auto* exporter = app.add_subcommand("export", "Write a family definition as JSON");
  family_opts(exporter);
  common(exporter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }

  Outcome res;
  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "bracket") res = cmd_bracket(o);
    else if (name == "check-family") res = cmd_check_family(o);
    else if (name == "verify-rule") res = cmd_verify_rule(o);
    else if (name == "first-integral") res = cmd_first_integral(o);
    else if (name == "closure-search") res = cmd_closure_search(o);
    else res = cmd_export(o);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InvalidArgument& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const UnboundSymbolError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InconclusiveError& e) {
    err << "inconclusive: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  const std::string text = res.report.dump(2);
  if (o.out.empty()) {
    out << text << "\n";
  } else {
    std::ofstream f(o.out);
    if (!f) {
      err << "input error: cannot write '" << o.out << "'\n";
      return kExitInputError;
    }
    f << text << "\n";
    out << res.summary;
  }
  return res.code;
}

}  // namespace liefam
