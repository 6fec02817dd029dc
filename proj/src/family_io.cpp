#include "liefam/family_io.hpp"

#include <fstream>

namespace liefam {

using nlohmann::json;

namespace {

const char* kind_name(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::NonNegative: return "nonnegative";
    case ConstraintKind::Positive: return "positive";
    case ConstraintKind::NonZero: return "nonzero";
    case ConstraintKind::NonSingular: return "nonsingular";
  }
  return "nonnegative";
}

ConstraintKind kind_from(const std::string& s) {
  if (s == "nonnegative") return ConstraintKind::NonNegative;
  if (s == "positive") return ConstraintKind::Positive;
  if (s == "nonzero") return ConstraintKind::NonZero;
  if (s == "nonsingular") return ConstraintKind::NonSingular;
  throw InvalidArgument("unknown validity kind '" + s + "'");
}

template <class T>
T get(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("family field '") + key + "': " + e.what());
  }
}

std::vector<Expr> exprs(const json& j, const char* key, const ParseContext& ctx) {
  std::vector<Expr> out;
  for (const auto& s : get<std::vector<std::string>>(j, key, {})) out.push_back(parse(s, ctx));
  return out;
}

std::vector<std::string> strings(const std::vector<Expr>& es, const ParseContext& ctx) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(to_string(e, ctx));
  return out;
}

}  // namespace

FamilyDefinition load_family(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("family definition must be a JSON object");
  for (const char* key : {"name", "n", "generators"})
    if (!doc.contains(key)) throw InvalidArgument(std::string("family definition lacks '") + key + "'");

  FamilyDefinition fd;
  fd.name = get<std::string>(doc, "name", "");
  fd.description = get<std::string>(doc, "description", "");
  fd.n = get<int>(doc, "n", 1);
  fd.m = get<int>(doc, "m", 1);
  if (fd.n < 1 || fd.m < 0) throw InvalidArgument("family needs n >= 1 and m >= 0");
  fd.coord_names = get<std::vector<std::string>>(doc, "variables", {});
  if (!fd.coord_names.empty() && static_cast<int>(fd.coord_names.size()) != fd.n)
    throw InvalidArgument("'variables' must list n names");
  fd.parameters = get<std::vector<std::string>>(doc, "parameters", {});

  const json rule = doc.value("rule", json::object());
  fd.rule.name = get<std::string>(rule, "name", fd.name);
  fd.rule.n = fd.n;
  fd.rule.m = fd.m;
  fd.rule.constants = get<std::vector<std::string>>(rule, "constants", {});
  if (rule.contains("discrete")) {
    for (const auto& d : rule.at("discrete"))
      fd.rule.discrete.push_back({get<std::string>(d, "name", ""), get<std::vector<double>>(d, "values", {})});
  }

  ParseContext ctx = fd.context();
  if (doc.contains("parameters")) ctx.opaque = fd.parameters;

  auto field_list = [&](const char* key) {
    std::vector<TDVectorField> out;
    for (const auto& comps : get<std::vector<std::vector<std::string>>>(doc, key, {})) {
      if (static_cast<int>(comps.size()) != fd.n)
        throw InvalidArgument(std::string("every entry of '") + key + "' needs n components");
      ParseContext c0 = ctx;
      c0.m = 0;
      out.push_back(parse_field(comps, c0));
    }
    return out;
  };
  auto gens = field_list("generators");
  if (gens.empty()) throw InvalidArgument("'generators' is empty");
  fd.generators = GeneratorSet(gens);
  fd.search_members = doc.contains("search_members") ? field_list("search_members") : gens;

  if (doc.contains("member")) {
    auto comps = get<std::vector<std::string>>(doc, "member", {});
    if (static_cast<int>(comps.size()) != fd.n) throw InvalidArgument("'member' needs n components");
    ParseContext c0 = ctx;
    c0.m = 0;
    fd.member = parse_field(comps, c0);
  } else {
    fd.member = gens.front();
  }

  if (doc.contains("structure")) {
    StructureFunctions f(fd.generators.r());
    for (const auto& row : doc.at("structure")) {
      int j = get<int>(row, "j", 0), k = get<int>(row, "k", 0);
      auto vals = exprs(row, "f", ctx);
      if (j < 1 || k < 1 || j > f.r || k > f.r || static_cast<int>(vals.size()) != f.r)
        throw InvalidArgument("malformed structure row");
      for (int l = 1; l <= f.r; ++l) {
        f(j, k, l) = vals[static_cast<std::size_t>(l - 1)];
        f(k, j, l) = neg(vals[static_cast<std::size_t>(l - 1)]);
      }
    }
    fd.expected = f;
  }

  fd.first_integrals = exprs(doc, "first_integrals", ctx);
  fd.rule.phi = exprs(rule, "phi", ctx);
  if (rule.contains("psi")) fd.rule.psi = exprs(rule, "psi", ctx);
  if (rule.contains("validity")) {
    for (const auto& v : rule.at("validity")) {
      ValidityConstraint c;
      c.kind = kind_from(get<std::string>(v, "kind", "nonnegative"));
      c.expr = parse(get<std::string>(v, "expr", ""), ctx);
      c.eps = get<double>(v, "eps", 0.0);
      c.label = get<std::string>(v, "label", to_string(c.expr, ctx));
      fd.rule.validity.push_back(c);
    }
  }

  if (doc.contains("scenario")) {
    const json& s = doc.at("scenario");
    fd.scenario.particulars = get<std::vector<State>>(s, "particulars", {});
    fd.scenario.reference = get<State>(s, "reference", {});
    auto span = get<std::vector<double>>(s, "span", {0.0, 1.0});
    if (span.size() != 2) throw InvalidArgument("scenario span needs two entries");
    fd.scenario.t0 = span[0];
    fd.scenario.t1 = span[1];
    fd.scenario.grid = get<int>(s, "grid", 101);
  }
  if (doc.contains("realizations")) {
    std::vector<std::string> binds;
    for (const auto& [k, v] : get<std::map<std::string, std::string>>(doc, "realizations", {}))
      binds.push_back(k + "=" + v);
    fd.realizations = parse_realizations(binds);
  }
  return fd;
}

FamilyDefinition load_family_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open family file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("family file '" + path + "' is not valid JSON: " + e.what());
  }
  return load_family(doc);
}

json export_family(const FamilyDefinition& fd) {
  ParseContext ctx = fd.context();
  ParseContext c0 = ctx;
  c0.m = 0;
  json doc;
  doc["name"] = fd.name;
  if (!fd.description.empty()) doc["description"] = fd.description;
  doc["n"] = fd.n;
  doc["m"] = fd.m;
  doc["variables"] = ctx.effective_coord_names();
  doc["parameters"] = fd.parameters;
  doc["member"] = strings(fd.member.coeffs, c0);
  doc["generators"] = json::array();
  for (const auto& g : fd.generators.fields) doc["generators"].push_back(strings(g.coeffs, c0));
  doc["search_members"] = json::array();
  for (const auto& g : fd.search_members) doc["search_members"].push_back(strings(g.coeffs, c0));
  if (fd.expected) {
    doc["structure"] = json::array();
    const int r = fd.expected->r;
    for (int j = 1; j <= r; ++j)
      for (int k = j + 1; k <= r; ++k) {
        std::vector<std::string> f;
        for (int l = 1; l <= r; ++l) f.push_back(to_string((*fd.expected)(j, k, l), ctx));
        doc["structure"].push_back({{"j", j}, {"k", k}, {"f", f}});
      }
  }
  doc["first_integrals"] = strings(fd.first_integrals, ctx);

  json rule;
  rule["name"] = fd.rule.name;
  rule["constants"] = fd.rule.constants;
  rule["phi"] = strings(fd.rule.phi, ctx);
  if (fd.rule.psi) rule["psi"] = strings(*fd.rule.psi, ctx);
  rule["validity"] = json::array();
  for (const auto& v : fd.rule.validity)
    rule["validity"].push_back(
        {{"kind", kind_name(v.kind)}, {"expr", to_string(v.expr, ctx)}, {"eps", v.eps}, {"label", v.label}});
  rule["discrete"] = json::array();
  for (const auto& d : fd.rule.discrete) rule["discrete"].push_back({{"name", d.name}, {"values", d.values}});
  doc["rule"] = rule;

  doc["scenario"] = to_json(fd.scenario);
  json z = json::object();
  for (const auto& [k, v] : fd.realizations) z[k] = to_string(v);
  doc["realizations"] = z;
  return doc;
}

}  // namespace liefam
