#pragma once

// JSON family-definition files:
//   {name, n, m, variables, parameters, member, generators, first_integrals,
//    structure, rule: {constants, phi, psi, validity, discrete}, scenario,
//    realizations}
// Only name, n and generators are required.

#include <json.hpp>

#include <string>

#include "liefam/families.hpp"

namespace liefam {

/// Throws InvalidArgument on malformed documents and ParseError on bad
/// expressions.
FamilyDefinition load_family(const nlohmann::json& doc);
FamilyDefinition load_family_file(const std::string& path);

nlohmann::json export_family(const FamilyDefinition& fd);

}  // namespace liefam
