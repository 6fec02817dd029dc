#pragma once

// Built-in Lie families: the Abel family with its cubic generators and the
// dissipative Milne-Pinney family written as a first-order system in (x, v).

#include <optional>
#include <string>
#include <vector>

#include "liefam/superposition.hpp"

namespace liefam {

struct FamilyDefinition {
  std::string name;
  std::string description;
  int n = 1;
  int m = 1;
  std::vector<std::string> coord_names;
  /// Opaque time functions the member depends on.
  std::vector<std::string> parameters;
  /// Member template; parameters stay opaque.
  TDVectorField member;
  GeneratorSet generators;
  /// Fields whose bracket closure yields the generators.
  std::vector<TDVectorField> search_members;
  std::optional<StructureFunctions> expected;
  /// Invariants over t and copies 0..m.
  std::vector<Expr> first_integrals;
  SuperpositionRule rule;
  Scenario scenario;
  Realizations realizations;

  /// Parse context covering copies 0..m, the parameters and the rule constants.
  ParseContext context() const;
};

FamilyDefinition abel_family();
FamilyDefinition milne_pinney_family();

std::vector<std::string> builtin_family_names();
/// Throws InvalidArgument for an unknown name.
FamilyDefinition builtin_family(const std::string& name);

/// Member with every declared parameter replaced by its realization. Throws
/// UnboundSymbolError naming the first missing binding.
TDVectorField instantiate(const FamilyDefinition& fd, const Realizations& z);

/// Realizations from "name=expr" strings; each expression may only use t.
Realizations parse_realizations(const std::vector<std::string>& bindings,
                                const std::vector<std::string>& allowed = {});

/// Residuals of the first-order system for (b2', b1', b0') obtained with
/// b2 = b3 = 0, b3' = 1, b1 = 1, b0 = t, evaluated on the cubic generator's
/// coefficients (1+t)^3 + t, 3(1+t)^2 + 1, 3(1+t).
std::vector<Expr> abel_generator_residuals();

}  // namespace liefam
