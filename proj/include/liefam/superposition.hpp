#pragma once

// Superposition rules x = Phi(t, x_1..x_m; k), their implicit form
// k = Psi(t, x_0..x_m), and symbolic / numeric verification.

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liefam/liealgebra.hpp"
#include "liefam/numint.hpp"

namespace liefam {

using State = std::vector<double>;

/// A validity predicate on the rule inputs was violated.
class RuleDomainError : public Error {
 public:
  RuleDomainError(const std::string& label, const std::string& detail)
      : Error("rule validity violated: " + label + " (" + detail + ")"), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

/// An invariant sits on the singular locus of the rule's constant map.
class SingularInvariantError : public RuleDomainError {
 public:
  using RuleDomainError::RuleDomainError;
};

class NewtonError : public Error {
 public:
  using Error::Error;
};

enum class ConstraintKind { NonNegative, Positive, NonZero, NonSingular };

struct ValidityConstraint {
  ConstraintKind kind = ConstraintKind::NonNegative;
  Expr expr;
  /// Threshold for NonZero / NonSingular: |expr| must exceed it.
  double eps = 0.0;
  std::string label;
};

/// A sign or branch choice that is constant along a solution.
struct DiscreteParam {
  std::string name;
  std::vector<double> values;
};

struct SuperpositionRule {
  std::string name;
  int n = 1;
  int m = 1;
  /// Names of the constants k (n of them), declared as params in phi.
  std::vector<std::string> constants;
  /// n expressions in t, copies 1..m, constants and discrete params.
  std::vector<Expr> phi;
  /// n expressions in t and copies 0..m.
  std::optional<std::vector<Expr>> psi;
  std::vector<ValidityConstraint> validity;
  std::vector<DiscreteParam> discrete;
};

/// Substitute opaque realizations throughout the rule.
SuperpositionRule bind_realizations(const SuperpositionRule& r, const Realizations& z);

/// Concrete choice of constants (and discrete branch values).
struct RuleConstants {
  std::vector<double> k;
  std::map<std::string, double> discrete;
};

/// Evaluates validity first, then Phi. Opaque symbols must already be bound.
State apply_rule(const SuperpositionRule& r, double t, const std::vector<State>& particulars,
                 const RuleConstants& c);

struct NewtonConfig {
  double tol = 1e-12;
  int max_iter = 50;
  std::vector<double> initial_guess;  // defaults to all ones
};

struct ConstantsResult {
  RuleConstants constants;
  bool used_psi = false;
  int iterations = 0;
  double residual = 0.0;
};

ConstantsResult compute_constants(const SuperpositionRule& r, double t,
                                  const std::vector<State>& particulars, const State& x0,
                                  const NewtonConfig& cfg = {});

struct Scenario {
  std::vector<State> particulars;  // m initial states
  State reference;                 // initial state of the solution to reproduce
  double t0 = 0.0;
  double t1 = 1.0;
  int grid = 101;
};

struct VerifyConfig {
  IntegratorConfig integrator;
  NewtonConfig newton;
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
};

struct VerificationReport {
  std::string rule;
  std::string member;
  Scenario scenario;
  double max_error = 0.0;
  bool pass = false;
  /// An integration or constant-recovery failure (as opposed to a mismatch).
  bool numerical_failure = false;
  std::vector<std::pair<double, std::string>> failures;
  std::optional<RuleConstants> constants;
};

/// Integrate m particulars and a reference solution of `member`, recover k at
/// t0, and compare Phi against the reference on the grid.
VerificationReport verify_rule(const SuperpositionRule& r, const TDVectorField& member,
                               const Realizations& z, const Scenario& s,
                               const VerifyConfig& cfg = {}, const std::string& member_name = "");

nlohmann::json to_json(const VerificationReport& rep);
nlohmann::json to_json(const Scenario& s);

struct FirstIntegralReport {
  double max_deviation = 0.0;
  std::vector<double> per_component;
  std::vector<double> initial_values;
};

/// max over the grid of |Psi(t) - Psi(t0)|, relative where |Psi(t0)| > 1.
/// trajectories[a] supplies copy a.
FirstIntegralReport check_first_integral(const std::vector<Expr>& psi, const Realizations& z,
                                         const std::vector<const Trajectory*>& trajectories,
                                         const std::vector<double>& grid);

struct AnnihilationReport {
  bool all_zero = true;
  /// (generator j, component i, verdict), 1-based.
  std::vector<std::tuple<int, int, bool>> checks;
};

AnnihilationReport annihilation_check(const std::vector<Expr>& psi, const GeneratorSet& g, int m,
                                      const EqualityConfig& cfg = {});

/// Generalized flow g_t on R^n, both directions over t and copy-0 state.
struct FlowMap {
  std::vector<Expr> forward;
  std::vector<Expr> inverse;
};

/// inverse(forward(x)) == x and forward at t = 0 is the identity.
bool validate(const FlowMap& g, const EqualityConfig& cfg = {});

/// Phibar(t, x_1..x_m, k) = g_t^{-1}(Phi(g_t(x_1), ..., g_t(x_m), k)) for a
/// time-independent Phi. Psi and validity predicates are transported too.
SuperpositionRule transform_rule(const FlowMap& g, const SuperpositionRule& r);

/// The system satisfied by y = g_t^{-1}(x) when x solves `y`.
TDVectorField transform_member(const FlowMap& g, const TDVectorField& y);

std::vector<double> uniform_grid(double t0, double t1, int points);

}  // namespace liefam
