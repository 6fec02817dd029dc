#pragma once

// Dormand-Prince 5(4) with PI step control and continuous output.

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "liefam/vectorfield.hpp"

namespace liefam {

/// Raised when the step size collapses, typically near a finite-time blow-up.
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(double t_last, double h)
      : Error("step size underflow (h = " + std::to_string(h) + ") after t = " +
              std::to_string(t_last)),
        t_last_(t_last) {}
  /// Last time reached by an accepted step.
  double last_reliable_time() const { return t_last_; }

 private:
  double t_last_;
};

/// The right-hand side left its domain at time t.
class IntegrationDomainError : public DomainError {
 public:
  IntegrationDomainError(const DomainError& e, double t)
      : DomainError("at t = " + std::to_string(t) + ": " + e.what(), e.subexpression()), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// Opaque function name -> realization as an expression in t.
using Realizations = std::map<std::string, Expr>;

/// Substitute every opaque symbol (and its derivatives) by the realization
/// (and its t-derivatives). Throws UnboundSymbolError on a missing binding.
Expr bind_realizations(const Expr& e, const Realizations& r);
TDVectorField bind_realizations(const TDVectorField& y, const Realizations& r);

struct ODEProblem {
  TDVectorField field;  // only t and copy-0 state symbols
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 1.0;
};

/// Bind realizations and validate that nothing but t and the state remains.
ODEProblem make_problem(const TDVectorField& field, const Realizations& r, std::vector<double> x0,
                        double t0, double t1);

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  /// 0 selects the initial step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 1000000;
};

class Trajectory {
 public:
  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
  };

  int dimension() const { return n_; }
  double t_begin() const { return ts_.front(); }
  double t_end() const { return ts_.back(); }
  const std::vector<double>& mesh() const { return ts_; }
  const std::vector<std::vector<double>>& states() const { return xs_; }
  const Stats& stats() const { return stats_; }

  /// Dense output; throws InvalidArgument outside the span.
  std::vector<double> sample(double t) const;

 private:
  friend class Dopri5;
  int n_ = 0;
  std::vector<double> ts_;
  std::vector<std::vector<double>> xs_;
  std::vector<std::vector<double>> dense_;  // 5n coefficients per step
  Stats stats_;
};

using RHS = std::function<void(double t, const double* x, double* dx)>;

Trajectory integrate(const RHS& f, int n, std::vector<double> x0, double t0, double t1,
                     const IntegratorConfig& cfg = {});
Trajectory integrate(const ODEProblem& p, const IntegratorConfig& cfg = {});

}  // namespace liefam
