#pragma once

// Flattened multi-output evaluator. Shared subexpressions are evaluated once.

#include <span>
#include <vector>

#include "liefam/expr.hpp"

namespace liefam {

class Program {
 public:
  explicit Program(const Expr& output);
  explicit Program(const std::vector<Expr>& outputs);
  /// Compile with a fixed input layout; `inputs` must cover every free symbol.
  Program(const std::vector<Expr>& outputs, std::vector<Symbol> inputs);

  /// Input layout: run() reads inputs[i] as the value of symbols()[i].
  const std::vector<Symbol>& symbols() const { return symbols_; }
  std::size_t num_outputs() const { return outputs_.size(); }
  std::size_t size() const { return code_.size(); }
  /// -1 when `s` is not an input.
  int symbol_index(const Symbol& s) const;

  /// Throws DomainError naming the offending subexpression.
  void run(std::span<const double> inputs, std::span<double> outputs) const;
  double run1(std::span<const double> inputs) const;

  /// Non-throwing evaluation that also propagates a magnitude scale (sum of
  /// absolute contributions at additive nodes) used by relative zero tests.
  /// Returns false on a domain violation or a non-finite value.
  bool run_scaled(std::span<const double> inputs, std::span<double> values,
                  std::span<double> scales) const noexcept;

  /// Input vector in symbols() order; throws UnboundSymbolError.
  std::vector<double> bind(const Assignment& a) const;

 private:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    long n = 0;
    double c = 0.0;
  };

  std::vector<Instr> code_;
  std::vector<Expr> source_;
  std::vector<int> outputs_;
  std::vector<Symbol> symbols_;

  void compile(const std::vector<Expr>& outputs);
};

}  // namespace liefam
