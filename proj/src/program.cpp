#include "liefam/program.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace liefam {

Program::Program(const Expr& output) : Program(std::vector<Expr>{output}) {}

Program::Program(const std::vector<Expr>& outputs) {
  for (const auto& e : outputs)
    for (const auto& s : free_symbols(e)) symbols_.push_back(s);
  std::sort(symbols_.begin(), symbols_.end());
  symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
  compile(outputs);
}

Program::Program(const std::vector<Expr>& outputs, std::vector<Symbol> inputs)
    : symbols_(std::move(inputs)) {
  compile(outputs);
}

int Program::symbol_index(const Symbol& s) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i)
    if (symbols_[i] == s) return static_cast<int>(i);
  return -1;
}

void Program::compile(const std::vector<Expr>& outputs) {
  std::unordered_map<const void*, int> slot;
  std::map<Symbol, int> sym_index;
  for (std::size_t i = 0; i < symbols_.size(); ++i) sym_index[symbols_[i]] = static_cast<int>(i);

  // Iterative post-order so deep left-nested sums do not exhaust the stack.
  for (const auto& root : outputs) {
    std::vector<std::pair<Expr, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (slot.count(e.id())) continue;
      if (!expanded && e.arity() > 0) {
        stack.push_back({e, true});
        for (int i = e.arity() - 1; i >= 0; --i) stack.push_back({e.arg(i), false});
        continue;
      }
      Instr in{e.op()};
      switch (e.op()) {
        case Op::Rational:
          in.c = e.rational().get_d();
          break;
        case Op::Float:
          in.c = e.float_value();
          break;
        case Op::Symbol: {
          auto it = sym_index.find(e.symbol());
          if (it == sym_index.end())
            throw UnboundSymbolError("symbol '" + to_string(e.symbol()) +
                                     "' is not an input of the program");
          in.a = it->second;
          break;
        }
        default:
          in.a = slot.at(e.arg(0).id());
          if (e.arity() == 2) in.b = slot.at(e.arg(1).id());
          in.n = e.exponent();
          break;
      }
      slot[e.id()] = static_cast<int>(code_.size());
      code_.push_back(in);
      source_.push_back(e);
    }
    outputs_.push_back(slot.at(root.id()));
  }
}

namespace {

// Returns an error message or nullptr.
template <bool Scaled>
const char* step(Op op, double a, double b, long n, double sa, double sb, double& v,
                 double& s) {
  switch (op) {
    case Op::Neg:
      v = -a;
      if constexpr (Scaled) s = sa;
      return nullptr;
    case Op::Add:
      v = a + b;
      if constexpr (Scaled) s = sa + sb;
      return nullptr;
    case Op::Sub:
      v = a - b;
      if constexpr (Scaled) s = sa + sb;
      return nullptr;
    case Op::Mul:
      v = a * b;
      if constexpr (Scaled) s = sa * sb;
      return nullptr;
    case Op::Div:
      if (b == 0.0) return "division by zero";
      v = a / b;
      if constexpr (Scaled) s = sa / std::abs(b) + std::abs(v) * sb / std::abs(b);
      return nullptr;
    case Op::IntPow:
      if (n < 0 && a == 0.0) return "zero raised to a negative power";
      v = std::pow(a, static_cast<double>(n));
      if constexpr (Scaled) {
        s = n >= 0 ? std::pow(sa, static_cast<double>(n))
                   : std::abs(v) * (1.0 + static_cast<double>(-n) * sa / std::abs(a));
      }
      return nullptr;
    case Op::RealPow:
      if (a < 0.0 && b != std::round(b)) return "negative base raised to a non-integer power";
      if (a == 0.0 && b < 0.0) return "zero raised to a negative power";
      v = std::pow(a, b);
      if constexpr (Scaled) {
        double la = a > 0.0 ? std::abs(std::log(a)) : 0.0;
        double rel = a != 0.0 ? std::abs(b) * sa / std::abs(a) : 0.0;
        s = std::abs(v) * (1.0 + rel + sb * la);
      }
      return nullptr;
    case Op::Exp:
      v = std::exp(a);
      if constexpr (Scaled) s = std::abs(v) * (1.0 + sa);
      return nullptr;
    case Op::Ln:
      if (a <= 0.0) return "logarithm of a non-positive value";
      v = std::log(a);
      if constexpr (Scaled) s = std::abs(v) + sa / a;
      return nullptr;
    case Op::Sin:
      v = std::sin(a);
      if constexpr (Scaled) s = std::abs(v) + sa;
      return nullptr;
    case Op::Cos:
      v = std::cos(a);
      if constexpr (Scaled) s = std::abs(v) + sa;
      return nullptr;
    case Op::Sqrt:
      if (a < 0.0) return "square root of a negative value";
      v = std::sqrt(a);
      if constexpr (Scaled) s = std::sqrt(sa);
      return nullptr;
    default:
      return "unsupported operation";
  }
}

}  // namespace

void Program::run(std::span<const double> inputs, std::span<double> outputs) const {
  if (inputs.size() < symbols_.size()) throw InvalidArgument("program input vector is too short");
  if (outputs.size() < outputs_.size()) throw InvalidArgument("program output vector is too short");
  thread_local std::vector<double> reg;
  reg.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    if (in.op == Op::Rational || in.op == Op::Float) {
      reg[i] = in.c;
    } else if (in.op == Op::Symbol) {
      reg[i] = inputs[in.a];
    } else {
      double unused = 0.0;
      double b = in.b >= 0 ? reg[in.b] : 0.0;
      if (const char* err = step<false>(in.op, reg[in.a], b, in.n, 0, 0, reg[i], unused))
        throw DomainError(err, to_string(source_[i]));
    }
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) outputs[k] = reg[outputs_[k]];
}

double Program::run1(std::span<const double> inputs) const {
  double out[1];
  if (outputs_.size() != 1) throw InvalidArgument("run1 needs a single-output program");
  run(inputs, out);
  return out[0];
}

bool Program::run_scaled(std::span<const double> inputs, std::span<double> values,
                         std::span<double> scales) const noexcept {
  if (inputs.size() < symbols_.size() || values.size() < outputs_.size() ||
      scales.size() < outputs_.size())
    return false;
  thread_local std::vector<double> reg, sc;
  try {
    reg.resize(code_.size());
    sc.resize(code_.size());
  } catch (...) {
    return false;
  }
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    if (in.op == Op::Rational || in.op == Op::Float) {
      reg[i] = in.c;
      sc[i] = std::abs(in.c);
    } else if (in.op == Op::Symbol) {
      reg[i] = inputs[in.a];
      sc[i] = std::abs(reg[i]);
    } else {
      double b = in.b >= 0 ? reg[in.b] : 0.0;
      double sb = in.b >= 0 ? sc[in.b] : 0.0;
      if (step<true>(in.op, reg[in.a], b, in.n, sc[in.a], sb, reg[i], sc[i])) return false;
      if (!std::isfinite(reg[i])) return false;
    }
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) {
    values[k] = reg[outputs_[k]];
    scales[k] = sc[outputs_[k]];
  }
  return true;
}

std::vector<double> Program::bind(const Assignment& a) const {
  std::vector<double> in(symbols_.size());
  for (std::size_t i = 0; i < symbols_.size(); ++i) in[i] = a.value_of(symbols_[i]);
  return in;
}

}  // namespace liefam
