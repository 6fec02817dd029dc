#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liefam {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UndeclaredSymbolError : public ParseError {
 public:
  UndeclaredSymbolError(const std::string& name, std::size_t position)
      : ParseError("undeclared symbol '" + name + "'", position), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DerivativeOrderError : public Error {
 public:
  using Error::Error;
};

class UnboundSymbolError : public Error {
 public:
  using Error::Error;
};

/// Evaluation left the domain of an operation (division by zero, ln of a
/// non-positive value, ...). `subexpression()` names the offending node.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : Error(what + " in `" + subexpression + "`"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Every sample point of a probabilistic test hit a domain guard.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace liefam
