#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace retrovert {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnstableMatrix : public Error {
 public:
  using Error::Error;
};

// P failed the positive-definiteness check; in practice an unreachable pair.
class SingularGramian : public Error {
 public:
  using Error::Error;
};

class NotCoisometric : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class SingularResolvent : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Missing, unexpected, or ill-typed key in a model document. key() names it.
class SchemaError : public Error {
 public:
  SchemaError(std::string key, const std::string& detail)
      : Error("schema error (" + key + "): " + detail), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace retrovert
