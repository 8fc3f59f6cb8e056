#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plrsq {

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  validation,  // input violates a type invariant (symmetry, dims, labels)
  numerical,   // an iterative routine failed or a value overflowed
  domain,      // input outside the domain of a matrix function
  config,      // inconsistent hyperparameters or options
  parse,       // malformed file contents
  io,          // filesystem failure
};

const char* to_string(ErrorCategory category) noexcept;

/// Exit code used by the command-line tool for each category.
int exit_code(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::validation, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCategory::numerical, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::domain, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::config, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(ErrorCategory::parse,
              what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace plrsq
