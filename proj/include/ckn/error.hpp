#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

/// Base class for every error raised by the library. The category maps
/// onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Category { config, solver, io };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Category::config, what) {}
};

/// Grid or array dimensions that violate an invariant.
class InvalidSizeError : public Error {
 public:
  explicit InvalidSizeError(const std::string& what) : Error(Category::config, what) {}
};

/// Numerical failure: non-convergence, broken invariant, degenerate field.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(Category::solver, what) {}
};

class ConvergenceError : public SolverError {
 public:
  explicit ConvergenceError(const std::string& what) : SolverError(what) {}
};

/// Descent from the perturbed soliton returned to the symmetric state.
class FellBackToSymmetricError : public SolverError {
 public:
  explicit FellBackToSymmetricError(const std::string& what) : SolverError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Category::io, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

}  // namespace ckn
