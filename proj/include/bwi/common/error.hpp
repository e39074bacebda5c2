#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bwi {

// Validation errors map to CLI exit code 1, solver failures to 2.
enum class ErrorCategory { Validation, Solver };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// An error tagged with a module-specific kind enum.
template <class KindT>
class KindedError : public Error {
 public:
  using Kind = KindT;

  KindedError(Kind kind, const std::string& what,
              ErrorCategory category = ErrorCategory::Validation)
      : Error(category, what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace bwi
