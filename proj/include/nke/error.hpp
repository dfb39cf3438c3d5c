#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace nke {

enum class ErrorCode {
  InvalidArgument,
  UnknownActivation,
  BadParams,
  DegreeTooLarge,
  DegreeOverflow,
  DomainError,
  ZeroNormInput,
  NonFiniteActivation,
  NonFiniteKernel,
  ShapeMismatch,
  DimensionMismatch,
  EigenFailure,
  SingularSystem,
  NotHomogeneous,
  NotSymmetric,
  ZeroDenominator,
  NoScalarForm,
  BudgetExceeded,
  Io,
  Parse,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  // Row / image index the failure refers to, when there is one.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace nke
