#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shellcap {

enum class ErrorKind {
  InvalidArgument,
  NotSymmetric,
  NotPositiveDefinite,
  DimensionMismatch,
  Overflow,
  NetTooLarge,
  RegimeViolation,
  SearchBudgetExceeded,
  RankOutOfRange,
  NegativeCoefficient,
  SupportTooLarge,
  GridTooLarge,
  InvalidFamilies,
  RangeViolation,
  DegenerateInput,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// True for errors caused by exhausting a size or search budget rather than
/// by malformed input.
bool is_resource_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shellcap
