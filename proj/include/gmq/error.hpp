#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmq {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonSymmetric,
  IndefiniteBeyondTolerance,
  InvalidWeights,
  InvalidInterval,
  BudgetTooSmall,
  EmptyBudget,
  NonConvergence,
  CorruptTable,
  InvalidThresholds,
  IndexOutOfRange,
  NotAligned,
  OffSupport,
  SingularComponent,
  EmptySchemeSet,
  BudgetViolation,
  InvalidK,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for failures caused by unreadable or malformed input (CLI exit code 2);
/// everything else is a math error (exit code 3).
bool is_input_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gmq
