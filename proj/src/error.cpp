#include "gmq/error.hpp"

namespace gmq {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NonSymmetric: return "non_symmetric";
    case ErrorKind::IndefiniteBeyondTolerance: return "indefinite";
    case ErrorKind::InvalidWeights: return "invalid_weights";
    case ErrorKind::InvalidInterval: return "invalid_interval";
    case ErrorKind::BudgetTooSmall: return "budget_too_small";
    case ErrorKind::EmptyBudget: return "empty_budget";
    case ErrorKind::NonConvergence: return "non_convergence";
    case ErrorKind::CorruptTable: return "corrupt_table";
    case ErrorKind::InvalidThresholds: return "invalid_thresholds";
    case ErrorKind::IndexOutOfRange: return "index_out_of_range";
    case ErrorKind::NotAligned: return "not_aligned";
    case ErrorKind::OffSupport: return "off_support";
    case ErrorKind::SingularComponent: return "singular_component";
    case ErrorKind::EmptySchemeSet: return "empty_scheme_set";
    case ErrorKind::BudgetViolation: return "budget_violation";
    case ErrorKind::InvalidK: return "invalid_k";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::NonSymmetric:
    case ErrorKind::IndefiniteBeyondTolerance:
    case ErrorKind::InvalidWeights:
    case ErrorKind::CorruptTable:
      return true;
    default:
      return false;
  }
}

}  // namespace gmq
