#include "shellcap/error.hpp"

namespace shellcap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NetTooLarge: return "NetTooLarge";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorKind::RankOutOfRange: return "RankOutOfRange";
    case ErrorKind::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorKind::SupportTooLarge: return "SupportTooLarge";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::InvalidFamilies: return "InvalidFamilies";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_resource_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Overflow:
    case ErrorKind::NetTooLarge:
    case ErrorKind::SearchBudgetExceeded:
    case ErrorKind::SupportTooLarge:
    case ErrorKind::GridTooLarge:
      return true;
    default:
      return false;
  }
}

}  // namespace shellcap
