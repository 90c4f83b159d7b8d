#include "rydpol/error.hpp"

namespace rydpol {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::invalid_argument:
    return "InvalidArgument";
  case ErrorCode::out_of_range:
    return "OutOfRange";
  case ErrorCode::fewer_than_four_peaks:
    return "FewerThanFourPeaks";
  case ErrorCode::non_straddling:
    return "NonStraddling";
  case ErrorCode::degenerate_outer:
    return "DegenerateOuter";
  case ErrorCode::degenerate_inner:
    return "DegenerateInner";
  case ErrorCode::not_invertible:
    return "NotInvertible";
  case ErrorCode::non_unique_steady_state:
    return "NonUniqueSteadyState";
  case ErrorCode::eigensolver_failure:
    return "EigensolverFailure";
  case ErrorCode::dimension_mismatch:
    return "DimensionMismatch";
  case ErrorCode::io_failure:
    return "IoFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
  case ErrorCode::fewer_than_four_peaks:
  case ErrorCode::non_straddling:
  case ErrorCode::degenerate_outer:
  case ErrorCode::degenerate_inner:
  case ErrorCode::non_unique_steady_state:
  case ErrorCode::eigensolver_failure:
    return true;
  default:
    return false;
  }
}

} // namespace rydpol
