#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rydpol {

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  fewer_than_four_peaks,
  non_straddling,
  degenerate_outer,
  degenerate_inner,
  not_invertible,
  non_unique_steady_state,
  eigensolver_failure,
  dimension_mismatch,
  io_failure,
};

std::string_view to_string(ErrorCode code);

// Numerical failures map to CLI exit code 4, everything else to 3.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace rydpol
