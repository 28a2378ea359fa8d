#pragma once

#include <stdexcept>
#include <string>

namespace fsorelay {

enum class ErrorCode {
  grid_too_coarse,
  window_too_small,
  invalid_argument,
  invalid_distance,
  grid_mismatch,
  scale_mismatch,
  unsupported_count,
  r0_out_of_range,
  no_interior_maximum,
  insufficient_realizations,
  config_invalid,
  io_failure,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::grid_too_coarse: return "grid-too-coarse";
    case ErrorCode::window_too_small: return "window-too-small";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_distance: return "invalid-distance";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::scale_mismatch: return "scale-mismatch";
    case ErrorCode::unsupported_count: return "unsupported-count";
    case ErrorCode::r0_out_of_range: return "r0-out-of-range";
    case ErrorCode::no_interior_maximum: return "no-interior-maximum";
    case ErrorCode::insufficient_realizations: return "insufficient-realizations";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::io_failure: return "io-failure";
  }
  return "unknown";
}

/// Exception carrying a machine-readable code; what() is "<code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& detail) {
  if (!condition) throw Error(code, detail);
}

}  // namespace fsorelay
