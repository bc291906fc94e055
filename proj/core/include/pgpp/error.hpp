#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgpp {

enum class ErrorCode {
  parse,
  topology_too_small,
  degenerate_geometry,
  invalid_argument,
  out_of_region,
  unknown_tracking_area,
  inconsistent_ticks,
  domain,
  empty_input,
  crypto,
  io,
  config,
  protocol,
};

std::string_view to_string(ErrorCode code);

// Base exception for all library failures; the code lets callers branch
// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pgpp
