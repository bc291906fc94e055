#include "pgpp/error.hpp"

namespace pgpp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::topology_too_small: return "topology-too-small";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::out_of_region: return "out-of-region";
    case ErrorCode::unknown_tracking_area: return "unknown-tracking-area";
    case ErrorCode::inconsistent_ticks: return "inconsistent-ticks";
    case ErrorCode::domain: return "domain";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::crypto: return "crypto";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::protocol: return "protocol";
  }
  return "unknown";
}

}  // namespace pgpp
