#include "anchorweave/error.hpp"

namespace anchorweave {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_pose: return "invalid_pose";
    case ErrorCode::domain: return "domain";
    case ErrorCode::format: return "format";
    case ErrorCode::ordering: return "ordering";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::shape: return "shape";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace anchorweave
