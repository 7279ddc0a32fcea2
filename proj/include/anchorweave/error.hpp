#pragma once

#include <stdexcept>
#include <string>

namespace anchorweave {

enum class ErrorCode {
  invalid_pose,
  domain,
  format,
  ordering,
  integrity,
  shape,
  protocol,
  parse,
  validation,
  not_found,
  conflict,
  capacity,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace anchorweave
