#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dialect_audit {

enum class ErrorKind {
  decoding,
  format,
  mapping,
  label,
  alignment,
  validation,
  consistency,
  auth,
  gating,
  conflict,
  lease_expired,
  not_found,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the toolkit. The kind is what the CLI and
/// the HTTP layer use to pick an exit code or status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dialect_audit
