#include "dialect_audit/error.hpp"

namespace dialect_audit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::decoding: return "decoding_error";
    case ErrorKind::format: return "format_error";
    case ErrorKind::mapping: return "mapping_error";
    case ErrorKind::label: return "label_error";
    case ErrorKind::alignment: return "alignment_error";
    case ErrorKind::validation: return "validation_error";
    case ErrorKind::consistency: return "consistency_error";
    case ErrorKind::auth: return "auth_error";
    case ErrorKind::gating: return "instructions_required";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::lease_expired: return "lease_expired";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::io: return "io_error";
  }
  return "error";
}

}  // namespace dialect_audit
