#pragma once

#include <ostream>
#include <span>
#include <string>

namespace dialect_audit::cli {

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 when the inputs are rejected (a JSON error object is written
/// to `err`), 2 for usage errors.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dialect_audit::cli
