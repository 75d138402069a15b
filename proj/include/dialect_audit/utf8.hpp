#pragma once

#include <string>
#include <string_view>

namespace dialect_audit::utf8 {

/// Strict decoder: rejects overlong forms, surrogates and code points past
/// U+10FFFF. Throws Error(decoding) with the byte offset of the first bad
/// sequence.
std::u32string decode(std::string_view bytes);

void append(std::string& out, char32_t cp);

std::string encode(std::u32string_view text);

bool is_valid(std::string_view bytes) noexcept;

}  // namespace dialect_audit::utf8
