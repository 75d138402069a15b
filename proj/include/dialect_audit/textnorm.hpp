#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialect_audit::textnorm {

struct NormalizeOptions {
  // Alef variants to bare alef and alef maqsura to yaa. Off by default:
  // duplicate detection is on exact spellings.
  bool fold_orthography = false;
  // Extra code points kept verbatim (e.g. U+200C for Persian-style text).
  std::vector<char32_t> keep;
};

/// Keeps Arabic-script letters only, deleting diacritics, tatweel, digits of
/// any script, Latin, punctuation and symbols. Whitespace runs become one
/// space and the ends are trimmed. Returns nullopt when nothing remains.
///
/// Throws Error(decoding) on malformed UTF-8 or an embedded NUL.
std::optional<std::string> normalize(std::string_view raw, const NormalizeOptions& options = {});

/// True iff normalize() would yield nothing. Undecodable input counts as
/// empty.
bool is_effectively_empty(std::string_view raw, const NormalizeOptions& options = {});

bool is_arabic_letter(char32_t cp) noexcept;
bool is_arabic_diacritic(char32_t cp) noexcept;
bool is_whitespace(char32_t cp) noexcept;

}  // namespace dialect_audit::textnorm
