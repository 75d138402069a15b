#include "dialect_audit/textnorm.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "dialect_audit/error.hpp"
#include "dialect_audit/utf8.hpp"

namespace dialect_audit::textnorm {
namespace {

constexpr std::array<std::pair<char32_t, char32_t>, 18> kArabicLetters = {{
#include "arabic_letters.inc"
}};

constexpr char32_t kTatweel = 0x0640;
constexpr char32_t kSuperscriptAlef = 0x0670;

char32_t fold(char32_t cp) noexcept {
  switch (cp) {
    case 0x0622:  // alef with madda
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
    case 0x0671:  // alef wasla
      return 0x0627;
    case 0x0649:  // alef maqsura
      return 0x064A;
    default:
      return cp;
  }
}

}  // namespace

bool is_arabic_letter(char32_t cp) noexcept {
  const auto it = std::upper_bound(
      kArabicLetters.begin(), kArabicLetters.end(), cp,
      [](char32_t value, const auto& range) { return value < range.first; });
  if (it == kArabicLetters.begin()) return false;
  return cp <= std::prev(it)->second;
}

bool is_arabic_diacritic(char32_t cp) noexcept {
  return (cp >= 0x064B && cp <= 0x0652) || cp == kSuperscriptAlef;
}

bool is_whitespace(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::optional<std::string> normalize(std::string_view raw, const NormalizeOptions& options) {
  const std::u32string decoded = utf8::decode(raw);
  if (decoded.find(U'\0') != std::u32string::npos) {
    throw Error(ErrorKind::decoding, "sentence contains a NUL character");
  }

  const auto kept = [&](char32_t cp) {
    if (std::find(options.keep.begin(), options.keep.end(), cp) != options.keep.end()) return true;
    // Tatweel and diacritics are not Lo, so the letter table already excludes them.
    return cp != kTatweel && !is_arabic_diacritic(cp) && is_arabic_letter(cp);
  };

  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char32_t cp : decoded) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (!kept(cp)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    utf8::append(out, options.fold_orthography ? fold(cp) : cp);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

bool is_effectively_empty(std::string_view raw, const NormalizeOptions& options) {
  try {
    return !normalize(raw, options).has_value();
  } catch (const Error&) {
    return true;
  }
}

}  // namespace dialect_audit::textnorm
