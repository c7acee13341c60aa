#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace grounding {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Lowercase + trim; the normalisation applied to lexicon words and labels.
inline std::string normalize_word(std::string_view s) { return to_lower(trim(s)); }

/// Splits on every non-alphanumeric byte and lowercases.  Bytes >= 0x80 are
/// treated as separators, so non-ASCII text yields no tokens.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace grounding
