#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ontomatch {

// Decodes UTF-8 into codepoints. Invalid sequences decode to U+FFFD,
// one replacement per offending byte, so decoding is total and
// deterministic.
std::u32string decode_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view cps);
std::string encode_utf8(char32_t cp);

// Locale-independent lowercasing for ASCII, Latin-1, Latin Extended-A,
// Greek, and Cyrillic. Other codepoints pass through unchanged.
char32_t lower_codepoint(char32_t cp);

bool is_space_codepoint(char32_t cp);

}  // namespace ontomatch
