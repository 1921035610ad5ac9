#pragma once

#include <cstddef>
#include <string_view>

namespace ontomatch {

// Levenshtein distance over Unicode codepoints (unit insert/delete/substitute
// costs). Two-row dynamic programming.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// 1 - lev(a, b) / max(|a|, |b|) over codepoints of the UTF-8 inputs.
// Both inputs empty counts as identical (similarity 1).
double normalized_edit_similarity(std::string_view a, std::string_view b);

}  // namespace ontomatch
