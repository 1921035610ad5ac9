#include "ontomatch/levenshtein.hpp"

#include <algorithm>
#include <vector>

#include "ontomatch/utf8.hpp"

namespace ontomatch {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a == b) return 0;
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  if (a.size() < b.size()) std::swap(a, b);  // keep the rows short

  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cur[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t cost = (a[i] == b[j]) ? 0 : 1;
      cur[j + 1] = std::min({cur[j] + 1, prev[j + 1] + 1, prev[j] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double normalized_edit_similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = decode_utf8(a);
  const std::u32string ub = decode_utf8(b);
  const std::size_t maxlen = std::max(ua.size(), ub.size());
  if (maxlen == 0) return 1.0;
  const std::size_t d = levenshtein(ua, ub);
  return 1.0 - static_cast<double>(d) / static_cast<double>(maxlen);
}

}  // namespace ontomatch
