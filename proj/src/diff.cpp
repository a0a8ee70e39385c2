#include <vector>

#include "rv/branch_store.hpp"

namespace rv::store {

std::vector<DiffEntry> diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // lcs[i][j] = LCS length of a[i..] and b[j..]
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);

  std::vector<DiffEntry> out;
  std::vector<std::size_t> dels;  // indices into a
  std::vector<std::size_t> ins;   // indices into b
  auto flush = [&] {
    const std::size_t paired = std::min(dels.size(), ins.size());
    for (std::size_t k = 0; k < paired; ++k)
      out.push_back({dels[k] + 1, ins[k] + 1, a[dels[k]], b[ins[k]]});
    for (std::size_t k = paired; k < dels.size(); ++k) out.push_back({dels[k] + 1, 0, a[dels[k]], std::nullopt});
    for (std::size_t k = paired; k < ins.size(); ++k) out.push_back({0, ins[k] + 1, std::nullopt, b[ins[k]]});
    dels.clear();
    ins.clear();
  };

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      flush();
      ++i;
      ++j;
      continue;
    }
    bool drop_left;
    if (i == n) drop_left = false;
    else if (j == m) drop_left = true;
    else if (lcs[i + 1][j] != lcs[i][j + 1]) drop_left = lcs[i + 1][j] > lcs[i][j + 1];
    // Tie: drop the lexicographically smaller line so that swapping the
    // inputs makes the mirrored choice.
    else drop_left = a[i] < b[j];
    if (drop_left) dels.push_back(i++);
    else ins.push_back(j++);
  }
  flush();
  return out;
}

}  // namespace rv::store
