#include "hocp/taylor.hpp"

#include <charconv>

namespace hocp {

std::size_t multi_index_count(int n, int m) {
  // C(n+m-1, m), built incrementally to stay exact.
  std::size_t c = 1;
  for (int k = 1; k <= m; ++k) c = c * static_cast<std::size_t>(n + k - 1) / static_cast<std::size_t>(k);
  return c;
}

bool next_multi_index(std::vector<int>& idx, int n) {
  const int m = static_cast<int>(idx.size());
  int p = m - 1;
  while (p >= 0 && idx[p] == n - 1) --p;
  if (p < 0) return false;
  const int v = idx[p] + 1;
  for (int k = p; k < m; ++k) idx[k] = v;
  return true;
}

long long multi_index_multiplicity(std::span<const int> idx) {
  const int m = static_cast<int>(idx.size());
  long long num = 1;
  for (int k = 2; k <= m; ++k) num *= k;
  long long den = 1;
  int run = 1;
  for (int p = 1; p <= m; ++p) {
    if (p < m && idx[p] == idx[p - 1]) {
      ++run;
    } else {
      for (int k = 2; k <= run; ++k) den *= k;
      run = 1;
    }
  }
  return num / den;
}

std::string scalar_traits<double>::format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace hocp
