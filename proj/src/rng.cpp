#include "gmoe/rng.hpp"

#include <algorithm>

namespace gmoe {

std::vector<int> floyd_sample(Rng& rng, int population, int k) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = population - k; i < population; ++i) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    if (std::find(out.begin(), out.end(), t) != out.end())
      out.push_back(i);
    else
      out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace gmoe
