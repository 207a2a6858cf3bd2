#include "vfsm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace vfsm {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

Matrix latin_hypercube_unit(Index n, Index d, Rng& rng) {
  Matrix out(n, d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) {
      double u = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + unit(rng)) /
                 static_cast<double>(n);
      // Guard against rounding up into the next stratum.
      const double upper = static_cast<double>(perm[static_cast<std::size_t>(i)] + 1) /
                           static_cast<double>(n);
      if (u >= upper) u = std::nextafter(upper, 0.0);
      out(i, k) = u;
    }
  }
  return out;
}

}  // namespace vfsm
