#ifndef VFSM_SAMPLING_HPP
#define VFSM_SAMPLING_HPP

#include <cstdint>
#include <random>

#include "vfsm/numerics.hpp"

namespace vfsm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// n x d Latin hypercube in [0, 1)^d: each column hits each of the n strata
/// [i/n, (i+1)/n) exactly once.
Matrix latin_hypercube_unit(Index n, Index d, Rng& rng);

}  // namespace vfsm

#endif  // VFSM_SAMPLING_HPP
