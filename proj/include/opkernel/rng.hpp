#ifndef OPKERNEL_RNG_HPP
#define OPKERNEL_RNG_HPP

#include <cstdint>

#include "opkernel/numerics.hpp"

namespace opkernel {

/**
 * Seeded xoshiro256** generator (seeded through splitmix64), used everywhere
 * randomness is needed so that fixtures and the selftest are reproducible
 * bit-for-bit across runs.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform index in [0, n).
  std::size_t uniform_index(std::size_t n);
  /// Standard normal (Box-Muller, no cached spare).
  double normal();
  /// Complex with independent N(0, 1/2) parts, so E|z|^2 = 1.
  cplx cnormal();

 private:
  std::uint64_t state_[4];
};

CMatrix random_matrix(Rng &rng, std::size_t rows, std::size_t cols);
CMatrix random_hermitian(Rng &rng, std::size_t n);
CMatrix random_unitary(Rng &rng, std::size_t n);
/// Random PSD matrix of the given rank (clamped to n).
CMatrix random_psd(Rng &rng, std::size_t n, std::size_t rank);

}  // namespace opkernel

#endif
