#pragma once

#include <cstdint>

#include "speclab/linalg.hpp"

namespace speclab {

// Counter-based SplitMix64. Streams are independent functions of
// (seed, stream, counter), so parameter sweeps can split deterministically.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  uint64_t next_u64();
  double uniform();              // [0,1)
  double normal();               // standard normal, Box-Muller
  cplx complex_normal();         // (normal + i normal)/sqrt(2)
  Rng split(uint64_t substream) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_, stream_;
  uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0;
};

Matrix random_matrix(Rng& rng, int n);                     // i.i.d. complex Gaussian entries
HermitianMatrix random_hermitian(Rng& rng, int n);         // symmetrized
// symmetrized and scaled to spectral norm <= 1
HermitianMatrix random_hermitian_unit(Rng& rng, int n, const Tolerances& tol = default_tols());
Matrix random_unitary(Rng& rng, int n);                    // Gram-Schmidt of a Gaussian matrix

}  // namespace speclab
