#include "speclab/rng.hpp"

#include <cmath>

namespace speclab {

namespace {
inline uint64_t mix(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

uint64_t Rng::next_u64() {
  const uint64_t golden = 0x9e3779b97f4a7c15ULL;
  uint64_t z = seed_ + golden * (counter_++ + 1);
  z ^= mix(stream_ + golden);
  return mix(z);
}

double Rng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 0;
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2 * M_PI * u2);
}

cplx Rng::complex_normal() {
  const double re = normal(), im = normal();
  return cplx(re, im) / std::sqrt(2.0);
}

Rng Rng::split(uint64_t substream) const { return Rng(seed_, mix(stream_ ^ (substream + 1))); }

Matrix random_matrix(Rng& rng, int n) {
  Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.complex_normal();
  return m;
}

HermitianMatrix random_hermitian(Rng& rng, int n) {
  Matrix g = random_matrix(rng, n);
  Matrix h = (g + g.adjoint()) * cplx(0.5, 0);
  return HermitianMatrix(h);
}

HermitianMatrix random_hermitian_unit(Rng& rng, int n, const Tolerances& tol) {
  HermitianMatrix h = random_hermitian(rng, n);
  const double nrm = operator_norm(h.matrix(), tol);
  if (nrm == 0.0) return h;
  return HermitianMatrix(h.matrix() * cplx(1.0 / nrm, 0), tol);
}

Matrix random_unitary(Rng& rng, int n) {
  Matrix g = random_matrix(rng, n);
  // modified Gram-Schmidt on columns
  for (int c = 0; c < n; ++c) {
    for (int prev = 0; prev < c; ++prev) {
      cplx ip = 0;
      for (int r = 0; r < n; ++r) ip += std::conj(g(r, prev)) * g(r, c);
      for (int r = 0; r < n; ++r) g(r, c) -= ip * g(r, prev);
    }
    double nrm = 0;
    for (int r = 0; r < n; ++r) nrm += std::norm(g(r, c));
    nrm = std::sqrt(nrm);
    for (int r = 0; r < n; ++r) g(r, c) /= nrm;
  }
  return g;
}

}  // namespace speclab
