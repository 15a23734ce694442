#pragma once

namespace speclab {

// All numerical tolerances in one place. Defaults are the values the test
// suites and reports are calibrated against; callers may tighten or relax
// per instance.
struct Tolerances {
  double hermitian_symmetry = 1e-12;   // |A_ij - conj(A_ji)| accepted before symmetrizing
  double jacobi_offdiag = 1e-13;       // off-diagonal Frobenius mass, relative to ||A||_F
  int jacobi_max_sweeps = 100;
  double eigh_residual = 1e-10;        // reconstruction, relative to max(1, ||A||_F)
  double cluster_delta = 1e-8;         // node clustering for confluent divided differences
  double moi_consistency = 1e-10;      // wrap-around sum vs (f')-form
  double bracket_consistency = 1e-9;   // rotation sum vs (f')-form
  double remainder_match = 1e-8;       // two Taylor-remainder code paths
  double change_of_variables = 1e-8;
  double expansion_remainder = 1e-7;   // remainder_direct vs remainder_formula
  double gauge_total_trace = 1e-10;
  double gauge_ym_term = 1e-8;
  double quadrature_abs = 1e-8;        // Fourier L1 weights for PolyGaussian
  double canonical_merge = 1e-12;      // entrywise matrix equality for form monomials
  double unitary_check = 1e-10;
  double intertwining = 1e-12;
  double dense_product = 1e-12;        // symbol product vs dense window product
  double free_evolution = 1e-9;        // closed form vs dense conjugation
  double amplitude_match = 1e-10;      // one-loop engine vs closed forms
  double ward_residual = 1e-9;
};

inline const Tolerances& default_tols() {
  static const Tolerances t{};
  return t;
}

}  // namespace speclab
