#pragma once

#include "speclab/cocycles.hpp"

namespace speclab {

// A word is a product of letter forms (typically A and dA). Integrals
// int_phi(word) are evaluated by a chain transfer that never expands the
// product symbolically: the product rule collapses, at the matrix level, to
//   int_phi(w . y0 dy1..dyh) = <.., last*y0, [D,y1],..,[D,yh]>
//                              + [deg w even] <.., last, [D,y0],..,[D,yh]>,
// and the remaining index sums are contracted against the divided-difference
// kernel through a counting-polynomial transfer.
using FormWord = std::vector<UniversalForm>;

cplx phi_integral_of_word(const CocycleContext& ctx, const FormWord& word);

// int_{B0 phi} w = int_phi dw; applied through the Leibniz expansion of the
// word (only A -> dA letters survive).
cplx phi_integral_of_word_differential(const CocycleContext& ctx, const FormWord& word);

struct ExpansionReport {
  int K = 0;
  cplx lhs;                       // Tr(f(D+V) - f(D))
  std::vector<cplx> cs_terms;     // int_{psi_{2k-1}} cs_{2k-1}(A), k = 1..K
  std::vector<cplx> ym_terms;     // (1/2k) int_{phi_{2k}} F^k
  std::vector<cplx> partial;      // partial sums over k
  cplx remainder_direct;          // lhs - partial[K-1]
  cplx remainder_formula;         // MOI tail minus the T_K word sum
  size_t tk_size = 0;             // |T_K|
  double scale = 1;               // max(1, |lhs|, largest |term|)
  bool remainders_agree = false;  // to tol.expansion_remainder * scale
};

ExpansionReport expand(const HermitianMatrix& D, const TestFunction& f, const UniversalForm& A,
                       int K, const Tolerances& tol = default_tols());

// index set T_K of the remainder bookkeeping; |T_K| <= 2^{K+1}
struct TkWord {
  std::vector<int> v, w;
  int p = 0;
  double coeff() const;                 // 1/(2|v|+|w|+p+1)
  int a_letters() const;                // 1 + 2|v| + p
};
std::vector<TkWord> enumerate_tk(int K);

struct GaugeReport {
  double total_trace_diff;            // |Tr f(D+V) - Tr f(U(D+V)U^*)|
  std::vector<double> ym_diffs;       // |YM_k(A^U) - YM_k(A)|, k = 1..K
  std::vector<cplx> cs_diffs;         // CS_k(A^U) - CS_k(A), reported only
};
GaugeReport gauge_invariance_report(const HermitianMatrix& D, const TestFunction& f,
                                    const UniversalForm& A, const Matrix& U, int K,
                                    const Tolerances& tol = default_tols());

struct K1PairingReport {
  std::vector<cplx> terms;         // (k!^2/(2k+1)!) psi_{2k+1}(U^*,U,..), k = 0..K_max
  std::vector<cplx> partial_sums;  // S_K
};
K1PairingReport k1_pairing_truncation(const HermitianMatrix& D, const TestFunction& f,
                                      const Matrix& U, int k_max,
                                      const Tolerances& tol = default_tols());

}  // namespace speclab
