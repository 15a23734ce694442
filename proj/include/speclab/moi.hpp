#pragma once

#include <map>
#include <memory>
#include <vector>

#include "speclab/funcs.hpp"
#include "speclab/linalg.hpp"

namespace speclab {

// Per-slot operators H_0..H_n with cached eigensystems. All finite-dimensional
// multiple operator integrals are exact spectral sums; no truncation enters.
class MoiContext {
 public:
  MoiContext(std::vector<HermitianMatrix> ops, TestFunction f,
             const Tolerances& tol = default_tols());
  // all slots equal to h
  MoiContext(const HermitianMatrix& h, int order, TestFunction f,
             const Tolerances& tol = default_tols());

  int order() const { return static_cast<int>(ops_.size()) - 1; }  // n
  int dim() const { return ops_.front().dim(); }
  const HermitianMatrix& op(int j) const { return ops_[j]; }
  const EigenSystem& eig(int j) const { return eigs_[j]; }
  const TestFunction& f() const { return f_; }
  const Tolerances& tol() const { return tol_; }

 private:
  std::vector<HermitianMatrix> ops_;
  std::vector<EigenSystem> eigs_;
  TestFunction f_;
  Tolerances tol_;
};

// Divided differences of f (or a derivative of f) over a fixed spectrum,
// memoized on the index multiset. Shared by moi, cocycles, expansion, oneloop.
class SpectralKernel {
 public:
  SpectralKernel(std::vector<double> eigenvalues, TestFunction f,
                 const Tolerances& tol = default_tols());

  // f^[order] at eigenvalues indexed by idx (any length = order+1)
  cplx dd(const std::vector<int>& idx) const;
  const std::vector<double>& eigenvalues() const { return lams_; }

 private:
  std::vector<double> lams_;
  TestFunction f_;
  Tolerances tol_;
  mutable std::map<std::vector<int>, cplx> memo_;
};

// T_{f^[n]}^{H_0..H_n}(V_1..V_n), the exact (n+1)-fold spectral sum.
// n = 0 returns f(H_0). Refuses outside the supported envelope
// (dim <= 8, n <= 5).
Matrix moi_operator(const MoiContext& ctx, const std::vector<Matrix>& v);

// Tr T_{f^[n]}^{H,..,H}(V_1..V_n) via the wrap-around sum; cross-validated
// against the (f')-form through the rotation-sum identity.
cplx trace_moi(const MoiContext& ctx, const std::vector<Matrix>& v);

// <V_1,..,V_n> = sum of all cyclic rotations of the wrap-around trace;
// equals the single (f')-weighted sum, which is also computed and compared.
cplx bracket(const HermitianMatrix& d, const TestFunction& f, const std::vector<Matrix>& v,
             const Tolerances& tol = default_tols());

// same bracket against a cached eigensystem + kernel (hot path)
cplx bracket_cached(const EigenSystem& es, const SpectralKernel& fprime_kernel,
                    const std::vector<Matrix>& v);

// (1/n!) d^n/dt^n Tr f(H+tV) |_0
cplx derivative_of_trace(const HermitianMatrix& h, const Matrix& v, const TestFunction& f, int n,
                         const Tolerances& tol = default_tols());

struct RemainderPair {
  Matrix direct;   // f(H+V) - sum_{k<n} T_{f^[k]}(V,..,V)
  Matrix moi_form; // T^{H+V,H,..,H}_{f^[n]}(V,..,V)
};
RemainderPair taylor_remainder(const HermitianMatrix& h, const HermitianMatrix& v,
                               const TestFunction& f, int n,
                               const Tolerances& tol = default_tols());

struct ChangeOfVariablesPair {
  Matrix lhs;  // T_{f^[n]}(V_1..V_n)
  Matrix rhs;  // weighted resolvent expansion, Thm on adding resolvents (ii)
};
ChangeOfVariablesPair change_of_variables(const MoiContext& ctx, const std::vector<Matrix>& v);

struct SchattenBoundReport {
  double lhs;        // ||T_{f^[n]}(V_1..V_n)||_1
  double rhs;        // c_{s,n}(f) prod ||V_j|| ||(D-i)^{-1}||_s^s
  double seminorm;   // c_{s,n}(f)
  bool holds;
};
SchattenBoundReport schatten_bound_check(const HermitianMatrix& d, const TestFunction& f,
                                         const std::vector<Matrix>& v, int s,
                                         const Tolerances& tol = default_tols());

}  // namespace speclab
