#pragma once

#include <functional>
#include <memory>

#include "speclab/forms.hpp"
#include "speclab/moi.hpp"

namespace speclab {

// Hochschild n-cochain as an evaluation closure; lazy per tuple.
struct Cochain {
  int degree = 0;  // n, takes n+1 arguments
  std::function<cplx(const std::vector<AlgebraElement>&)> eval;

  cplx operator()(const std::vector<AlgebraElement>& args) const;
};

// Shared evaluation state for one (D, f): eigensystem plus the (f')-kernel.
class CocycleContext {
 public:
  CocycleContext(const HermitianMatrix& d, TestFunction f,
                 const Tolerances& tol = default_tols());

  const HermitianMatrix& D() const { return d_; }
  const EigenSystem& eig() const { return *eig_; }
  const TestFunction& f() const { return f_; }
  const Tolerances& tol() const { return tol_; }
  int dim() const { return d_.dim(); }

  // <W_1,..,W_n> through the cached (f')-kernel
  cplx bracket(const std::vector<Matrix>& w) const;

  // phi_n(a_0..a_n) = <a_0[D,a_1],[D,a_2],..,[D,a_n]>; phi_0 = 0
  Cochain phi(int n) const;
  // psi_{2k-1} = phi_{2k-1} - 1/2 B_0 phi_{2k}
  Cochain psi(int k) const;
  // tilde-psi_{2k-1} = (-1)^{k-1} (k-1)!/(2k-1)! psi_{2k-1}
  Cochain psi_tilde(int k) const;

  // int_chi of a universal form: each monomial routed to the degree-matching
  // cochain of the family (0 -> chi(0), etc).
  cplx integrate(const std::function<Cochain(int)>& family, const UniversalForm& w) const;
  cplx integrate_phi(const UniversalForm& w) const;
  cplx integrate_psi_level(int k, const UniversalForm& w) const;  // psi_{2k-1} on deg 2k-1 parts

 private:
  HermitianMatrix d_;
  TestFunction f_;
  Tolerances tol_;
  std::shared_ptr<EigenSystem> eig_;
  std::shared_ptr<SpectralKernel> fprime_kernel_;
};

// coboundary operators
Cochain b_op(const Cochain& c);
Cochain B0_op(const Cochain& c);
Cochain B_op(const Cochain& c);
Cochain scale(const Cochain& c, cplx s);
Cochain add(const Cochain& x, const Cochain& y);

}  // namespace speclab
