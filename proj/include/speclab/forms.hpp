#pragma once

#include <map>
#include <vector>

#include "speclab/linalg.hpp"

namespace speclab {

// Element of the matrix algebra; the unit carries an explicit flag and is
// never detected numerically.
struct AlgebraElement {
  Matrix mat;
  bool is_unit = false;

  static AlgebraElement unit(int n) { return {Matrix::identity(n), true}; }
  static AlgebraElement wrap(Matrix m) { return {std::move(m), false}; }
  AlgebraElement adjoint() const { return {mat.adjoint(), is_unit}; }
};

// c * a0 da1 ... dan ; tail elements never carry the unit flag.
struct FormMonomial {
  cplx coeff;
  AlgebraElement head;
  std::vector<AlgebraElement> tail;

  int degree() const { return static_cast<int>(tail.size()); }
};

// Formal sum of monomials, mixed degree allowed.
class UniversalForm {
 public:
  UniversalForm() = default;
  explicit UniversalForm(std::vector<FormMonomial> monos, const Tolerances& tol = default_tols());

  static UniversalForm zero() { return UniversalForm(); }
  static UniversalForm element(const AlgebraElement& a);          // degree 0
  static UniversalForm one_form(const AlgebraElement& a, const AlgebraElement& b);  // a db
  // x dy + (x dy)^*, a Hermitian universal one-form
  static UniversalForm hermitian_one_form(const Matrix& x, const Matrix& y);

  const std::vector<FormMonomial>& monomials() const { return monos_; }
  bool empty() const { return monos_.empty(); }
  bool homogeneous(int degree) const;
  int max_degree() const;

  UniversalForm operator+(const UniversalForm& o) const;
  UniversalForm operator-(const UniversalForm& o) const;
  UniversalForm operator*(cplx s) const;

 private:
  std::vector<FormMonomial> monos_;
};

UniversalForm d(const UniversalForm& w);
UniversalForm multiply(const UniversalForm& w, const UniversalForm& e,
                       const Tolerances& tol = default_tols());
Matrix pi_D(const UniversalForm& w, const HermitianMatrix& dd);

// F = dA + A^2, contract error unless A is homogeneous of degree 1
UniversalForm curvature(const UniversalForm& a, const Tolerances& tol = default_tols());

// cs_{2k-1}(A) = int_0^1 A F_t^{k-1} dt, F_t = t dA + t^2 A^2; exact
// t-integration on integer powers.
UniversalForm chern_simons(const UniversalForm& a, int k, const Tolerances& tol = default_tols());

// A^U = U dU^* + U A U^*
UniversalForm gauge_transform(const UniversalForm& a, const Matrix& u,
                              const Tolerances& tol = default_tols());

// form-valued polynomial in t
using TPolynomialForm = std::map<int, UniversalForm>;
TPolynomialForm tpoly_multiply(const TPolynomialForm& x, const TPolynomialForm& y,
                               const Tolerances& tol = default_tols());
UniversalForm tpoly_integrate01(const TPolynomialForm& x, const Tolerances& tol = default_tols());

}  // namespace speclab
