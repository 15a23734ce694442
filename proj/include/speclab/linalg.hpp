#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "speclab/tolerances.hpp"

namespace speclab {

using cplx = std::complex<double>;

class contract_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class consistency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class size_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense square complex matrix, row-major.
class Matrix {
 public:
  Matrix() : n_(0) {}
  explicit Matrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, cplx(0, 0)) {
    if (n < 1) throw contract_error("Matrix: dim must be >= 1");
  }
  Matrix(int n, std::vector<cplx> entries);

  static Matrix identity(int n);
  static Matrix diag(const std::vector<double>& d);
  static Matrix diag_c(const std::vector<cplx>& d);

  int dim() const { return n_; }
  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  const std::vector<cplx>& data() const { return a_; }

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator*(cplx s) const;
  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix adjoint() const;
  cplx trace() const;
  double frobenius() const;
  double max_abs() const;
  bool is_finite() const;

  // max_ij |(A-B)_ij|
  static double dist(const Matrix& a, const Matrix& b);

 private:
  int n_;
  std::vector<cplx> a_;
};

inline Matrix operator*(cplx s, const Matrix& m) { return m * s; }

// Hermitian view: constructor symmetrizes (A+A*)/2 after checking the defect
// is below tol.hermitian_symmetry * scale.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Matrix& a, const Tolerances& tol = default_tols());
  static HermitianMatrix diag(const std::vector<double>& d);

  int dim() const { return m_.dim(); }
  const Matrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

struct EigenSystem {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // columns are eigenvectors

  Matrix projector(int i) const;  // |phi_i><phi_i|
};

// Cyclic complex Jacobi eigensolver.
EigenSystem eigh(const HermitianMatrix& a, const Tolerances& tol = default_tols());

// U f(Lambda) U^*
Matrix apply_function(const HermitianMatrix& a, const std::function<cplx(double)>& f,
                      const Tolerances& tol = default_tols());
Matrix apply_function(const EigenSystem& es, const std::function<cplx(double)>& f);

double trace_norm(const Matrix& a, const Tolerances& tol = default_tols());
double operator_norm(const Matrix& a, const Tolerances& tol = default_tols());
std::vector<double> singular_values(const Matrix& a, const Tolerances& tol = default_tols());

// exp(-i t H), unitary
Matrix expm_i(const HermitianMatrix& h, double t, const Tolerances& tol = default_tols());

// (H - i)^{-1} via the eigendecomposition
Matrix resolvent_at_i(const EigenSystem& es);

Matrix commutator(const Matrix& d, const Matrix& a);

}  // namespace speclab
