#include "speclab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace speclab {

Matrix::Matrix(int n, std::vector<cplx> entries) : n_(n), a_(std::move(entries)) {
  if (n < 1) throw contract_error("Matrix: dim must be >= 1");
  if (a_.size() != static_cast<size_t>(n) * n) throw contract_error("Matrix: entry count mismatch");
  if (!is_finite()) throw contract_error("Matrix: non-finite entry");
}

Matrix Matrix::identity(int n) {
  Matrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const std::vector<double>& d) {
  Matrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::diag_c(const std::vector<cplx>& d) {
  Matrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
  Matrix r = *this;
  r += o;
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  Matrix r = *this;
  r -= o;
  return r;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (n_ != o.n_) throw contract_error("Matrix+: dim mismatch");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (n_ != o.n_) throw contract_error("Matrix-: dim mismatch");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (n_ != o.n_) throw contract_error("Matrix*: dim mismatch");
  Matrix r(n_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      const cplx aik = (*this)(i, k);
      if (aik == cplx(0, 0)) continue;
      for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
    }
  return r;
}

Matrix Matrix::operator*(cplx s) const {
  Matrix r = *this;
  for (auto& v : r.a_) v *= s;
  return r;
}

Matrix Matrix::adjoint() const {
  Matrix r(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
  return r;
}

cplx Matrix::trace() const {
  cplx t = 0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius() const {
  double s = 0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::is_finite() const {
  for (const auto& v : a_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double Matrix::dist(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw contract_error("Matrix::dist: dim mismatch");
  double m = 0;
  for (size_t k = 0; k < a.a_.size(); ++k) m = std::max(m, std::abs(a.a_[k] - b.a_[k]));
  return m;
}

HermitianMatrix::HermitianMatrix(const Matrix& a, const Tolerances& tol) {
  const int n = a.dim();
  double defect = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) defect = std::max(defect, std::abs(a(i, j) - std::conj(a(j, i))));
  const double scale = std::max(1.0, a.max_abs());
  if (defect > tol.hermitian_symmetry * scale)
    throw contract_error("HermitianMatrix: symmetry defect " + std::to_string(defect));
  Matrix s(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  m_ = s;
}

HermitianMatrix HermitianMatrix::diag(const std::vector<double>& d) {
  return HermitianMatrix(Matrix::diag(d));
}

Matrix EigenSystem::projector(int i) const {
  const int n = eigenvectors.dim();
  Matrix p(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) p(r, c) = eigenvectors(r, i) * std::conj(eigenvectors(c, i));
  return p;
}

// One cyclic Jacobi sweep zeroes every off-diagonal pair once, in a fixed
// (p,q) order, so runs are bit-reproducible.
EigenSystem eigh(const HermitianMatrix& h, const Tolerances& tol) {
  const int n = h.dim();
  Matrix a = h.matrix();
  Matrix v = Matrix::identity(n);
  const double anorm = std::max(a.frobenius(), 1e-300);

  auto offdiag = [&]() {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  while (offdiag() > tol.jacobi_offdiag * anorm) {
    if (++sweep > tol.jacobi_max_sweeps)
      throw consistency_error("eigh: Jacobi did not converge in " +
                              std::to_string(tol.jacobi_max_sweeps) + " sweeps");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r < 1e-300) continue;
        const cplx phase = apq / r;  // apq = r * phase
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // columns: col_p' = c*col_p - s*conj(phase)*col_q ; col_q' = s*phase*col_p + c*col_q
        for (int i = 0; i < n; ++i) {
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * std::conj(phase) * aiq;
          a(i, q) = s * phase * aip + c * aiq;
          const cplx vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * std::conj(phase) * viq;
          v(i, q) = s * phase * vip + c * viq;
        }
        for (int j = 0; j < n; ++j) {
          const cplx apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * phase * aqj;
          a(q, j) = s * std::conj(phase) * apj + c * aqj;
        }
        a(p, q) = 0;
        a(q, p) = 0;
        a(p, p) = cplx(a(p, p).real(), 0);
        a(q, q) = cplx(a(q, q).real(), 0);
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  EigenSystem es;
  es.eigenvalues.resize(n);
  es.eigenvectors = Matrix(n);
  for (int k = 0; k < n; ++k) {
    es.eigenvalues[k] = a(order[k], order[k]).real();
    for (int i = 0; i < n; ++i) es.eigenvectors(i, k) = v(i, order[k]);
  }

  // post: reconstruction residual
  Matrix rec(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s = 0;
      for (int k = 0; k < n; ++k)
        s += es.eigenvectors(i, k) * es.eigenvalues[k] * std::conj(es.eigenvectors(j, k));
      rec(i, j) = s;
    }
  const double res = Matrix::dist(rec, h.matrix());
  if (res > tol.eigh_residual * std::max(1.0, anorm))
    throw consistency_error("eigh: reconstruction residual " + std::to_string(res));
  return es;
}

Matrix apply_function(const EigenSystem& es, const std::function<cplx(double)>& f) {
  const int n = es.eigenvectors.dim();
  std::vector<cplx> fv(n);
  for (int k = 0; k < n; ++k) fv[k] = f(es.eigenvalues[k]);
  Matrix r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s = 0;
      for (int k = 0; k < n; ++k)
        s += es.eigenvectors(i, k) * fv[k] * std::conj(es.eigenvectors(j, k));
      r(i, j) = s;
    }
  return r;
}

Matrix apply_function(const HermitianMatrix& a, const std::function<cplx(double)>& f,
                      const Tolerances& tol) {
  return apply_function(eigh(a, tol), f);
}

std::vector<double> singular_values(const Matrix& a, const Tolerances& tol) {
  // sqrt of the spectrum of A^* A
  HermitianMatrix ata(a.adjoint() * a, tol);
  EigenSystem es = eigh(ata, tol);
  std::vector<double> sv(es.eigenvalues.size());
  for (size_t i = 0; i < sv.size(); ++i) sv[i] = std::sqrt(std::max(0.0, es.eigenvalues[i]));
  return sv;
}

double trace_norm(const Matrix& a, const Tolerances& tol) {
  const auto sv = singular_values(a, tol);
  double s = 0;
  for (double x : sv) s += x;
  return s;
}

double operator_norm(const Matrix& a, const Tolerances& tol) {
  const auto sv = singular_values(a, tol);
  return sv.empty() ? 0.0 : sv.back();
}

Matrix expm_i(const HermitianMatrix& h, double t, const Tolerances& tol) {
  return apply_function(h, [t](double x) { return std::exp(cplx(0, -t * x)); }, tol);
}

Matrix resolvent_at_i(const EigenSystem& es) {
  const int n = es.eigenvectors.dim();
  Matrix r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s = 0;
      for (int k = 0; k < n; ++k)
        s += es.eigenvectors(i, k) * (1.0 / cplx(es.eigenvalues[k], -1.0)) *
             std::conj(es.eigenvectors(j, k));
      r(i, j) = s;
    }
  return r;
}

Matrix commutator(const Matrix& d, const Matrix& a) { return d * a - a * d; }

}  // namespace speclab
