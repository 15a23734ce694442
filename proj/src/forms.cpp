#include "speclab/forms.hpp"

#include <algorithm>

namespace speclab {

namespace {

bool elements_equal(const AlgebraElement& a, const AlgebraElement& b, double tol) {
  if (a.is_unit != b.is_unit) return false;
  if (a.mat.dim() != b.mat.dim()) return false;
  return Matrix::dist(a.mat, b.mat) <= tol;
}

AlgebraElement element_product(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.is_unit) return b;
  if (b.is_unit) return a;
  return AlgebraElement::wrap(a.mat * b.mat);
}

// canonicalization: merge monomials whose head/tail matrices coincide
// entrywise to tol, drop zero coefficients and d(unit) tails
std::vector<FormMonomial> canonicalize(std::vector<FormMonomial> in, const Tolerances& tol) {
  std::vector<FormMonomial> out;
  for (auto& m : in) {
    if (m.coeff == cplx(0, 0)) continue;
    bool dead = false;
    for (const auto& t : m.tail)
      if (t.is_unit) dead = true;  // d1 = 0
    if (dead) continue;
    bool merged = false;
    for (auto& o : out) {
      if (o.degree() != m.degree()) continue;
      if (!elements_equal(o.head, m.head, tol.canonical_merge)) continue;
      bool same = true;
      for (int t = 0; t < m.degree(); ++t)
        if (!elements_equal(o.tail[t], m.tail[t], tol.canonical_merge)) {
          same = false;
          break;
        }
      if (same) {
        o.coeff += m.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(std::move(m));
  }
  std::vector<FormMonomial> nz;
  for (auto& m : out)
    if (m.coeff != cplx(0, 0)) nz.push_back(std::move(m));
  return nz;
}

// (c; a0; [a1..ag]) * b -> sum of monomials, via (da)b = d(ab) - a db
void mul_monomial_element(const FormMonomial& m, const AlgebraElement& b,
                          std::vector<FormMonomial>& out) {
  if (m.degree() == 0) {
    out.push_back({m.coeff, element_product(m.head, b), {}});
    return;
  }
  // ... d(ag) * b = ... d(ag b) - (... * ag) d(b)
  FormMonomial merged = m;
  merged.tail.back() = element_product(m.tail.back(), b);
  out.push_back(std::move(merged));

  FormMonomial shorter = m;
  AlgebraElement ag = shorter.tail.back();
  shorter.tail.pop_back();
  shorter.coeff = -shorter.coeff;
  std::vector<FormMonomial> inner;
  mul_monomial_element(shorter, ag, inner);
  for (auto& im : inner) {
    im.tail.push_back(b);
    out.push_back(std::move(im));
  }
}

}  // namespace

UniversalForm::UniversalForm(std::vector<FormMonomial> monos, const Tolerances& tol)
    : monos_(canonicalize(std::move(monos), tol)) {}

UniversalForm UniversalForm::element(const AlgebraElement& a) {
  return UniversalForm({{cplx(1, 0), a, {}}});
}

UniversalForm UniversalForm::one_form(const AlgebraElement& a, const AlgebraElement& b) {
  return UniversalForm({{cplx(1, 0), a, {b}}});
}

UniversalForm UniversalForm::hermitian_one_form(const Matrix& x, const Matrix& y) {
  // x dy + (x dy)^*, where the involution is fixed by pi_D-*-preservation:
  // pi(x dy)^* = -[D,y^*]x^*, so (x dy)^* = -d(y^* x^*) + y^* d(x^*).
  const int n = x.dim();
  std::vector<FormMonomial> ms;
  ms.push_back({cplx(1, 0), AlgebraElement::wrap(x), {AlgebraElement::wrap(y)}});
  ms.push_back({cplx(-1, 0), AlgebraElement::unit(n),
                {AlgebraElement::wrap(y.adjoint() * x.adjoint())}});
  ms.push_back({cplx(1, 0), AlgebraElement::wrap(y.adjoint()), {AlgebraElement::wrap(x.adjoint())}});
  return UniversalForm(std::move(ms));
}

bool UniversalForm::homogeneous(int degree) const {
  return std::all_of(monos_.begin(), monos_.end(),
                     [&](const FormMonomial& m) { return m.degree() == degree; });
}

int UniversalForm::max_degree() const {
  int d = 0;
  for (const auto& m : monos_) d = std::max(d, m.degree());
  return d;
}

UniversalForm UniversalForm::operator+(const UniversalForm& o) const {
  std::vector<FormMonomial> ms = monos_;
  ms.insert(ms.end(), o.monos_.begin(), o.monos_.end());
  return UniversalForm(std::move(ms));
}

UniversalForm UniversalForm::operator-(const UniversalForm& o) const {
  std::vector<FormMonomial> ms = monos_;
  for (auto m : o.monos_) {
    m.coeff = -m.coeff;
    ms.push_back(std::move(m));
  }
  return UniversalForm(std::move(ms));
}

UniversalForm UniversalForm::operator*(cplx s) const {
  std::vector<FormMonomial> ms = monos_;
  for (auto& m : ms) m.coeff *= s;
  return UniversalForm(std::move(ms));
}

UniversalForm d(const UniversalForm& w) {
  std::vector<FormMonomial> out;
  for (const auto& m : w.monomials()) {
    if (m.head.is_unit) continue;  // d(1 da1..) = 0
    FormMonomial r;
    r.coeff = m.coeff;
    r.head = AlgebraElement::unit(m.head.mat.dim());
    r.tail.push_back(m.head);
    r.tail.insert(r.tail.end(), m.tail.begin(), m.tail.end());
    out.push_back(std::move(r));
  }
  return UniversalForm(std::move(out));
}

UniversalForm multiply(const UniversalForm& w, const UniversalForm& e, const Tolerances& tol) {
  std::vector<FormMonomial> out;
  for (const auto& lm : w.monomials()) {
    for (const auto& rm : e.monomials()) {
      std::vector<FormMonomial> prods;
      mul_monomial_element(lm, rm.head, prods);
      for (auto& p : prods) {
        p.coeff *= rm.coeff;
        p.tail.insert(p.tail.end(), rm.tail.begin(), rm.tail.end());
        out.push_back(std::move(p));
      }
    }
  }
  return UniversalForm(std::move(out), tol);
}

Matrix pi_D(const UniversalForm& w, const HermitianMatrix& dd) {
  const Matrix& dm = dd.matrix();
  Matrix acc(dm.dim());
  for (const auto& m : w.monomials()) {
    Matrix p = m.head.is_unit ? Matrix::identity(dm.dim()) : m.head.mat;
    for (const auto& t : m.tail) p = p * commutator(dm, t.mat);
    acc += m.coeff * p;
  }
  return acc;
}

UniversalForm curvature(const UniversalForm& a, const Tolerances& tol) {
  if (!a.homogeneous(1)) throw contract_error("curvature: A must be homogeneous of degree 1");
  return d(a) + multiply(a, a, tol);
}

TPolynomialForm tpoly_multiply(const TPolynomialForm& x, const TPolynomialForm& y,
                               const Tolerances& tol) {
  TPolynomialForm r;
  for (const auto& [px, fx] : x)
    for (const auto& [py, fy] : y) {
      UniversalForm prod = multiply(fx, fy, tol);
      auto it = r.find(px + py);
      if (it == r.end())
        r.emplace(px + py, std::move(prod));
      else
        it->second = it->second + prod;
    }
  return r;
}

UniversalForm tpoly_integrate01(const TPolynomialForm& x, const Tolerances& tol) {
  UniversalForm r;
  for (const auto& [p, f] : x) r = r + f * cplx(1.0 / (p + 1), 0);
  (void)tol;
  return r;
}

UniversalForm chern_simons(const UniversalForm& a, int k, const Tolerances& tol) {
  if (k < 1) throw contract_error("chern_simons: k must be >= 1");
  if (!a.homogeneous(1)) throw contract_error("chern_simons: A must be homogeneous of degree 1");
  TPolynomialForm ft;  // F_t = t dA + t^2 A^2
  ft[1] = d(a);
  ft[2] = multiply(a, a, tol);
  TPolynomialForm acc;
  acc[0] = a;
  for (int j = 0; j < k - 1; ++j) acc = tpoly_multiply(acc, ft, tol);
  return tpoly_integrate01(acc, tol);
}

UniversalForm gauge_transform(const UniversalForm& a, const Matrix& u, const Tolerances& tol) {
  if (!a.homogeneous(1)) throw contract_error("gauge_transform: A must be homogeneous of degree 1");
  const Matrix uu = u * u.adjoint();
  if (Matrix::dist(uu, Matrix::identity(u.dim())) > tol.unitary_check)
    throw contract_error("gauge_transform: U not unitary");
  UniversalForm udu = UniversalForm::one_form(AlgebraElement::wrap(u),
                                              AlgebraElement::wrap(u.adjoint()));
  UniversalForm uform = UniversalForm::element(AlgebraElement::wrap(u));
  UniversalForm ustar = UniversalForm::element(AlgebraElement::wrap(u.adjoint()));
  return udu + multiply(multiply(uform, a, tol), ustar, tol);
}

}  // namespace speclab
