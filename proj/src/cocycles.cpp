#include "speclab/cocycles.hpp"

namespace speclab {

namespace {
double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}
}  // namespace

cplx Cochain::operator()(const std::vector<AlgebraElement>& args) const {
  if (static_cast<int>(args.size()) != degree + 1)
    throw contract_error("Cochain: expects " + std::to_string(degree + 1) + " arguments");
  return eval(args);
}

CocycleContext::CocycleContext(const HermitianMatrix& d, TestFunction f, const Tolerances& tol)
    : d_(d), f_(std::move(f)), tol_(tol) {
  eig_ = std::make_shared<EigenSystem>(eigh(d_, tol_));
  fprime_kernel_ =
      std::make_shared<SpectralKernel>(eig_->eigenvalues, f_.derivative_function(), tol_);
}

cplx CocycleContext::bracket(const std::vector<Matrix>& w) const {
  return bracket_cached(*eig_, *fprime_kernel_, w);
}

Cochain CocycleContext::phi(int n) const {
  Cochain c;
  c.degree = n;
  if (n == 0) {
    c.eval = [](const std::vector<AlgebraElement>&) { return cplx(0, 0); };
    return c;
  }
  auto self = *this;
  c.eval = [self, n](const std::vector<AlgebraElement>& a) {
    const Matrix& dm = self.D().matrix();
    std::vector<Matrix> w;
    w.reserve(n);
    for (int j = 1; j <= n; ++j) {
      if (a[j].is_unit) return cplx(0, 0);  // [D,1] = 0
      Matrix slot = commutator(dm, a[j].mat);
      if (j == 1 && !a[0].is_unit) slot = a[0].mat * slot;
      w.push_back(std::move(slot));
    }
    return self.bracket(w);
  };
  return c;
}

Cochain b_op(const Cochain& c) {
  Cochain r;
  r.degree = c.degree + 1;
  r.eval = [c](const std::vector<AlgebraElement>& a) {
    const int n = static_cast<int>(a.size()) - 2;  // c takes n+1 args
    cplx acc = 0;
    for (int j = 0; j <= n; ++j) {
      std::vector<AlgebraElement> args;
      args.reserve(n + 1);
      for (int t = 0; t <= n + 1; ++t) {
        if (t == j) {
          AlgebraElement merged = a[j];
          if (a[j].is_unit)
            merged = a[j + 1];
          else if (a[j + 1].is_unit)
            merged = a[j];
          else
            merged = AlgebraElement::wrap(a[j].mat * a[j + 1].mat);
          args.push_back(std::move(merged));
          ++t;  // skip j+1
        } else {
          args.push_back(a[t]);
        }
      }
      acc += ((j % 2 == 0) ? 1.0 : -1.0) * c(args);
    }
    // + (-1)^{n+1} c(a_{n+1} a_0, a_1, .., a_n)
    std::vector<AlgebraElement> last;
    last.reserve(n + 1);
    AlgebraElement merged;
    if (a[n + 1].is_unit)
      merged = a[0];
    else if (a[0].is_unit)
      merged = a[n + 1];
    else
      merged = AlgebraElement::wrap(a[n + 1].mat * a[0].mat);
    last.push_back(std::move(merged));
    for (int t = 1; t <= n; ++t) last.push_back(a[t]);
    acc += (((n + 1) % 2 == 0) ? 1.0 : -1.0) * c(last);
    return acc;
  };
  return r;
}

Cochain B0_op(const Cochain& c) {
  Cochain r;
  r.degree = c.degree - 1;
  if (r.degree < 0) throw contract_error("B0_op: degree underflow");
  r.eval = [c](const std::vector<AlgebraElement>& a) {
    const int dim = a.empty() ? 1 : a[0].mat.dim();
    std::vector<AlgebraElement> args;
    args.reserve(a.size() + 1);
    args.push_back(AlgebraElement::unit(dim));
    args.insert(args.end(), a.begin(), a.end());
    return c(args);
  };
  return r;
}

Cochain B_op(const Cochain& c) {
  // B = A B_0 : cyclic antisymmetrization of B_0
  Cochain b0 = B0_op(c);
  Cochain r;
  r.degree = b0.degree;
  const int n = r.degree;
  r.eval = [b0, n](const std::vector<AlgebraElement>& a) {
    cplx acc = 0;
    for (int j = 0; j <= n; ++j) {
      std::vector<AlgebraElement> rot;
      rot.reserve(n + 1);
      for (int t = 0; t <= n; ++t) rot.push_back(a[(j + t) % (n + 1)]);
      const double sgn = ((n * j) % 2 == 0) ? 1.0 : -1.0;
      acc += sgn * b0(rot);
    }
    return acc;
  };
  return r;
}

Cochain scale(const Cochain& c, cplx s) {
  Cochain r;
  r.degree = c.degree;
  r.eval = [c, s](const std::vector<AlgebraElement>& a) { return s * c(a); };
  return r;
}

Cochain add(const Cochain& x, const Cochain& y) {
  if (x.degree != y.degree) throw contract_error("Cochain add: degree mismatch");
  Cochain r;
  r.degree = x.degree;
  r.eval = [x, y](const std::vector<AlgebraElement>& a) { return x(a) + y(a); };
  return r;
}

Cochain CocycleContext::psi(int k) const {
  if (k < 1) throw contract_error("psi: k must be >= 1");
  return add(phi(2 * k - 1), scale(B0_op(phi(2 * k)), cplx(-0.5, 0)));
}

Cochain CocycleContext::psi_tilde(int k) const {
  const double pref = ((k - 1) % 2 == 0 ? 1.0 : -1.0) * factorial(k - 1) / factorial(2 * k - 1);
  return scale(psi(k), cplx(pref, 0));
}

cplx CocycleContext::integrate(const std::function<Cochain(int)>& family,
                               const UniversalForm& w) const {
  cplx acc = 0;
  for (const auto& m : w.monomials()) {
    Cochain c = family(m.degree());
    std::vector<AlgebraElement> args;
    args.reserve(m.degree() + 1);
    args.push_back(m.head);
    args.insert(args.end(), m.tail.begin(), m.tail.end());
    acc += m.coeff * c(args);
  }
  return acc;
}

cplx CocycleContext::integrate_phi(const UniversalForm& w) const {
  return integrate([this](int deg) { return phi(deg); }, w);
}

cplx CocycleContext::integrate_psi_level(int k, const UniversalForm& w) const {
  cplx acc = 0;
  Cochain p = psi(k);
  for (const auto& m : w.monomials()) {
    if (m.degree() != 2 * k - 1)
      throw contract_error("integrate_psi_level: degree mismatch with psi_{2k-1}");
    std::vector<AlgebraElement> args;
    args.push_back(m.head);
    args.insert(args.end(), m.tail.begin(), m.tail.end());
    acc += m.coeff * p(args);
  }
  return acc;
}

}  // namespace speclab
