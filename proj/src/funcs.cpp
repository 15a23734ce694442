#include "speclab/funcs.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

// dense complex polynomial helpers, coefficient 0 first
using Poly = std::vector<cplx>;

Poly poly_derive(const Poly& p) {
  if (p.size() <= 1) return {cplx(0, 0)};
  Poly d(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * cplx(double(i), 0);
  return d;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, cplx(0, 0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

cplx poly_eval(const Poly& p, cplx x) {
  cplx r = 0;
  for (size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

Poly poly_add_scaled(const Poly& a, const Poly& b, cplx s) {
  Poly r(std::max(a.size(), b.size()), cplx(0, 0));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += s * b[i];
  return r;
}

cplx ipow(cplx z, int m) {
  if (m == 0) return cplx(1, 0);
  if (m < 0) return 1.0 / ipow(z, -m);
  cplx r(1, 0), b = z;
  int e = m;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// unit panels keep the adaptive rule from overlooking localized mass
double integrate_abs(const std::function<double(double)>& f, double a, double b, double tol) {
  const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
  const double w = (b - a) / panels;
  const double ptol = tol / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * w, x1 = a + (p + 1) * w;
    const double m = 0.5 * (x0 + x1);
    const double fa = f(x0), fm = f(m), fb = f(x1);
    const double whole = (x1 - x0) / 6.0 * (fa + 4 * fm + fb);
    total += adaptive_simpson(f, x0, x1, fa, fm, fb, whole, ptol, 36);
  }
  return total;
}

}  // namespace

struct TestFunction::Node {
  enum class Kind { PolyGaussian, Polynomial, RationalU, TrigSum, Sum, Product, DerivShift };
  Kind kind;
  int max_order = 12;
  std::vector<Poly> pg_derivs;  // PolyGaussian: q_k with f^{(k)} = q_k(x) e^{-x^2}
  Poly poly;                    // Polynomial
  int u_exp = 0;                // RationalU
  std::vector<std::pair<cplx, double>> atoms;
  std::shared_ptr<const Node> left, right;
  int shift = 0;  // DerivShift

  cplx deriv(int k, double x) const {
    switch (kind) {
      case Kind::PolyGaussian:
        return poly_eval(pg_derivs[k], cplx(x, 0)) * std::exp(-x * x);
      case Kind::Polynomial: {
        cplx r = 0;
        for (size_t j = k; j < poly.size(); ++j) {
          double fall = 1;
          for (int i = 0; i < k; ++i) fall *= double(j - i);
          r += poly[j] * fall * ipow(cplx(x, 0), int(j) - k);
        }
        return r;
      }
      case Kind::RationalU: {
        double fall = 1;
        for (int i = 0; i < k; ++i) fall *= double(u_exp - i);
        return fall * ipow(cplx(x, -1.0), u_exp - k);
      }
      case Kind::TrigSum: {
        cplx r = 0;
        for (const auto& [c, w] : atoms) r += c * ipow(cplx(0, w), k) * std::exp(cplx(0, w * x));
        return r;
      }
      case Kind::Sum:
        return left->deriv(k, x) + right->deriv(k, x);
      case Kind::Product: {
        cplx r = 0;
        for (int j = 0; j <= k; ++j) r += binom(k, j) * left->deriv(j, x) * right->deriv(k - j, x);
        return r;
      }
      case Kind::DerivShift:
        return left->deriv(k + shift, x);
    }
    return 0;
  }

  bool real_valued() const {
    switch (kind) {
      case Kind::PolyGaussian:
        return true;
      case Kind::Polynomial:
        return std::all_of(poly.begin(), poly.end(), [](cplx c) { return c.imag() == 0.0; });
      case Kind::RationalU:
        return u_exp == 0;
      case Kind::TrigSum: {
        // closed under (c,w) -> (conj c, -w)
        for (const auto& [c, w] : atoms) {
          cplx acc = 0;
          for (const auto& [c2, w2] : atoms)
            if (std::abs(w2 + w) < 1e-14) acc += c2;
          if (std::abs(acc - std::conj(c)) > 1e-12 * (1.0 + std::abs(c))) return false;
        }
        return true;
      }
      case Kind::Sum:
      case Kind::Product:
        return left->real_valued() && right->real_valued();
      case Kind::DerivShift:
        return left->real_valued();
    }
    return false;
  }
};

static std::shared_ptr<TestFunction::Node> make_node() {
  return std::make_shared<TestFunction::Node>();
}

TestFunction TestFunction::gaussian(int max_order) { return poly_gaussian({1.0}, max_order); }

TestFunction TestFunction::poly_gaussian(std::vector<double> poly, int max_order) {
  auto n = make_node();
  n->kind = Node::Kind::PolyGaussian;
  n->max_order = max_order;
  Poly q(poly.size());
  for (size_t i = 0; i < poly.size(); ++i) q[i] = poly[i];
  n->pg_derivs.push_back(q);
  for (int k = 0; k < max_order; ++k) {
    // q_{k+1} = q_k' - 2x q_k
    Poly next = poly_add_scaled(poly_derive(n->pg_derivs.back()),
                                poly_mul({cplx(0, 0), cplx(1, 0)}, n->pg_derivs.back()),
                                cplx(-2, 0));
    n->pg_derivs.push_back(next);
  }
  return TestFunction(n);
}

TestFunction TestFunction::monomial(int m, int max_order) {
  std::vector<double> c(m + 1, 0.0);
  c[m] = 1.0;
  return polynomial(std::move(c), max_order);
}

TestFunction TestFunction::polynomial(std::vector<double> coeffs, int max_order) {
  auto n = make_node();
  n->kind = Node::Kind::Polynomial;
  n->max_order = max_order;
  n->poly.assign(coeffs.begin(), coeffs.end());
  if (n->poly.empty()) n->poly = {cplx(0, 0)};
  return TestFunction(n);
}

TestFunction TestFunction::rational_u(int m, int max_order) {
  auto n = make_node();
  n->kind = Node::Kind::RationalU;
  n->max_order = max_order;
  n->u_exp = m;
  return TestFunction(n);
}

TestFunction TestFunction::complex_exponential(double omega, int max_order) {
  return trig_poly({{cplx(1, 0), omega}}, max_order);
}

TestFunction TestFunction::trig_poly(std::vector<std::pair<cplx, double>> atoms, int max_order) {
  auto n = make_node();
  n->kind = Node::Kind::TrigSum;
  n->max_order = max_order;
  n->atoms = std::move(atoms);
  return TestFunction(n);
}

TestFunction TestFunction::sum(const TestFunction& f, const TestFunction& g) {
  auto n = make_node();
  n->kind = Node::Kind::Sum;
  n->max_order = std::min(f.max_order(), g.max_order());
  n->left = f.node_;
  n->right = g.node_;
  return TestFunction(n);
}

TestFunction TestFunction::product(const TestFunction& f, const TestFunction& g) {
  auto n = make_node();
  n->kind = Node::Kind::Product;
  n->max_order = std::min(f.max_order(), g.max_order());
  n->left = f.node_;
  n->right = g.node_;
  return TestFunction(n);
}

TestFunction TestFunction::weight_by_u(int m) const {
  if (m < 0) throw contract_error("weight_by_u: m must be >= 0");
  if (m == 0) return *this;
  return product(*this, rational_u(m, max_order()));
}

TestFunction TestFunction::derivative_function() const {
  auto n = make_node();
  n->kind = Node::Kind::DerivShift;
  n->max_order = max_order() - 1;
  n->left = node_;
  n->shift = 1;
  if (n->max_order < 0) throw contract_error("derivative_function: order exhausted");
  return TestFunction(n);
}

int TestFunction::max_order() const { return node_->max_order; }

cplx TestFunction::derivative(int k, double x) const {
  if (k < 0 || k > max_order())
    throw contract_error("TestFunction::derivative: order " + std::to_string(k) +
                         " out of range (max " + std::to_string(max_order()) + ")");
  return node_->deriv(k, x);
}

bool TestFunction::real_valued() const { return node_->real_valued(); }

bool TestFunction::supports_fourier_weight() const {
  return node_->kind == Node::Kind::PolyGaussian;
}

// f u^m = q(y) e^{-y^2} with q complex; its transform is P(x) e^{-x^2/4}
// with P assembled from int y^j e^{-y^2} e^{-ixy} dy = i^j d^j/dx^j (sqrt(pi) e^{-x^2/4}).
double TestFunction::fourier_weight_l1(int m, int k, double quad_abs_tol) const {
  if (!supports_fourier_weight())
    throw contract_error("fourier_weight_l1: PolyGaussian family required");
  Poly q = node_->pg_derivs[0];
  for (int i = 0; i < m; ++i) q = poly_mul(q, {cplx(0, -1), cplx(1, 0)});  // * (y - i)

  // r_j with d^j/dx^j e^{-x^2/4} = r_j(x) e^{-x^2/4}
  std::vector<Poly> r{{cplx(1, 0)}};
  for (size_t j = 1; j < q.size(); ++j)
    r.push_back(poly_add_scaled(poly_derive(r.back()),
                                poly_mul({cplx(0, 0), cplx(1, 0)}, r.back()), cplx(-0.5, 0)));

  const double spi = std::sqrt(M_PI) / (2.0 * M_PI);
  Poly P{cplx(0, 0)};
  for (size_t j = 0; j < q.size(); ++j)
    P = poly_add_scaled(P, r[j], spi * q[j] * ipow(cplx(0, 1), int(j)));

  auto integrand = [&](double x) {
    return std::pow(std::abs(x), k) * std::abs(poly_eval(P, cplx(x, 0))) * std::exp(-x * x / 4);
  };
  const double L = 40.0;
  return integrate_abs(integrand, -L, 0.0, quad_abs_tol / 2) +
         integrate_abs(integrand, 0.0, L, quad_abs_tol / 2);
}

cplx divided_difference(const TestFunction& f, const NodeMultiset& nodes, const Tolerances& tol) {
  const int n = static_cast<int>(nodes.nodes.size()) - 1;
  if (n < 0) throw contract_error("divided_difference: empty node set");
  if (n > f.max_order()) throw contract_error("divided_difference: order exceeds max_derivative_order");

  std::vector<double> z = nodes.nodes;
  std::sort(z.begin(), z.end());
  // chain-cluster nodes within cluster_delta, substitute cluster means
  size_t i = 0;
  while (i < z.size()) {
    size_t j = i + 1;
    while (j < z.size() && z[j] - z[j - 1] <= tol.cluster_delta) ++j;
    double mean = 0;
    for (size_t t = i; t < j; ++t) mean += z[t];
    mean /= double(j - i);
    for (size_t t = i; t < j; ++t) z[t] = mean;
    i = j;
  }

  // Hermite table, row = current order
  std::vector<cplx> dd(z.size());
  for (size_t t = 0; t < z.size(); ++t) dd[t] = f.derivative(0, z[t]);
  std::vector<cplx> prev;
  for (int order = 1; order <= n; ++order) {
    prev = dd;
    for (size_t t = 0; t + order < z.size(); ++t) {
      if (z[t] == z[t + order])
        dd[t] = f.derivative(order, z[t]) / factorial(order);
      else
        dd[t] = (prev[t + 1] - prev[t]) / (z[t + order] - z[t]);
    }
    dd.resize(z.size() - order);
  }
  return dd[0];
}

double schatten_seminorm(const TestFunction& f, int s, int n, double quad_abs_tol) {
  double c = 0;
  for (int k = 0; k <= std::min(s, n); ++k)
    c += binom(s, k) * f.fourier_weight_l1(s - k, n - k, quad_abs_tol) / factorial(n - k);
  return c;
}

}  // namespace speclab
