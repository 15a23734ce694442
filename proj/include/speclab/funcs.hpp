#pragma once

#include <memory>
#include <vector>

#include "speclab/linalg.hpp"

namespace speclab {

// Scalar test functions with closed-form derivatives up to max_order.
// Families: Gaussian, PolyGaussian p(x)e^{-x^2}, Monomial x^m, RationalU
// (x-i)^m for integer m (also m<0), ComplexExponential e^{i w x}, TrigPoly,
// and Sum/Product composites. Values may be complex.
class TestFunction {
 public:
  static TestFunction gaussian(int max_order = 12);
  // p given by real coefficients, constant term first
  static TestFunction poly_gaussian(std::vector<double> poly, int max_order = 12);
  static TestFunction monomial(int m, int max_order = 12);
  static TestFunction polynomial(std::vector<double> coeffs, int max_order = 12);
  static TestFunction rational_u(int m, int max_order = 12);  // u(x)^m, u(x) = x - i
  static TestFunction complex_exponential(double omega, int max_order = 12);
  static TestFunction trig_poly(std::vector<std::pair<cplx, double>> atoms, int max_order = 12);
  static TestFunction sum(const TestFunction& f, const TestFunction& g);
  static TestFunction product(const TestFunction& f, const TestFunction& g);

  // f * u^m via the product composite (Leibniz derivatives)
  TestFunction weight_by_u(int m) const;
  // g with g^{(k)}(x) = f^{(k+1)}(x); costs one derivative order
  TestFunction derivative_function() const;

  int max_order() const;
  cplx derivative(int k, double x) const;  // k-th derivative at x
  cplx operator()(double x) const { return derivative(0, x); }
  bool real_valued() const;  // true when f maps reals to reals

  // || ((f u^m)^{(k)}) ^hat ||_1 with the convention
  // fhat(x) = (1/2pi) int f(y) e^{-ixy} dy.  PolyGaussian (incl. Gaussian,
  // polynomial factor) only; closed-form transform, adaptive quadrature of
  // the absolute value.
  double fourier_weight_l1(int m, int k, double quad_abs_tol = 1e-8) const;
  bool supports_fourier_weight() const;

  struct Node;  // implementation

 private:
  explicit TestFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Sorted node multiset for divided differences; consecutive nodes within
// cluster_delta are treated as coincident.
struct NodeMultiset {
  std::vector<double> nodes;  // any order on input
};

// Hermite (confluent) divided difference f^[n] on n+1 nodes.
cplx divided_difference(const TestFunction& f, const NodeMultiset& nodes,
                        const Tolerances& tol = default_tols());

// c_{s,n}(f) = sum_{k=0}^{min(s,n)} binom(s,k) ||((f u^{s-k})^{(n-k)})^hat||_1 / (n-k)!
double schatten_seminorm(const TestFunction& f, int s, int n,
                         double quad_abs_tol = 1e-8);

}  // namespace speclab
