#pragma once

#include "speclab/moi.hpp"

namespace speclab {

// Piecewise-constant function with compact support; holds eta_1.
struct SteppedFunction {
  std::vector<double> breakpoints;  // ascending
  std::vector<int> values;          // values.size() == breakpoints.size() + 1, first/last 0

  int value_at(double x) const;
  // exact integral of (x -> weight'(x)) against the steps by telescoping:
  // int f' eta = sum over intervals eta * (f(b_right) - f(b_left))
  double integrate_against_derivative(const std::function<double(double)>& f) const;
  // int |eta(x)| (1+|x|)^{-1-eps} dx, exact closed form per interval
  double weighted_abs_integral(double eps) const;
};

// eta_1(x) = #{eigs(H) <= x} - #{eigs(H+V) <= x}
SteppedFunction eta_one(const HermitianMatrix& h, const HermitianMatrix& v,
                        const Tolerances& tol = default_tols());

struct TraceFormulaReport {
  double lhs = 0;       // n=1: Tr(f(H+V)-f(H)); n>=2: Tr of remainder path A
  double rhs = 0;       // n=1: exact int f' eta_1 ; n>=2: Tr of remainder path B
  double residual = 0;  // |lhs - rhs|
  double scale = 1;
};
TraceFormulaReport trace_formula_check(const HermitianMatrix& h, const HermitianMatrix& v,
                                       const TestFunction& f, int n,
                                       const Tolerances& tol = default_tols());

// Schatten p-norm of V (H-i)^{-1}
double relative_schatten_norm(const HermitianMatrix& h, const Matrix& v, double p,
                              const Tolerances& tol = default_tols());

}  // namespace speclab
