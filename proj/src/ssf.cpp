#include "speclab/ssf.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

int SteppedFunction::value_at(double x) const {
  int idx = 0;
  while (idx < static_cast<int>(breakpoints.size()) && x >= breakpoints[idx]) ++idx;
  return values[idx];
}

double SteppedFunction::integrate_against_derivative(const std::function<double(double)>& f) const {
  // eta vanishes outside [b_first, b_last]; telescope f across breakpoints
  double acc = 0;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
    acc += values[i + 1] * (f(breakpoints[i + 1]) - f(breakpoints[i]));
  return acc;
}

namespace {
// int_a^b (1+|x|)^{-1-eps} dx, exact
double weight_integral(double a, double b, double eps) {
  auto prim_pos = [&](double x) { return -std::pow(1.0 + x, -eps) / eps; };   // x >= 0
  auto prim_neg = [&](double x) { return std::pow(1.0 - x, -eps) / eps; };    // x <= 0
  if (a >= 0) return prim_pos(b) - prim_pos(a);
  if (b <= 0) return prim_neg(b) - prim_neg(a);
  return (prim_neg(0) - prim_neg(a)) + (prim_pos(b) - prim_pos(0));
}
}  // namespace

double SteppedFunction::weighted_abs_integral(double eps) const {
  double acc = 0;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
    acc += std::abs(values[i + 1]) * weight_integral(breakpoints[i], breakpoints[i + 1], eps);
  return acc;
}

SteppedFunction eta_one(const HermitianMatrix& h, const HermitianMatrix& v,
                        const Tolerances& tol) {
  if (h.dim() != v.dim()) throw contract_error("eta_one: dim mismatch");
  std::vector<double> lam_h = eigh(h, tol).eigenvalues;
  HermitianMatrix hv(h.matrix() + v.matrix(), tol);
  std::vector<double> lam_hv = eigh(hv, tol).eigenvalues;

  SteppedFunction eta;
  eta.breakpoints = lam_h;
  eta.breakpoints.insert(eta.breakpoints.end(), lam_hv.begin(), lam_hv.end());
  std::sort(eta.breakpoints.begin(), eta.breakpoints.end());
  eta.breakpoints.erase(std::unique(eta.breakpoints.begin(), eta.breakpoints.end()),
                        eta.breakpoints.end());

  auto count_leq = [](const std::vector<double>& lam, double x) {
    return int(std::upper_bound(lam.begin(), lam.end(), x) - lam.begin());
  };
  eta.values.push_back(0);  // left of all breakpoints
  for (double b : eta.breakpoints) eta.values.push_back(count_leq(lam_h, b) - count_leq(lam_hv, b));
  return eta;
}

TraceFormulaReport trace_formula_check(const HermitianMatrix& h, const HermitianMatrix& v,
                                       const TestFunction& f, int n, const Tolerances& tol) {
  TraceFormulaReport rep;
  if (n == 1) {
    HermitianMatrix hv(h.matrix() + v.matrix(), tol);
    const cplx tr = apply_function(hv, [&](double x) { return f(x); }, tol).trace() -
                    apply_function(h, [&](double x) { return f(x); }, tol).trace();
    rep.lhs = tr.real();
    SteppedFunction eta = eta_one(h, v, tol);
    rep.rhs = eta.integrate_against_derivative([&](double x) { return f(x).real(); });
  } else {
    auto pair = taylor_remainder(h, v, f, n, tol);
    rep.lhs = pair.direct.trace().real();
    rep.rhs = pair.moi_form.trace().real();
  }
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.scale = std::max({1.0, std::abs(rep.lhs), std::abs(rep.rhs)});
  return rep;
}

double relative_schatten_norm(const HermitianMatrix& h, const Matrix& v, double p,
                              const Tolerances& tol) {
  if (p < 1) throw contract_error("relative_schatten_norm: p must be >= 1");
  Matrix vr = v * resolvent_at_i(eigh(h, tol));
  const auto sv = singular_values(vr, tol);
  double acc = 0;
  for (double s : sv) acc += std::pow(s, p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace speclab
