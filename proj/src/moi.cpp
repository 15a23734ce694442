#include "speclab/moi.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

Matrix to_eigenbasis(const EigenSystem& left, const Matrix& v, const EigenSystem& right) {
  // <phi^L_i | V | phi^R_j>
  return left.eigenvectors.adjoint() * v * right.eigenvectors;
}

bool same_spectra(const std::vector<EigenSystem>& eigs) {
  for (size_t j = 1; j < eigs.size(); ++j)
    if (eigs[j].eigenvalues != eigs[0].eigenvalues) return false;
  return true;
}

}  // namespace

MoiContext::MoiContext(std::vector<HermitianMatrix> ops, TestFunction f, const Tolerances& tol)
    : ops_(std::move(ops)), f_(std::move(f)), tol_(tol) {
  if (ops_.empty()) throw contract_error("MoiContext: needs at least one operator");
  for (const auto& h : ops_)
    if (h.dim() != ops_.front().dim()) throw contract_error("MoiContext: dim mismatch");
  if (order() > f_.max_order())
    throw contract_error("MoiContext: order exceeds f.max_derivative_order");
  eigs_.reserve(ops_.size());
  for (const auto& h : ops_) eigs_.push_back(eigh(h, tol_));
}

MoiContext::MoiContext(const HermitianMatrix& h, int order, TestFunction f, const Tolerances& tol)
    : f_(std::move(f)), tol_(tol) {
  if (order < 0) throw contract_error("MoiContext: negative order");
  if (order > f_.max_order())
    throw contract_error("MoiContext: order exceeds f.max_derivative_order");
  ops_.assign(order + 1, h);
  EigenSystem es = eigh(h, tol_);
  eigs_.assign(order + 1, es);
}

SpectralKernel::SpectralKernel(std::vector<double> eigenvalues, TestFunction f,
                               const Tolerances& tol)
    : lams_(std::move(eigenvalues)), f_(std::move(f)), tol_(tol) {}

cplx SpectralKernel::dd(const std::vector<int>& idx) const {
  std::vector<int> key = idx;
  std::sort(key.begin(), key.end());
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  NodeMultiset nodes;
  nodes.nodes.reserve(key.size());
  for (int i : key) nodes.nodes.push_back(lams_[i]);
  const cplx v = divided_difference(f_, nodes, tol_);
  memo_.emplace(std::move(key), v);
  return v;
}

Matrix moi_operator(const MoiContext& ctx, const std::vector<Matrix>& v) {
  const int n = ctx.order();
  const int N = ctx.dim();
  if (static_cast<int>(v.size()) != n) throw contract_error("moi_operator: slot count mismatch");
  for (const auto& m : v)
    if (m.dim() != N) throw contract_error("moi_operator: dimension mismatch");
  if (N > 8 || n > 5)
    throw size_error("moi_operator: outside supported envelope (dim <= 8, n <= 5)");

  if (n == 0) return apply_function(ctx.eig(0), [&](double x) { return ctx.f()(x); });

  std::vector<Matrix> w;
  w.reserve(n);
  for (int j = 0; j < n; ++j) w.push_back(to_eigenbasis(ctx.eig(j), v[j], ctx.eig(j + 1)));

  std::vector<EigenSystem> eigs;
  for (int j = 0; j <= n; ++j) eigs.push_back(ctx.eig(j));
  const bool equal = same_spectra(eigs);
  SpectralKernel kernel(ctx.eig(0).eigenvalues, ctx.f(), ctx.tol());

  Matrix r(N);
  std::vector<int> idx(n + 1, 0);
  NodeMultiset nodes;
  nodes.nodes.resize(n + 1);
  while (true) {
    cplx prod(1, 0);
    for (int t = 0; t < n; ++t) {
      prod *= w[t](idx[t], idx[t + 1]);
      if (prod == cplx(0, 0)) break;
    }
    if (prod != cplx(0, 0)) {
      cplx k;
      if (equal) {
        k = kernel.dd(idx);
      } else {
        for (int t = 0; t <= n; ++t) nodes.nodes[t] = ctx.eig(t).eigenvalues[idx[t]];
        k = divided_difference(ctx.f(), nodes, ctx.tol());
      }
      r(idx[0], idx[n]) += k * prod;
    }
    int t = n;
    while (t >= 0 && ++idx[t] == N) idx[t--] = 0;
    if (t < 0) break;
  }
  return ctx.eig(0).eigenvectors * r * ctx.eig(n).eigenvectors.adjoint();
}

namespace {

// wrap-around sum: sum_{i_1..i_n} f^[n](l_{i_1},..,l_{i_n},l_{i_1}) prod (W_t)_{i_t i_{t+1}}
// kernel must hold f itself; W's in the eigenbasis
cplx trace_wraparound(int N, const SpectralKernel& f_kernel, const std::vector<Matrix>& w,
                      double* max_term = nullptr) {
  const int n = static_cast<int>(w.size());
  cplx acc = 0;
  std::vector<int> idx(n, 0);
  std::vector<int> key(n + 1);
  while (true) {
    cplx prod(1, 0);
    for (int t = 0; t < n; ++t) {
      prod *= w[t](idx[t], idx[(t + 1) % n]);
      if (prod == cplx(0, 0)) break;
    }
    if (prod != cplx(0, 0)) {
      for (int t = 0; t < n; ++t) key[t] = idx[t];
      key[n] = idx[0];
      const cplx term = f_kernel.dd(key) * prod;
      acc += term;
      if (max_term) *max_term = std::max(*max_term, std::abs(term));
    }
    int t = n - 1;
    while (t >= 0 && ++idx[t] == N) idx[t--] = 0;
    if (t < 0) break;
  }
  return acc;
}

// (f')-form: sum_{i_1..i_n} (f')^[n-1](l_{i_1},..,l_{i_n}) prod (W_t)_{i_t i_{t+1}}
cplx trace_fprime(int N, const SpectralKernel& fp_kernel, const std::vector<Matrix>& w,
                  double* max_term = nullptr) {
  const int n = static_cast<int>(w.size());
  cplx acc = 0;
  std::vector<int> idx(n, 0);
  while (true) {
    cplx prod(1, 0);
    for (int t = 0; t < n; ++t) {
      prod *= w[t](idx[t], idx[(t + 1) % n]);
      if (prod == cplx(0, 0)) break;
    }
    if (prod != cplx(0, 0)) {
      const cplx term = fp_kernel.dd(idx) * prod;
      acc += term;
      if (max_term) *max_term = std::max(*max_term, std::abs(term));
    }
    int t = n - 1;
    while (t >= 0 && ++idx[t] == N) idx[t--] = 0;
    if (t < 0) break;
  }
  return acc;
}

size_t pow_sz(int b, int e) {
  size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<size_t>(b);
  return r;
}

}  // namespace

cplx trace_moi(const MoiContext& ctx, const std::vector<Matrix>& v) {
  const int n = ctx.order();
  const int N = ctx.dim();
  if (n < 1) throw contract_error("trace_moi: order must be >= 1");
  if (static_cast<int>(v.size()) != n) throw contract_error("trace_moi: slot count mismatch");
  for (int j = 1; j <= n; ++j)
    if (Matrix::dist(ctx.op(j).matrix(), ctx.op(0).matrix()) != 0.0)
      throw contract_error("trace_moi: all slots must carry the same operator");
  if (pow_sz(N, n) * static_cast<size_t>(n + 1) > 100000000ull)
    throw size_error("trace_moi: estimated term count too large");

  std::vector<Matrix> w;
  for (int j = 0; j < n; ++j) w.push_back(to_eigenbasis(ctx.eig(0), v[j], ctx.eig(0)));

  SpectralKernel f_kernel(ctx.eig(0).eigenvalues, ctx.f(), ctx.tol());
  SpectralKernel fp_kernel(ctx.eig(0).eigenvalues, ctx.f().derivative_function(), ctx.tol());

  double max_term = 1.0;
  const cplx wrap = trace_wraparound(N, f_kernel, w, &max_term);

  // rotation-sum identity: sum over cyclic rotations of the wrap-around sum
  // equals the single (f')-weighted sum
  cplx rot_sum = wrap;
  for (int r = 1; r < n; ++r) {
    std::vector<Matrix> wr;
    for (int t = 0; t < n; ++t) wr.push_back(w[(r + t) % n]);
    rot_sum += trace_wraparound(N, f_kernel, wr, &max_term);
  }
  const cplx fprime = trace_fprime(N, fp_kernel, w, &max_term);
  if (std::abs(rot_sum - fprime) > ctx.tol().moi_consistency * max_term)
    throw consistency_error("trace_moi: wrap-around and (f')-form disagree by " +
                            std::to_string(std::abs(rot_sum - fprime)));
  return wrap;
}

cplx bracket(const HermitianMatrix& d, const TestFunction& f, const std::vector<Matrix>& v,
             const Tolerances& tol) {
  const int n = static_cast<int>(v.size());
  if (n < 1) throw contract_error("bracket: needs at least one argument");
  const int N = d.dim();
  if (pow_sz(N, n) * static_cast<size_t>(n + 1) > 100000000ull)
    throw size_error("bracket: estimated term count too large");
  EigenSystem es = eigh(d, tol);
  std::vector<Matrix> w;
  for (const auto& m : v) w.push_back(to_eigenbasis(es, m, es));

  SpectralKernel f_kernel(es.eigenvalues, f, tol);
  SpectralKernel fp_kernel(es.eigenvalues, f.derivative_function(), tol);

  double max_term = 1.0;
  cplx rot_sum = 0;
  for (int r = 0; r < n; ++r) {
    std::vector<Matrix> wr;
    for (int t = 0; t < n; ++t) wr.push_back(w[(r + t) % n]);
    rot_sum += trace_wraparound(N, f_kernel, wr, &max_term);
  }
  const cplx fprime = trace_fprime(N, fp_kernel, w, &max_term);
  if (std::abs(rot_sum - fprime) > tol.bracket_consistency * max_term)
    throw consistency_error("bracket: rotation sum and (f')-form disagree by " +
                            std::to_string(std::abs(rot_sum - fprime)));
  return rot_sum;
}

cplx bracket_cached(const EigenSystem& es, const SpectralKernel& fprime_kernel,
                    const std::vector<Matrix>& v) {
  const int N = es.eigenvectors.dim();
  std::vector<Matrix> w;
  for (const auto& m : v) w.push_back(to_eigenbasis(es, m, es));
  return trace_fprime(N, fprime_kernel, w);
}

cplx derivative_of_trace(const HermitianMatrix& h, const Matrix& v, const TestFunction& f, int n,
                         const Tolerances& tol) {
  MoiContext ctx(h, n, f, tol);
  return trace_moi(ctx, std::vector<Matrix>(n, v));
}

RemainderPair taylor_remainder(const HermitianMatrix& h, const HermitianMatrix& v,
                               const TestFunction& f, int n, const Tolerances& tol) {
  if (n < 1) throw contract_error("taylor_remainder: n must be >= 1");
  RemainderPair out{Matrix(h.dim()), Matrix(h.dim())};

  HermitianMatrix hv(h.matrix() + v.matrix(), tol);
  Matrix direct = apply_function(hv, [&](double x) { return f(x); }, tol);
  for (int k = 0; k < n; ++k) {
    MoiContext ctx(h, k, f, tol);
    direct -= moi_operator(ctx, std::vector<Matrix>(k, v.matrix()));
  }
  out.direct = direct;

  std::vector<HermitianMatrix> ops;
  ops.push_back(hv);
  for (int j = 0; j < n; ++j) ops.push_back(h);
  MoiContext ctx(std::move(ops), f, tol);
  out.moi_form = moi_operator(ctx, std::vector<Matrix>(n, v.matrix()));
  return out;
}

ChangeOfVariablesPair change_of_variables(const MoiContext& ctx, const std::vector<Matrix>& v) {
  const int n = ctx.order();
  if (n < 1) throw contract_error("change_of_variables: order must be >= 1");
  ChangeOfVariablesPair out{moi_operator(ctx, v), Matrix(ctx.dim())};

  // resolvents R_j = (H_j - i)^{-1}, j = 1..n
  std::vector<Matrix> res;
  res.push_back(Matrix::identity(ctx.dim()));  // unused slot 0
  for (int j = 1; j <= n; ++j) res.push_back(resolvent_at_i(ctx.eig(j)));

  // Vt(j,l) = V_{j+1} R_{j+1} ... V_l R_l  (identity when j == l)
  auto vtilde = [&](int j, int l) {
    Matrix m = Matrix::identity(ctx.dim());
    for (int t = j + 1; t <= l; ++t) m = m * v[t - 1] * res[t];
    return m;
  };

  Matrix rhs(ctx.dim());
  // subsets 0 < j_1 < ... < j_p <= n via bitmask over {1..n}
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> js;
    for (int b = 0; b < n; ++b)
      if (mask & (1u << b)) js.push_back(b + 1);
    const int p = static_cast<int>(js.size());
    const double sign = ((n - p) % 2 == 0) ? 1.0 : -1.0;

    Matrix term(ctx.dim());
    if (p == 0) {
      term = apply_function(ctx.eig(0), [&](double x) { return ctx.f()(x); });
    } else {
      std::vector<HermitianMatrix> ops;
      ops.push_back(ctx.op(0));
      for (int t : js) ops.push_back(ctx.op(t));
      MoiContext sub(std::move(ops), ctx.f().weight_by_u(p), ctx.tol());
      std::vector<Matrix> args;
      int prev = 0;
      for (int t : js) {
        args.push_back(vtilde(prev, t));
        prev = t;
      }
      term = moi_operator(sub, args);
    }
    rhs += cplx(sign, 0) * (term * vtilde(js.empty() ? 0 : js.back(), n));
  }
  out.rhs = rhs;
  return out;
}

SchattenBoundReport schatten_bound_check(const HermitianMatrix& d, const TestFunction& f,
                                         const std::vector<Matrix>& v, int s,
                                         const Tolerances& tol) {
  if (!f.supports_fourier_weight())
    throw contract_error("schatten_bound_check: PolyGaussian f required");
  const int n = static_cast<int>(v.size());
  MoiContext ctx(d, n, f, tol);
  SchattenBoundReport rep{};
  rep.lhs = trace_norm(moi_operator(ctx, v), tol);
  rep.seminorm = schatten_seminorm(f, s, n, tol.quadrature_abs);
  double prod = 1.0;
  for (const auto& m : v) prod *= operator_norm(m, tol);
  double res_s = 0.0;
  for (double lam : ctx.eig(0).eigenvalues) res_s += std::pow(lam * lam + 1.0, -0.5 * s);
  rep.rhs = rep.seminorm * prod * res_s;
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-12);
  return rep;
}

}  // namespace speclab
