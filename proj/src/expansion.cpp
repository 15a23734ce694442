#include "speclab/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace speclab {

namespace {

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// homogeneous polynomial in N counting variables, keyed by exponent vector
struct CountPoly {
  std::map<std::vector<int>, cplx> terms;
};

// N x N matrix with CountPoly entries
struct PolyMat {
  int n = 0;
  std::vector<CountPoly> e;  // row-major

  static PolyMat identity(int n) {
    PolyMat p;
    p.n = n;
    p.e.resize(static_cast<size_t>(n) * n);
    std::vector<int> zero(n, 0);
    for (int i = 0; i < n; ++i) p.e[static_cast<size_t>(i) * n + i].terms[zero] = cplx(1, 0);
    return p;
  }
  CountPoly& at(int i, int j) { return e[static_cast<size_t>(i) * n + j]; }
  const CountPoly& at(int i, int j) const { return e[static_cast<size_t>(i) * n + j]; }
};

// P' = P * (Z * W): (ZW)_{jk} = z_j W_{jk}, so each term of P_{ij} is shifted
// by one unit of z_j and scaled by W_{jk}.
PolyMat fold(const PolyMat& p, const Matrix& w) {
  PolyMat r;
  r.n = p.n;
  r.e.resize(p.e.size());
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) {
      const CountPoly& src = p.at(i, j);
      if (src.terms.empty()) continue;
      for (int k = 0; k < p.n; ++k) {
        const cplx wjk = w(j, k);
        if (wjk == cplx(0, 0)) continue;
        CountPoly& dst = r.at(i, k);
        for (const auto& [expo, c] : src.terms) {
          std::vector<int> e2 = expo;
          e2[j] += 1;
          dst.terms[e2] += c * wjk;
        }
      }
    }
  return r;
}

void add_scaled(PolyMat& dst, const PolyMat& src, cplx s) {
  for (size_t k = 0; k < dst.e.size(); ++k)
    for (const auto& [expo, c] : src.e[k].terms) dst.e[k].terms[expo] += s * c;
}

struct ChainState {
  int form_degree = 0;  // degree of the accumulated form product
  int length = 0;       // number of bracket slots
  Matrix last;          // last slot, not yet folded
  PolyMat prefix;       // product of (Z * slot) over all earlier slots
};

// key: (form_degree, length, monomial id of the letter that produced `last`)
using StateKey = std::tuple<int, int, int>;

cplx evaluate_states(const CocycleContext& ctx, const std::vector<ChainState>& states) {
  const auto& lams = ctx.eig().eigenvalues;
  const int N = static_cast<int>(lams.size());
  cplx total = 0;
  SpectralKernel kernel(lams, ctx.f().derivative_function(), ctx.tol());
  for (const auto& st : states) {
    PolyMat closed = fold(st.prefix, st.last);
    CountPoly tr;
    for (int i = 0; i < N; ++i)
      for (const auto& [expo, c] : closed.at(i, i).terms) tr.terms[expo] += c;
    for (const auto& [expo, c] : tr.terms) {
      if (c == cplx(0, 0)) continue;
      std::vector<int> idx;
      idx.reserve(st.length);
      for (int i = 0; i < N; ++i)
        for (int t = 0; t < expo[i]; ++t) idx.push_back(i);
      total += c * kernel.dd(idx);
    }
  }
  return total;
}

// slots live in the eigenbasis of D so the index sums contract against the
// divided-difference kernel directly
Matrix rotated_slot(const CocycleContext& ctx, const Matrix& m) {
  return ctx.eig().eigenvectors.adjoint() * m * ctx.eig().eigenvectors;
}

std::vector<ChainState> init_states(const CocycleContext& ctx, const UniversalForm& letter) {
  const Matrix& dm = ctx.D().matrix();
  const int N = ctx.dim();
  std::vector<ChainState> states;
  for (const auto& m : letter.monomials()) {
    if (m.degree() == 0) throw contract_error("word letters must have degree >= 1");
    ChainState st;
    st.form_degree = m.degree();
    st.length = m.degree();
    st.prefix = PolyMat::identity(N);
    Matrix first = commutator(dm, m.tail[0].mat);
    if (!m.head.is_unit) first = m.head.mat * first;
    first = rotated_slot(ctx, first);
    if (m.degree() == 1) {
      st.last = std::move(first);
    } else {
      st.prefix = fold(st.prefix, first);
      for (int t = 1; t + 1 < m.degree(); ++t)
        st.prefix = fold(st.prefix, rotated_slot(ctx, commutator(dm, m.tail[t].mat)));
      st.last = rotated_slot(ctx, commutator(dm, m.tail.back().mat));
    }
    // scale prefix by the coefficient
    PolyMat scaled;
    scaled.n = N;
    scaled.e.resize(st.prefix.e.size());
    add_scaled(scaled, st.prefix, m.coeff);
    st.prefix = std::move(scaled);
    states.push_back(std::move(st));
  }
  return states;
}

std::vector<ChainState> extend_states(const CocycleContext& ctx,
                                      const std::vector<ChainState>& states,
                                      const UniversalForm& letter) {
  const Matrix& dm = ctx.D().matrix();
  const int N = ctx.dim();
  std::map<StateKey, ChainState> merged;

  auto deposit = [&](int form_degree, int length, int mono_id, const Matrix& last,
                     const PolyMat& prefix, cplx coeff) {
    StateKey key{form_degree, length, mono_id};
    auto it = merged.find(key);
    if (it == merged.end()) {
      ChainState st;
      st.form_degree = form_degree;
      st.length = length;
      st.last = last;
      st.prefix.n = N;
      st.prefix.e.resize(static_cast<size_t>(N) * N);
      add_scaled(st.prefix, prefix, coeff);
      merged.emplace(std::move(key), std::move(st));
    } else {
      add_scaled(it->second.prefix, prefix, coeff);
    }
  };

  const auto& monos = letter.monomials();
  std::vector<std::vector<Matrix>> tails(monos.size());
  std::vector<Matrix> heads(monos.size());
  for (size_t mu = 0; mu < monos.size(); ++mu) {
    for (int t = 0; t < monos[mu].degree(); ++t)
      tails[mu].push_back(rotated_slot(ctx, commutator(dm, monos[mu].tail[t].mat)));
    if (!monos[mu].head.is_unit) heads[mu] = rotated_slot(ctx, monos[mu].head.mat);
  }

  for (const auto& st : states) {
    for (int mu = 0; mu < static_cast<int>(monos.size()); ++mu) {
      const FormMonomial& m = monos[mu];
      const int h = m.degree();
      if (h == 0) throw contract_error("word letters must have degree >= 1");
      const auto& tail_slots = tails[mu];

      // T1: last <- last * y0, then append [D,y1..yh]
      {
        Matrix boundary = m.head.is_unit ? st.last : st.last * heads[mu];
        PolyMat p = fold(st.prefix, boundary);
        for (int t = 0; t + 1 < h; ++t) p = fold(p, tail_slots[t]);
        deposit(st.form_degree + h, st.length + h, mu, tail_slots.back(), p, m.coeff);
      }
      // T2 (only when the accumulated form degree is even): append [D,y0..yh]
      if (st.form_degree % 2 == 0 && !m.head.is_unit) {
        PolyMat p = fold(st.prefix, st.last);
        p = fold(p, rotated_slot(ctx, commutator(dm, m.head.mat)));
        for (int t = 0; t + 1 < h; ++t) p = fold(p, tail_slots[t]);
        deposit(st.form_degree + h, st.length + h + 1, mu, tail_slots.back(), p, m.coeff);
      }
    }
  }
  std::vector<ChainState> out;
  out.reserve(merged.size());
  for (auto& [k, st] : merged) out.push_back(std::move(st));
  return out;
}

}  // namespace

cplx phi_integral_of_word(const CocycleContext& ctx, const FormWord& word) {
  if (word.empty()) throw contract_error("phi_integral_of_word: empty word");
  for (const auto& letter : word)
    if (letter.empty()) return cplx(0, 0);
  std::vector<ChainState> states = init_states(ctx, word[0]);
  for (size_t j = 1; j < word.size(); ++j) states = extend_states(ctx, states, word[j]);
  return evaluate_states(ctx, states);
}

cplx phi_integral_of_word_differential(const CocycleContext& ctx, const FormWord& word) {
  cplx acc = 0;
  int prefix_degree = 0;
  for (size_t j = 0; j < word.size(); ++j) {
    UniversalForm dj = d(word[j]);
    if (!dj.empty()) {
      FormWord w = word;
      w[j] = dj;
      const double sgn = (prefix_degree % 2 == 0) ? 1.0 : -1.0;
      acc += sgn * phi_integral_of_word(ctx, w);
    }
    prefix_degree += word[j].max_degree();
  }
  return acc;
}

double TkWord::coeff() const {
  int tv = 0, tw = 0;
  for (int x : v) tv += x;
  for (int x : w) tw += x;
  return 1.0 / double(2 * tv + tw + p + 1);
}

int TkWord::a_letters() const {
  int tv = 0;
  for (int x : v) tv += x;
  return 1 + 2 * tv + p;
}

std::vector<TkWord> enumerate_tk(int K) {
  std::vector<TkWord> out;
  // constraints: |v|+|w|+floor(p/2) < K  and  2|v|+|w|+p >= K
  auto admits = [&](int sv, int sw, int p) {
    return sv + sw + p / 2 < K && 2 * sv + sw + p >= K;
  };
  // m = 0: bare A^p word
  for (int p = 0; p <= 2 * K + 1; ++p)
    if (admits(0, 0, p)) out.push_back({{}, {}, p});
  // m >= 1, recursive over (v_i, w_i) blocks
  struct Rec {
    int K;
    std::vector<TkWord>* out;
    void go(std::vector<int> v, std::vector<int> w, int sv, int sw) {
      if (!v.empty()) {
        for (int p = 0; p <= 2 * K + 1; ++p)
          if (sv + sw + p / 2 < K && 2 * sv + sw + p >= K) out->push_back({v, w, p});
      }
      // extend with a new (v_i, w_i) block
      const int vmin = v.empty() ? 0 : 1;
      for (int vi = vmin; sv + vi + sw + 1 < K + 1; ++vi) {
        for (int wi = 1; sv + vi + sw + wi < K; ++wi) {
          auto v2 = v;
          v2.push_back(vi);
          auto w2 = w;
          w2.push_back(wi);
          go(std::move(v2), std::move(w2), sv + vi, sw + wi);
        }
      }
    }
  };
  Rec rec{K, &out};
  rec.go({}, {}, 0, 0);
  if (out.size() > (1ull << (K + 1)))
    throw consistency_error("enumerate_tk: |T_K| exceeds 2^{K+1}");
  return out;
}

namespace {

// cs_{2k-1}(A) and YM_k contributions as words over {A, dA}
struct WordSum {
  std::vector<std::pair<double, FormWord>> items;
};

WordSum cs_words(const UniversalForm& a, const UniversalForm& da, int k) {
  WordSum ws;
  const int nletters = k - 1;
  for (unsigned mask = 0; mask < (1u << nletters); ++mask) {
    FormWord word{a};
    int tdeg = 0;
    for (int j = 0; j < nletters; ++j) {
      if (mask & (1u << j)) {  // A^2 letter, t-degree 2
        word.push_back(a);
        word.push_back(a);
        tdeg += 2;
      } else {  // dA letter, t-degree 1
        word.push_back(da);
        tdeg += 1;
      }
    }
    ws.items.push_back({1.0 / double(tdeg + 1), std::move(word)});
  }
  return ws;
}

WordSum ym_words(const UniversalForm& a, const UniversalForm& da, int k) {
  WordSum ws;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    FormWord word;
    for (int j = 0; j < k; ++j) {
      if (mask & (1u << j)) {
        word.push_back(a);
        word.push_back(a);
      } else {
        word.push_back(da);
      }
    }
    ws.items.push_back({1.0, std::move(word)});
  }
  return ws;
}

cplx eval_word_sum(const CocycleContext& ctx, const WordSum& ws) {
  cplx acc = 0;
  for (const auto& [c, word] : ws.items) acc += c * phi_integral_of_word(ctx, word);
  return acc;
}

cplx eval_word_sum_psi(const CocycleContext& ctx, const WordSum& ws) {
  // int_psi = int_phi - 1/2 int_{B0 phi} = int_phi - 1/2 int_phi d(.)
  cplx acc = 0;
  for (const auto& [c, word] : ws.items) {
    acc += c * phi_integral_of_word(ctx, word);
    acc -= 0.5 * c * phi_integral_of_word_differential(ctx, word);
  }
  return acc;
}

}  // namespace

ExpansionReport expand(const HermitianMatrix& D, const TestFunction& f, const UniversalForm& A,
                       int K, const Tolerances& tol) {
  if (K < 1) throw contract_error("expand: K must be >= 1");
  if (f.max_order() < 2 * K + 2)
    throw contract_error("expand: f must support derivative order 2K+2");
  if (!A.homogeneous(1)) throw contract_error("expand: A must be homogeneous of degree 1");

  const Matrix V = pi_D(A, D);
  if (Matrix::dist(V, V.adjoint()) > tol.unitary_check * std::max(1.0, V.max_abs()))
    throw contract_error("expand: pi_D(A) is not Hermitian");

  ExpansionReport rep;
  rep.K = K;

  CocycleContext ctx(D, f, tol);
  const UniversalForm dA = d(A);

  const cplx tr_d = apply_function(ctx.eig(), [&](double x) { return f(x); }).trace();
  HermitianMatrix dv(D.matrix() + V, tol);
  const cplx tr_dv = apply_function(dv, [&](double x) { return f(x); }, tol).trace();
  rep.lhs = tr_dv - tr_d;

  cplx running = 0;
  for (int k = 1; k <= K; ++k) {
    const cplx cs = eval_word_sum_psi(ctx, cs_words(A, dA, k));
    const cplx ym = eval_word_sum(ctx, ym_words(A, dA, k)) / double(2 * k);
    rep.cs_terms.push_back(cs);
    rep.ym_terms.push_back(ym);
    running += cs + ym;
    rep.partial.push_back(running);
  }
  rep.remainder_direct = rep.lhs - rep.partial.back();

  // remainder via Prop on the K-th remainder: MOI tail minus the T_K words
  std::vector<HermitianMatrix> ops;
  ops.push_back(dv);
  for (int j = 0; j <= K; ++j) ops.push_back(HermitianMatrix(D.matrix(), tol));
  MoiContext mctx(std::move(ops), f, tol);
  const cplx tail = moi_operator(mctx, std::vector<Matrix>(K + 1, V)).trace();

  auto tk = enumerate_tk(K);
  rep.tk_size = tk.size();
  cplx words = 0;
  for (const auto& t : tk) {
    FormWord word{A};
    if (!t.v.empty()) {
      for (size_t i = 0; i < t.v.size(); ++i) {
        for (int r = 0; r < 2 * t.v[i]; ++r) word.push_back(A);
        for (int r = 0; r < t.w[i]; ++r) word.push_back(dA);
      }
    }
    for (int r = 0; r < t.p; ++r) word.push_back(A);
    words += t.coeff() * phi_integral_of_word(ctx, word);
  }
  rep.remainder_formula = tail - words;

  rep.scale = std::max(1.0, std::abs(rep.lhs));
  for (int k = 0; k < K; ++k)
    rep.scale = std::max({rep.scale, std::abs(rep.cs_terms[k]), std::abs(rep.ym_terms[k])});
  rep.remainders_agree =
      std::abs(rep.remainder_direct - rep.remainder_formula) <= tol.expansion_remainder * rep.scale;
  return rep;
}

GaugeReport gauge_invariance_report(const HermitianMatrix& D, const TestFunction& f,
                                    const UniversalForm& A, const Matrix& U, int K,
                                    const Tolerances& tol) {
  GaugeReport rep{};
  CocycleContext ctx(D, f, tol);

  const Matrix V = pi_D(A, D);
  HermitianMatrix dv(D.matrix() + V, tol);
  const cplx tr1 = apply_function(dv, [&](double x) { return f(x); }, tol).trace();
  HermitianMatrix conj(U * dv.matrix() * U.adjoint(), tol);
  const cplx tr2 = apply_function(conj, [&](double x) { return f(x); }, tol).trace();
  rep.total_trace_diff = std::abs(tr1 - tr2);

  const UniversalForm AU = gauge_transform(A, U, tol);
  const UniversalForm dA = d(A), dAU = d(AU);
  for (int k = 1; k <= K; ++k) {
    const cplx ym = eval_word_sum(ctx, ym_words(A, dA, k)) / double(2 * k);
    const cplx ymu = eval_word_sum(ctx, ym_words(AU, dAU, k)) / double(2 * k);
    rep.ym_diffs.push_back(std::abs(ym - ymu));
    const cplx cs = eval_word_sum_psi(ctx, cs_words(A, dA, k));
    const cplx csu = eval_word_sum_psi(ctx, cs_words(AU, dAU, k));
    rep.cs_diffs.push_back(csu - cs);
  }
  return rep;
}

K1PairingReport k1_pairing_truncation(const HermitianMatrix& D, const TestFunction& f,
                                      const Matrix& U, int k_max, const Tolerances& tol) {
  const Matrix uu = U * U.adjoint();
  if (Matrix::dist(uu, Matrix::identity(U.dim())) > tol.unitary_check)
    throw contract_error("k1_pairing_truncation: U not unitary");
  CocycleContext ctx(D, f, tol);
  K1PairingReport rep;
  cplx run = 0;
  for (int k = 0; k <= k_max; ++k) {
    Cochain psi = ctx.psi(k + 1);  // psi_{2k+1}
    std::vector<AlgebraElement> args;
    for (int t = 0; t <= 2 * k + 1; ++t)
      args.push_back(AlgebraElement::wrap(t % 2 == 0 ? U.adjoint() : U));
    const double pref = factorial(k) * factorial(k) / factorial(2 * k + 1);
    const cplx term = pref * psi(args);
    rep.terms.push_back(term);
    run += term;
    rep.partial_sums.push_back(run);
  }
  return rep;
}

}  // namespace speclab
