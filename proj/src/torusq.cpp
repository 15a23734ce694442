#include "speclab/torusq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace speclab {

// -------------------------------------------------------------- refinements

int Refinement::fine_dim() const {
  int n = static_cast<int>(added_lengths.size());
  for (const auto& s : splits) n += static_cast<int>(s.size());
  return n;
}

void Refinement::validate(const Lattice& coarse) const {
  if (coarse.dim() != coarse_dim()) throw contract_error("Refinement: coarse dim mismatch");
  for (const auto& s : splits) {
    if (s.empty()) throw contract_error("Refinement: empty split");
    double sum = 0;
    for (double t : s) {
      if (t <= 0) throw contract_error("Refinement: fractions must be positive");
      sum += t;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw contract_error("Refinement: fractions must sum to 1");
  }
  for (double l : added_lengths)
    if (l <= 0) throw contract_error("Refinement: added edge length must be positive");
}

Lattice Refinement::apply(const Lattice& coarse) const {
  validate(coarse);
  Lattice fine;
  for (int e = 0; e < coarse.dim(); ++e)
    for (double t : splits[e]) fine.edge_lengths.push_back(t * coarse.edge_lengths[e]);
  for (double l : added_lengths) fine.edge_lengths.push_back(l);
  return fine;
}

std::vector<double> Refinement::S(const std::vector<double>& xi) const {
  std::vector<double> out;
  for (size_t e = 0; e < splits.size(); ++e)
    for (double t : splits[e]) out.push_back(t * xi[e]);
  out.insert(out.end(), added_lengths.size(), 0.0);
  return out;
}

std::vector<int> Refinement::T(const std::vector<int>& b) const {
  std::vector<int> out;
  for (size_t e = 0; e < splits.size(); ++e)
    out.insert(out.end(), splits[e].size(), b[e]);
  out.insert(out.end(), added_lengths.size(), 0);
  return out;
}

std::vector<double> Refinement::gamma_mom(const std::vector<double>& v) const {
  std::vector<double> out;
  size_t k = 0;
  for (const auto& s : splits) {
    double acc = 0;
    for (double t : s) acc += t * v[k++];
    out.push_back(acc);
  }
  return out;
}

Refinement Refinement::equal_subdivision(const Lattice& coarse, int parts) {
  if (parts < 1) throw contract_error("equal_subdivision: parts must be >= 1");
  Refinement r;
  r.splits.assign(coarse.dim(), std::vector<double>(parts, 1.0 / parts));
  r.validate(coarse);
  return r;
}

Refinement Refinement::add_edges(const Lattice& coarse, std::vector<double> lengths) {
  Refinement r;
  r.splits.assign(coarse.dim(), {1.0});
  r.added_lengths = std::move(lengths);
  r.validate(coarse);
  return r;
}

Refinement Refinement::compose(const Lattice& base, const Refinement& first,
                               const Refinement& second) {
  Lattice mid = first.apply(base);
  second.validate(mid);
  Refinement r;
  size_t k = 0;
  for (int e = 0; e < base.dim(); ++e) {
    std::vector<double> merged;
    for (double t : first.splits[e]) {
      for (double u : second.splits[k]) merged.push_back(t * u);
      ++k;
    }
    r.splits.push_back(std::move(merged));
  }
  // splits of edges added by `first` become additions of the composite
  for (size_t e = k; e < static_cast<size_t>(mid.dim()); ++e) {
    const double len = mid.edge_lengths[e];
    for (double u : second.splits[e]) r.added_lengths.push_back(u * len);
  }
  for (double l : second.added_lengths) r.added_lengths.push_back(l);
  r.validate(base);
  return r;
}

// ------------------------------------------------------ classical generators

bool ClassicalGenerator::in_ball() const {
  for (const auto& a : atoms)
    for (double x : a.xi)
      if (!(std::abs(x) < 1.0 / (2 * M_PI))) return false;
  return true;
}

cplx ClassicalGenerator::h(const std::vector<double>& p) const {
  cplx acc = 0;
  for (const auto& a : atoms) {
    double phase = 0;
    for (size_t i = 0; i < a.xi.size(); ++i) phase += a.xi[i] * p[i];
    acc += a.c * std::exp(cplx(0, phase));
  }
  return acc;
}

cplx ClassicalGenerator::value(const std::vector<double>& q, const std::vector<double>& p) const {
  double phase = 0;
  for (size_t i = 0; i < b.size(); ++i) phase += 2 * M_PI * b[i] * q[i];
  return std::exp(cplx(0, phase)) * h(p);
}

ClassicalGenerator ClassicalGenerator::conjugate() const {
  ClassicalGenerator g;
  g.b.resize(b.size());
  for (size_t i = 0; i < b.size(); ++i) g.b[i] = -b[i];
  for (const auto& a : atoms) {
    Atom na;
    na.c = std::conj(a.c);
    na.xi.resize(a.xi.size());
    for (size_t i = 0; i < a.xi.size(); ++i) na.xi[i] = -a.xi[i];
    g.atoms.push_back(std::move(na));
  }
  return g;
}

double ClassicalGenerator::atom_l1() const {
  double s = 0;
  for (const auto& a : atoms) s += std::abs(a.c);
  return s;
}

ClassicalGenerator classical_product(const ClassicalGenerator& f, const ClassicalGenerator& g) {
  if (f.dim() != g.dim()) throw contract_error("classical_product: dim mismatch");
  ClassicalGenerator r;
  r.b.resize(f.dim());
  for (int i = 0; i < f.dim(); ++i) r.b[i] = f.b[i] + g.b[i];
  for (const auto& a1 : f.atoms)
    for (const auto& a2 : g.atoms) {
      Atom a;
      a.c = a1.c * a2.c;
      a.xi.resize(a1.xi.size());
      for (size_t i = 0; i < a.xi.size(); ++i) a.xi[i] = a1.xi[i] + a2.xi[i];
      r.atoms.push_back(std::move(a));
    }
  return r;
}

ClassicalGenerator poisson_bracket(const ClassicalGenerator& f, const ClassicalGenerator& g,
                                   int sigma) {
  if (sigma != 1 && sigma != -1) throw contract_error("poisson_bracket: sigma must be +-1");
  ClassicalGenerator r;
  r.b.resize(f.dim());
  for (int i = 0; i < f.dim(); ++i) r.b[i] = f.b[i] + g.b[i];
  for (const auto& a1 : f.atoms)
    for (const auto& a2 : g.atoms) {
      double x1b2 = 0, x2b1 = 0;
      for (int i = 0; i < f.dim(); ++i) {
        x1b2 += a1.xi[i] * g.b[i];
        x2b1 += a2.xi[i] * f.b[i];
      }
      Atom a;
      a.c = double(sigma) * 2 * M_PI * (x1b2 - x2b1) * a1.c * a2.c;
      a.xi.resize(a1.xi.size());
      for (size_t i = 0; i < a.xi.size(); ++i) a.xi[i] = a1.xi[i] + a2.xi[i];
      r.atoms.push_back(std::move(a));
    }
  return r;
}

ClassicalGenerator embed_classical(const ClassicalGenerator& g, const Refinement& ref) {
  if (g.dim() != ref.coarse_dim()) throw contract_error("embed_classical: dim mismatch");
  if (g.evolved_out_of_ball)
    throw contract_error("embed_classical: generator left the ball under free evolution");
  ClassicalGenerator r;
  r.b = ref.T(g.b);
  for (const auto& a : g.atoms) r.atoms.push_back({a.c, ref.S(a.xi)});
  return r;
}

ClassicalGenerator free_classical_pullback(const ClassicalGenerator& g, double t) {
  ClassicalGenerator r = g;
  for (auto& a : r.atoms)
    for (size_t i = 0; i < a.xi.size(); ++i) a.xi[i] += 2 * M_PI * t * g.b[i];
  if (g.in_ball() && !r.in_ball()) r.evolved_out_of_ball = true;
  return r;
}

// ----------------------------------------------------------- torus operators

TorusOperator::TorusOperator(std::vector<OpTerm> terms, double hbar, int cutoff)
    : hbar_(hbar), cutoff_(cutoff) {
  if (cutoff < 1) throw contract_error("TorusOperator: cutoff must be >= 1");
  // merge terms sharing the same shift
  std::map<std::vector<int>, OpTerm> merged;
  for (auto& t : terms) {
    auto it = merged.find(t.b);
    if (it == merged.end())
      merged.emplace(t.b, std::move(t));
    else
      it->second.atoms.insert(it->second.atoms.end(), t.atoms.begin(), t.atoms.end());
  }
  for (auto& [b, t] : merged) terms_.push_back(std::move(t));
}

cplx TorusOperator::symbol(const OpTerm& t, const std::vector<int>& a) const {
  cplx acc = 0;
  for (const auto& atom : t.atoms) {
    double phase = 0;
    for (size_t i = 0; i < atom.xi.size(); ++i)
      phase += atom.xi[i] * 2 * M_PI * hbar_ * (a[i] + 0.5 * t.b[i]);
    acc += atom.c * std::exp(cplx(0, phase));
  }
  return acc;
}

TorusOperator TorusOperator::operator+(const TorusOperator& o) const {
  if (hbar_ != o.hbar_ || cutoff_ != o.cutoff_) throw contract_error("TorusOperator+: mismatch");
  std::vector<OpTerm> ts = terms_;
  ts.insert(ts.end(), o.terms_.begin(), o.terms_.end());
  return TorusOperator(std::move(ts), hbar_, cutoff_);
}

TorusOperator TorusOperator::operator-(const TorusOperator& o) const {
  return *this + (o * cplx(-1, 0));
}

TorusOperator TorusOperator::operator*(cplx s) const {
  std::vector<OpTerm> ts = terms_;
  for (auto& t : ts)
    for (auto& a : t.atoms) a.c *= s;
  return TorusOperator(std::move(ts), hbar_, cutoff_);
}

TorusOperator TorusOperator::adjoint() const {
  std::vector<OpTerm> ts;
  for (const auto& t : terms_) {
    OpTerm nt;
    nt.b.resize(t.b.size());
    for (size_t i = 0; i < t.b.size(); ++i) nt.b[i] = -t.b[i];
    for (const auto& a : t.atoms) {
      Atom na;
      na.c = std::conj(a.c);
      na.xi.resize(a.xi.size());
      for (size_t i = 0; i < a.xi.size(); ++i) na.xi[i] = -a.xi[i];
      nt.atoms.push_back(std::move(na));
    }
    ts.push_back(std::move(nt));
  }
  return TorusOperator(std::move(ts), hbar_, cutoff_);
}

bool TorusOperator::single_shift() const { return terms_.size() <= 1; }

TorusOperator quantize(const ClassicalGenerator& g, double hbar, int cutoff) {
  if (!(hbar >= -1.0 && hbar <= 1.0)) throw contract_error("quantize: hbar must be in [-1,1]");
  OpTerm t;
  t.b = g.b;
  t.atoms = g.atoms;
  return TorusOperator({std::move(t)}, hbar, cutoff);
}

TorusOperator op_product(const TorusOperator& x, const TorusOperator& y, const Tolerances& tol) {
  (void)tol;
  if (x.hbar() != y.hbar() || x.cutoff() != y.cutoff())
    throw contract_error("op_product: hbar/cutoff mismatch");
  std::vector<OpTerm> ts;
  for (const auto& t1 : x.terms())
    for (const auto& t2 : y.terms()) {
      OpTerm t;
      t.b.resize(t1.b.size());
      for (size_t i = 0; i < t.b.size(); ++i) t.b[i] = t1.b[i] + t2.b[i];
      for (const auto& a1 : t1.atoms)
        for (const auto& a2 : t2.atoms) {
          // Weyl cocycle phase from recentring both symbols at (b1+b2)/2
          double cross = 0;
          for (size_t i = 0; i < a1.xi.size(); ++i)
            cross += a1.xi[i] * t2.b[i] - a2.xi[i] * t1.b[i];
          Atom a;
          a.c = a1.c * a2.c * std::exp(cplx(0, M_PI * x.hbar() * cross));
          a.xi.resize(a1.xi.size());
          for (size_t i = 0; i < a.xi.size(); ++i) a.xi[i] = a1.xi[i] + a2.xi[i];
          t.atoms.push_back(std::move(a));
        }
      ts.push_back(std::move(t));
    }
  return TorusOperator(std::move(ts), x.hbar(), x.cutoff());
}

TorusOperator embed_quantum(const TorusOperator& o, const Refinement& ref) {
  std::vector<OpTerm> ts;
  for (const auto& t : o.terms()) {
    OpTerm nt;
    nt.b = ref.T(t.b);
    for (const auto& a : t.atoms) nt.atoms.push_back({a.c, ref.S(a.xi)});
    ts.push_back(std::move(nt));
  }
  return TorusOperator(std::move(ts), o.hbar(), o.cutoff());
}

TorusOperator free_quantum_evolution(const TorusOperator& o, double t) {
  std::vector<OpTerm> ts = o.terms();
  for (auto& term : ts)
    for (auto& a : term.atoms)
      for (size_t i = 0; i < a.xi.size(); ++i) a.xi[i] += 2 * M_PI * t * term.b[i];
  return TorusOperator(std::move(ts), o.hbar(), o.cutoff());
}

// ------------------------------------------------------------ dense windows

namespace {

struct Window {
  int dim;     // torus dimensions
  int cutoff;  // |a_i| <= cutoff
  int side;    // 2 cutoff + 1
  size_t points;

  Window(int d, int c) : dim(d), cutoff(c), side(2 * c + 1) {
    points = 1;
    for (int i = 0; i < d; ++i) points *= static_cast<size_t>(side);
  }
  void decode(size_t idx, std::vector<int>& a) const {
    a.resize(dim);
    for (int i = dim - 1; i >= 0; --i) {
      a[i] = int(idx % side) - cutoff;
      idx /= side;
    }
  }
  // -1 when out of window
  long long encode(const std::vector<int>& a) const {
    long long idx = 0;
    for (int i = 0; i < dim; ++i) {
      if (std::abs(a[i]) > cutoff) return -1;
      idx = idx * side + (a[i] + cutoff);
    }
    return idx;
  }
  bool inside(const std::vector<int>& a, int margin) const {
    for (int x : a)
      if (std::abs(x) > cutoff - margin) return false;
    return true;
  }
};

void apply_op(const TorusOperator& o, const Window& w, const std::vector<cplx>& x,
              std::vector<cplx>& y) {
  std::fill(y.begin(), y.end(), cplx(0, 0));
  std::vector<int> a, shifted;
  for (size_t idx = 0; idx < w.points; ++idx) {
    if (x[idx] == cplx(0, 0)) continue;
    w.decode(idx, a);
    for (const auto& t : o.terms()) {
      shifted = a;
      for (int i = 0; i < w.dim; ++i) shifted[i] += t.b[i];
      const long long target = w.encode(shifted);
      if (target < 0) continue;
      y[static_cast<size_t>(target)] += o.symbol(t, a) * x[idx];
    }
  }
}

}  // namespace

Matrix to_dense(const TorusOperator& o) {
  Window w(o.dim(), o.cutoff());
  if (w.points > 4096) throw size_error("to_dense: window too large");
  Matrix m(static_cast<int>(w.points));
  std::vector<int> a, shifted;
  for (size_t col = 0; col < w.points; ++col) {
    w.decode(col, a);
    for (const auto& t : o.terms()) {
      shifted = a;
      for (int i = 0; i < w.dim; ++i) shifted[i] += t.b[i];
      const long long row = w.encode(shifted);
      if (row >= 0) m(static_cast<int>(row), static_cast<int>(col)) += o.symbol(t, a);
    }
  }
  return m;
}

NormBracket op_norm(const TorusOperator& o, int margin, const Tolerances& tol) {
  (void)tol;
  NormBracket nb;
  if (o.terms().empty()) return nb;
  Window w(o.dim(), o.cutoff());

  if (o.single_shift()) {
    // shift-diagonal: the norm is the sup of |symbol| over the window
    const auto& t = o.terms()[0];
    std::vector<int> a;
    for (size_t idx = 0; idx < w.points; ++idx) {
      w.decode(idx, a);
      const double v = std::abs(o.symbol(t, a));
      nb.outer = std::max(nb.outer, v);
      if (w.inside(a, margin)) nb.inner = std::max(nb.inner, v);
    }
    return nb;
  }

  if (w.points > 20000000ull) throw size_error("op_norm: window too large");
  // power iteration on O^* O, columns restricted for the inner value
  auto sigma_max = [&](int restrict_margin) {
    std::vector<cplx> x(w.points), y(w.points), z(w.points);
    std::vector<int> a;
    for (size_t i = 0; i < w.points; ++i) {
      w.decode(i, a);
      if (restrict_margin > 0 && !w.inside(a, restrict_margin)) continue;
      x[i] = cplx(1.0 + 0.37 * std::sin(0.7 * double(i)), 0.21 * std::cos(1.3 * double(i)));
    }
    TorusOperator adj = o.adjoint();
    double prev = 0;
    for (int it = 0; it < 2000; ++it) {
      if (restrict_margin > 0) {
        for (size_t i = 0; i < w.points; ++i) {
          w.decode(i, a);
          if (!w.inside(a, restrict_margin)) x[i] = 0;
        }
      }
      apply_op(o, w, x, y);
      apply_op(adj, w, y, z);
      double nrm = 0;
      for (const auto& v : z) nrm += std::norm(v);
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) return 0.0;
      for (size_t i = 0; i < w.points; ++i) x[i] = z[i] / nrm;
      const double sigma = std::sqrt(nrm);
      if (it > 4 && std::abs(sigma - prev) <= 1e-12 * std::max(1.0, sigma)) return sigma;
      prev = sigma;
    }
    return prev;
  };
  nb.outer = sigma_max(0);
  nb.inner = sigma_max(margin);
  return nb;
}

double intertwining_defect(const TorusOperator& o, const Refinement& ref, int fine_cutoff) {
  // shifts map exactly (T is additive on integers), so the defect reduces to
  // the symbol comparison h(2 pi hbar (a + b/2)) vs embedded h at T(a)
  Window w(o.dim(), o.cutoff());
  double worst = 0;
  std::vector<int> a;
  for (size_t idx = 0; idx < w.points; ++idx) {
    w.decode(idx, a);
    const std::vector<int> ta = ref.T(a);
    for (int x : ta)
      if (std::abs(x) > fine_cutoff)
        throw contract_error("intertwining_defect: fine window too small");
    for (const auto& term : o.terms()) {
      OpTerm fine_term;
      fine_term.b = ref.T(term.b);
      for (const auto& atom : term.atoms) fine_term.atoms.push_back({atom.c, ref.S(atom.xi)});
      TorusOperator fine_op({fine_term}, o.hbar(), fine_cutoff);
      const cplx coarse = o.symbol(term, a);
      const cplx fine = fine_op.symbol(fine_op.terms()[0], ta);
      worst = std::max(worst, std::abs(coarse - fine));
    }
  }
  return worst;
}

// --------------------------------------------------------------- SDQ checks

InjectivityReport injectivity_witness(const std::vector<ClassicalGenerator>& gens, double hbar,
                                      int cutoff, const Tolerances& tol) {
  const int k = static_cast<int>(gens.size());
  if (k < 1) throw contract_error("injectivity_witness: no generators");
  std::vector<TorusOperator> ops;
  for (const auto& g : gens) ops.push_back(quantize(g, hbar, cutoff));
  Window w(gens[0].dim(), cutoff);

  InjectivityReport rep;
  // normalized Hilbert-Schmidt Gram on the window
  Matrix gram(k);
  std::vector<int> a;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (ops[i].terms()[0].b != ops[j].terms()[0].b) {
        gram(i, j) = 0;  // different shifts are HS-orthogonal
        continue;
      }
      cplx acc = 0;
      for (size_t idx = 0; idx < w.points; ++idx) {
        w.decode(idx, a);
        acc += std::conj(ops[i].symbol(ops[i].terms()[0], a)) *
               ops[j].symbol(ops[j].terms()[0], a);
      }
      gram(i, j) = acc / double(w.points);
    }
  HermitianMatrix hg(gram, tol);
  EigenSystem es = eigh(hg, tol);
  rep.smallest_singular_value = std::sqrt(std::max(0.0, es.eigenvalues.front()));
  for (int i = 0; i < k; ++i) rep.norms.push_back(op_norm(ops[i], 0).outer);
  return rep;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// sup|h| and sup|d_b h| for the analytic residual bound; exact for <= 2
// atoms, sampled on a long momentum segment otherwise
double sup_h(const ClassicalGenerator& g) {
  if (g.atoms.size() <= 2) return g.atom_l1();
  double best = 0;
  const int dim = g.atoms[0].xi.empty() ? 1 : static_cast<int>(g.atoms[0].xi.size());
  std::vector<double> p(dim, 0.0);
  for (int s = 0; s < 200000; ++s) {
    for (int i = 0; i < dim; ++i) p[i] = 1000.0 * std::sin(0.001 * s * (i + 1.37));
    best = std::max(best, std::abs(g.h(p)));
  }
  return best;
}

ClassicalGenerator directional_derivative(const ClassicalGenerator& g,
                                          const std::vector<int>& dir) {
  ClassicalGenerator r = g;
  for (auto& a : r.atoms) {
    double xb = 0;
    for (size_t i = 0; i < a.xi.size(); ++i) xb += a.xi[i] * dir[i];
    a.c *= cplx(0, xb);
  }
  return r;
}

}  // namespace

SdqCurve sdq_residual_curve(const ClassicalGenerator& f, const ClassicalGenerator& g,
                            const std::vector<double>& hbars, int cutoff, int margin,
                            const Tolerances& tol) {
  SdqCurve curve;
  ClassicalGenerator fg = classical_product(f, g);

  // pin the Poisson sign: the admissible convention makes the Dirac residual
  // decay with hbar; compare the largest and smallest sample
  auto dirac_residual = [&](double hbar, int sigma) {
    TorusOperator qf = quantize(f, hbar, cutoff), qg = quantize(g, hbar, cutoff);
    TorusOperator comm = op_product(qf, qg, tol) - op_product(qg, qf, tol);
    TorusOperator rhs = quantize(poisson_bracket(f, g, sigma), hbar, cutoff);
    TorusOperator delta = comm * (cplx(0, 1) / hbar) - rhs;
    return op_norm(delta, margin, tol).inner;
  };
  const double hmax = *std::max_element(hbars.begin(), hbars.end());
  const double hmin = *std::min_element(hbars.begin(), hbars.end());
  const double decay_plus = dirac_residual(hmin, 1) / std::max(dirac_residual(hmax, 1), 1e-300);
  const double decay_minus = dirac_residual(hmin, -1) / std::max(dirac_residual(hmax, -1), 1e-300);
  curve.poisson_sign = decay_minus < decay_plus ? -1 : 1;

  const double s_h1 = sup_h(f), s_h2 = sup_h(g);
  const double s_d1h2 = sup_h(directional_derivative(g, f.b));
  const double s_d2h1 = sup_h(directional_derivative(f, g.b));

  std::vector<double> lx, lv, ld;
  for (double hbar : hbars) {
    SdqSample s;
    s.hbar = hbar;
    TorusOperator qf = quantize(f, hbar, cutoff), qg = quantize(g, hbar, cutoff);
    TorusOperator vn = op_product(qf, qg, tol) - quantize(fg, hbar, cutoff);
    s.von_neumann = op_norm(vn, margin, tol).inner;
    s.dirac = dirac_residual(hbar, curve.poisson_sign);
    s.vn_bound = s_h1 * M_PI * std::abs(hbar) * s_d1h2 + M_PI * std::abs(hbar) * s_d2h1 * s_h2;
    curve.samples.push_back(s);
    lx.push_back(std::log(hbar));
    lv.push_back(std::log(std::max(s.von_neumann, 1e-300)));
    ld.push_back(std::log(std::max(s.dirac, 1e-300)));
  }
  curve.vn_slope = fit_slope(lx, lv);
  curve.dirac_slope = fit_slope(lx, ld);
  return curve;
}

std::vector<Rieffel0Sample> rieffel0_curve(const ClassicalGenerator& f,
                                           const std::vector<double>& hbars, int cutoff,
                                           int margin, const Tolerances& tol) {
  std::vector<Rieffel0Sample> out;
  const double sup = sup_h(f);  // |e_b| = 1, so ||f||_inf = sup|h|
  for (double hbar : hbars) {
    Rieffel0Sample s;
    s.hbar = hbar;
    s.qnorm = op_norm(quantize(f, hbar, cutoff), margin, tol).inner;
    s.supnorm = sup;
    out.push_back(s);
  }
  return out;
}

std::vector<TowerSample> rieffel_tower_table(const ClassicalGenerator& f, const Lattice& base,
                                             const std::vector<double>& hbars, int depth,
                                             int cutoff, int margin, const Tolerances& tol) {
  if (f.evolved_out_of_ball)
    throw contract_error("rieffel_tower_table: generator left the ball under free evolution");
  std::vector<TowerSample> out;
  for (double hbar : hbars) {
    TowerSample s;
    s.hbar = hbar;
    for (int R = 1; R <= depth; ++R) {
      Refinement ref = Refinement::equal_subdivision(base, R);
      ClassicalGenerator e = embed_classical(f, ref);
      const double nrm = op_norm(quantize(e, hbar, cutoff), margin, tol).inner;
      s.tower_norms.push_back(nrm);
      if (R == 1) s.single_lattice = nrm;
      s.sup_over_tower = std::max(s.sup_over_tower, nrm);
    }
    out.push_back(s);
  }
  return out;
}

ClassicalGenerator rieffel_failure_generator(int dim, double hbar0) {
  // e_0 (x) sin(p_1 / hbar0)
  ClassicalGenerator g;
  g.b.assign(dim, 0);
  Atom plus, minus;
  plus.c = cplx(0, -0.5);
  minus.c = cplx(0, 0.5);
  plus.xi.assign(dim, 0.0);
  minus.xi.assign(dim, 0.0);
  plus.xi[0] = 1.0 / hbar0;
  minus.xi[0] = -1.0 / hbar0;
  g.atoms = {plus, minus};
  return g;
}

namespace {

// coef * s^m e^{i c s}
struct PolyExpTerm {
  cplx coef;
  int m;
  double c;
};

// antiderivative of coef u^m e^{i c u} on [0, s], as terms in s. Frequencies
// are integer multiples of 2 pi^2 hbar here, cleanly separated from zero.
void integrate_polyexp(cplx coef, int m, double c, std::vector<PolyExpTerm>& out) {
  if (std::abs(c) < 1e-9) {
    out.push_back({coef / double(m + 1), m + 1, 0.0});
    return;
  }
  std::vector<cplx> b(m + 1);
  b[m] = coef / cplx(0, c);
  for (int j = m - 1; j >= 0; --j) b[j] = -double(j + 1) * b[j + 1] / cplx(0, c);
  for (int j = 0; j <= m; ++j) out.push_back({b[j], j, c});
  out.push_back({-b[0], 0, 0.0});  // lower limit
}

// int over {T > t_1 > .. > t_k > 0} of prod_j e^{i c_j t_j}, exact
cplx simplex_exponential_integral(const std::vector<double>& c, double T) {
  std::vector<PolyExpTerm> state{{cplx(1, 0), 0, 0.0}};
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) {
    std::vector<PolyExpTerm> next;
    for (const auto& term : state) integrate_polyexp(term.coef, term.m, term.c + c[j], next);
    state = std::move(next);
  }
  cplx acc = 0;
  for (const auto& term : state)
    acc += term.coef * std::pow(T, term.m) * std::exp(cplx(0, term.c * T));
  return acc;
}

}  // namespace

DysonReport dyson_vs_exact(const std::vector<std::pair<std::vector<int>, cplx>>& potential,
                           double vnorm, double t, double hbar, int order, int cutoff,
                           const Tolerances& tol) {
  if (order > 4) throw contract_error("dyson_vs_exact: order must be <= 4");
  if (potential.empty()) throw contract_error("dyson_vs_exact: empty potential");
  const int dim = static_cast<int>(potential[0].first.size());
  Window w(dim, cutoff);
  if (w.points > 4096) throw size_error("dyson_vs_exact: window too large");
  const int n = static_cast<int>(w.points);

  // per column a and factor choice (b_1..b_k), the product
  // tau_{t_1}(M_{b_1}) .. tau_{t_k}(M_{b_k}) psi_a = e^{i sum c_j t_j} psi_{a+B}
  // with c_j = 2 pi^2 hbar (2 (a + sum_{i>j} b_i) . b_j + |b_j|^2); the ordered
  // simplex integral of the phase is evaluated in closed form
  Matrix partial = Matrix::identity(n);  // k = 0 term
  const int np = static_cast<int>(potential.size());
  std::vector<int> a, shifted;
  for (int k = 1; k <= order; ++k) {
    Matrix term_sum(n);
    std::vector<int> pidx(k, 0);
    while (true) {
      cplx coeff = 1;
      for (int j = 0; j < k; ++j) coeff *= potential[pidx[j]].second;
      if (coeff != cplx(0, 0)) {
        for (size_t col = 0; col < w.points; ++col) {
          w.decode(col, a);
          // accumulate shifts right-to-left and collect frequencies
          std::vector<double> c(k);
          shifted = a;
          for (int j = k - 1; j >= 0; --j) {
            const auto& b = potential[pidx[j]].first;
            double dot = 0, bb = 0;
            for (int i = 0; i < dim; ++i) {
              dot += double(shifted[i]) * b[i];
              bb += double(b[i]) * b[i];
            }
            c[j] = 2 * M_PI * M_PI * hbar * (2 * dot + bb);
            for (int i = 0; i < dim; ++i) shifted[i] += b[i];
          }
          const long long row = w.encode(shifted);
          if (row < 0) continue;
          term_sum(static_cast<int>(row), static_cast<int>(col)) +=
              coeff * simplex_exponential_integral(c, t);
        }
      }
      int cdig = k - 1;
      while (cdig >= 0 && ++pidx[cdig] == np) pidx[cdig--] = 0;
      if (cdig < 0) break;
    }
    cplx pref = 1;
    for (int j = 0; j < k; ++j) pref /= cplx(0, hbar);
    partial += term_sum * pref;
  }

  // exact: e^{i t H0 / hbar} e^{-i t H / hbar} on the window
  std::vector<double> h0(w.points);
  for (size_t idx = 0; idx < w.points; ++idx) {
    w.decode(idx, a);
    double n2 = 0;
    for (int i = 0; i < dim; ++i) n2 += double(a[i]) * a[i];
    h0[idx] = 2 * M_PI * M_PI * hbar * hbar * n2;
  }
  Matrix hmat = Matrix::diag(h0);
  for (const auto& [b, c] : potential) {
    for (size_t col = 0; col < w.points; ++col) {
      w.decode(col, a);
      shifted = a;
      for (int i = 0; i < dim; ++i) shifted[i] += b[i];
      const long long row = w.encode(shifted);
      if (row >= 0) hmat(static_cast<int>(row), static_cast<int>(col)) += c;
    }
  }
  Matrix exact = expm_i(HermitianMatrix::diag(h0), -t / hbar) *
                 expm_i(HermitianMatrix(hmat, tol), t / hbar, tol);

  // compare on the inner window
  int maxb = 0;
  for (const auto& [b, c] : potential)
    for (int x : b) maxb = std::max(maxb, std::abs(x));
  const int margin = order * maxb + 2;
  Matrix diff = partial - exact;
  Matrix restricted(n);
  for (size_t r = 0; r < w.points; ++r) {
    w.decode(r, a);
    if (!w.inside(a, margin)) continue;
    for (size_t c = 0; c < w.points; ++c) {
      std::vector<int> ac;
      w.decode(c, ac);
      if (!w.inside(ac, margin)) continue;
      restricted(static_cast<int>(r), static_cast<int>(c)) =
          diff(static_cast<int>(r), static_cast<int>(c));
    }
  }

  DysonReport rep;
  rep.order = order;
  rep.residual = operator_norm(restricted, tol);
  // each term carries (i hbar)^{-k}, so the honest tail is in t ||V|| / |hbar|;
  // at |hbar| = 1 this is the plain sum_{k>m} |t|^k ||V||^k / k!
  rep.tail_bound = 0;
  const double rate = std::abs(t) * vnorm / std::abs(hbar);
  double fact = 1;
  for (int k = 1; k <= order; ++k) fact *= k;
  double pw = std::pow(rate, order);
  for (int k = order + 1; k <= order + 60; ++k) {
    fact *= k;
    pw *= rate;
    rep.tail_bound += pw / fact;
  }
  return rep;
}

}  // namespace speclab
