#pragma once

#include "speclab/linalg.hpp"

namespace speclab {

// ---------------------------------------------------------------------------
// lattices and refinements
// ---------------------------------------------------------------------------

// One torus dimension per edge; refinements subdivide edges (fractions
// summing to 1) and append fresh edges.
struct Lattice {
  std::vector<double> edge_lengths;
  int dim() const { return static_cast<int>(edge_lengths.size()); }
};

struct Refinement {
  std::vector<std::vector<double>> splits;  // per coarse edge
  std::vector<double> added_lengths;

  int coarse_dim() const { return static_cast<int>(splits.size()); }
  int fine_dim() const;
  void validate(const Lattice& coarse) const;
  Lattice apply(const Lattice& coarse) const;

  // momentum-frequency map S: xi_e -> (t_1 xi_e, .., t_r xi_e), additions 0
  std::vector<double> S(const std::vector<double>& xi) const;
  // configuration-frequency map T: b_e -> (b_e, .., b_e), additions 0
  std::vector<int> T(const std::vector<int>& b) const;
  // momentum restriction, dual to S: (gamma v)_e = sum_i t_i v_{e,i}
  std::vector<double> gamma_mom(const std::vector<double>& v) const;

  static Refinement equal_subdivision(const Lattice& coarse, int parts);
  static Refinement add_edges(const Lattice& coarse, std::vector<double> lengths);
  static Refinement compose(const Lattice& base, const Refinement& first,
                            const Refinement& second);
};

// ---------------------------------------------------------------------------
// classical generators e_b (x) h, h(p) = sum c_j e^{i xi_j . p}
// ---------------------------------------------------------------------------

struct Atom {
  cplx c;
  std::vector<double> xi;
};

struct ClassicalGenerator {
  std::vector<int> b;
  std::vector<Atom> atoms;
  // set when a free evolution pushed an in-ball generator outside the ball;
  // such elements live in the larger ambient system and tower operations
  // reject them
  bool evolved_out_of_ball = false;

  int dim() const { return static_cast<int>(b.size()); }
  bool in_ball() const;  // every |xi_e| < 1/(2 pi)
  cplx h(const std::vector<double>& p) const;
  cplx value(const std::vector<double>& q, const std::vector<double>& p) const;
  ClassicalGenerator conjugate() const;
  double atom_l1() const;  // sum |c_j|, equals sup|h| for <= 2 atoms
};

// pointwise product: shifts add, atoms convolve
ClassicalGenerator classical_product(const ClassicalGenerator& f, const ClassicalGenerator& g);
// Poisson bracket; sign convention sigma in {-1,+1} (see poisson_sign_by_dirac)
ClassicalGenerator poisson_bracket(const ClassicalGenerator& f, const ClassicalGenerator& g,
                                   int sigma);

ClassicalGenerator embed_classical(const ClassicalGenerator& g, const Refinement& ref);

// ---------------------------------------------------------------------------
// shift-diagonal operators on the truncated Fourier basis
// ---------------------------------------------------------------------------

struct OpTerm {
  std::vector<int> b;
  std::vector<Atom> atoms;
};

class TorusOperator {
 public:
  TorusOperator() = default;
  TorusOperator(std::vector<OpTerm> terms, double hbar, int cutoff);

  const std::vector<OpTerm>& terms() const { return terms_; }
  double hbar() const { return hbar_; }
  int cutoff() const { return cutoff_; }
  int dim() const { return terms_.empty() ? 0 : static_cast<int>(terms_[0].b.size()); }

  // symbol of term t at lattice point a: sum_j c_j e^{i xi_j . 2 pi hbar (a + b/2)}
  cplx symbol(const OpTerm& t, const std::vector<int>& a) const;

  TorusOperator operator+(const TorusOperator& o) const;
  TorusOperator operator-(const TorusOperator& o) const;
  TorusOperator operator*(cplx s) const;
  TorusOperator adjoint() const;

  bool single_shift() const;  // all terms share one b

 private:
  std::vector<OpTerm> terms_;  // merged on b
  double hbar_ = 0;
  int cutoff_ = 0;
};

TorusOperator quantize(const ClassicalGenerator& g, double hbar, int cutoff);
TorusOperator op_product(const TorusOperator& x, const TorusOperator& y,
                         const Tolerances& tol = default_tols());
TorusOperator embed_quantum(const TorusOperator& o, const Refinement& ref);

// dense realization on the window |a_i| <= cutoff (guarded by size)
Matrix to_dense(const TorusOperator& o);

struct NormBracket {
  double inner = 0;  // window |a| <= cutoff - margin
  double outer = 0;  // full window
};
NormBracket op_norm(const TorusOperator& o, int margin, const Tolerances& tol = default_tols());

// free quantum evolution tau_t^0: per term, xi -> xi + 2 pi t b
TorusOperator free_quantum_evolution(const TorusOperator& o, double t);
ClassicalGenerator free_classical_pullback(const ClassicalGenerator& g, double t);

// Hilbert-space embedding on basis labels: u psi_a = psi_{T(a)}
inline std::vector<int> u_map(const Refinement& ref, const std::vector<int>& a) {
  return ref.T(a);
}

// intertwining defect max over window basis vectors of
// |F_Q(O) u psi_a - u O psi_a| (shift mismatch counts as infinity)
double intertwining_defect(const TorusOperator& o, const Refinement& ref, int fine_cutoff);

// ---------------------------------------------------------------------------
// SDQ condition checks
// ---------------------------------------------------------------------------

struct InjectivityReport {
  double smallest_singular_value = 0;
  std::vector<double> norms;
};
InjectivityReport injectivity_witness(const std::vector<ClassicalGenerator>& gens, double hbar,
                                      int cutoff, const Tolerances& tol = default_tols());

struct SdqSample {
  double hbar = 0;
  double von_neumann = 0;
  double dirac = 0;
  double vn_bound = 0;  // ||h1|| pi hbar ||d_b1 h2|| + pi hbar ||d_b2 h1|| ||h2||
};
struct SdqCurve {
  std::vector<SdqSample> samples;
  double vn_slope = 0;
  double dirac_slope = 0;
  int poisson_sign = 0;  // sigma that makes the Dirac residual decay
};
SdqCurve sdq_residual_curve(const ClassicalGenerator& f, const ClassicalGenerator& g,
                            const std::vector<double>& hbars, int cutoff, int margin,
                            const Tolerances& tol = default_tols());

// | ||Q_hbar(f)|| - ||f||_inf | with the sup over a sampled momentum box;
// exact (atom l1) for single-shift generators with <= 2 atoms
struct Rieffel0Sample {
  double hbar = 0;
  double qnorm = 0;
  double supnorm = 0;
};
std::vector<Rieffel0Sample> rieffel0_curve(const ClassicalGenerator& f,
                                           const std::vector<double>& hbars, int cutoff,
                                           int margin, const Tolerances& tol = default_tols());

// tower norms N_R(hbar) = ||Q^{l^R}(f o gamma)|| for R = 1..depth
struct TowerSample {
  double hbar = 0;
  std::vector<double> tower_norms;  // per depth R
  double sup_over_tower = 0;
  double single_lattice = 0;  // R = 1
};
std::vector<TowerSample> rieffel_tower_table(const ClassicalGenerator& f, const Lattice& base,
                                             const std::vector<double>& hbars, int depth,
                                             int cutoff, int margin,
                                             const Tolerances& tol = default_tols());

// the Rieffel failure pair: f = e_0 (x) sin(p_1/hbar0)
ClassicalGenerator rieffel_failure_generator(int dim, double hbar0);

// Dyson partial sum vs exact conjugated propagator on the window
struct DysonReport {
  double residual = 0;    // ||partial sum - e^{itH0/hbar} e^{-itH/hbar}|| on the inner window
  double tail_bound = 0;  // sum_{k>m} (|t| ||V||)^k / k!
  int order = 0;
};
DysonReport dyson_vs_exact(const std::vector<std::pair<std::vector<int>, cplx>>& potential,
                           double vnorm, double t, double hbar, int order, int cutoff,
                           const Tolerances& tol = default_tols());

}  // namespace speclab
