#pragma once

#include "speclab/moi.hpp"

namespace speclab {

// Noncommutative Feynman multigraph: per vertex a clockwise list of legs,
// each leg either an external marking or half of an internal edge.
struct Diagram {
  struct Leg {
    bool external = false;
    int index = 0;  // marking (0-based) when external, edge id otherwise
  };
  std::vector<std::vector<Leg>> vertices;
  int n_external = 0;
  int n_edges = 0;

  void validate() const;  // every edge twice, markings a permutation
  static Diagram single_vertex(int n_external);
  static Diagram two_point_chain();   // two vertices, parallel pairing
  static Diagram two_point_bubble();  // two vertices, crossed pairing
  // single vertex, self-loop inserted after external 'gap' (0-based)
  static Diagram tadpole(int n_external, int gap);
};

struct Propagator {
  int cutoff = 0;
  std::vector<double> table;  // G_{kl} = 1/(f')^[1](lam_k, lam_l), row-major
  double operator()(int k, int l) const { return table[static_cast<size_t>(k) * cutoff + l]; }
};

// Shared evaluation state for one (D, f, N).
class OneLoopContext {
 public:
  OneLoopContext(const HermitianMatrix& d, TestFunction f, int cutoff,
                 const Tolerances& tol = default_tols());

  const EigenSystem& eig() const { return *eig_; }
  const Propagator& prop() const { return prop_; }
  const TestFunction& f() const { return f_; }
  int cutoff() const { return cutoff_; }
  const Tolerances& tol() const { return tol_; }
  const HermitianMatrix& D() const { return d_; }

  // (f')^[d-1] at eigenvalue indices
  cplx vertex_factor(const std::vector<int>& idx) const;
  // field compressed to the eigenbasis, top-left N x N block
  Matrix truncate_field(const Matrix& v, bool* mass_warning = nullptr) const;

 private:
  HermitianMatrix d_;
  TestFunction f_;
  int cutoff_;
  Tolerances tol_;
  std::shared_ptr<EigenSystem> eig_;
  std::shared_ptr<SpectralKernel> kernel_;
  Propagator prop_;
};

Propagator make_propagator(const HermitianMatrix& d, const TestFunction& f, int cutoff,
                           const Tolerances& tol = default_tols());

// Brute-force Wick evaluation: product of vertex factors, external matrix
// elements, and (-1) delta delta G per internal edge, summed over all index
// assignments at level N. Refuses above ~1e8 estimated terms. When a field
// carries mass outside the top-left N x N block beyond 1e-12, the optional
// flag is raised.
cplx amplitude(const OneLoopContext& ctx, const Diagram& g, const std::vector<Matrix>& fields,
               bool* truncation_warning = nullptr);

enum class TwoPointKind { chain, bubble, tadpole };
// closed forms transcribed from the two-point one-loop amplitudes
cplx explicit_two_point(const OneLoopContext& ctx, TwoPointKind kind, const Matrix& v1,
                        const Matrix& v2);

// one-loop quantum bracket: sum over planar one-loop 1PI diagrams with
// clockwise vertices of degree >= 3, externals outside the loop, marked
// cyclically; loop-vertex count v = 1..v_max
cplx quantum_bracket(const OneLoopContext& ctx, const std::vector<Matrix>& fields, int v_max);

enum class WardKind { vertex, gauge_edge, quantum };
struct WardInputs {
  std::vector<Matrix> fields;
  Matrix a;
  int v_max = 3;  // quantum kind
};
struct WardReport {
  double residual = 0;
  double scale = 1;
};
WardReport ward_check(const OneLoopContext& ctx, WardKind kind, const WardInputs& in);

}  // namespace speclab
