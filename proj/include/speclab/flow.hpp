#pragma once

#include <map>

#include "speclab/linalg.hpp"
#include "speclab/torusq.hpp"

namespace speclab {

// point of T* T^n = T^n x R^n, q canonicalized to [0,1)^n
struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;

  void wrap();
  int dim() const { return static_cast<int>(q.size()); }
};

// torus distance per component, then sqrt(dq^2 + dp^2)
double phase_distance(const PhasePoint& x, const PhasePoint& y);

// real-valued trigonometric potential V = sum a_b e_b, a_{-b} = conj(a_b)
class TrigPotential {
 public:
  TrigPotential() = default;
  explicit TrigPotential(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  void set_coefficient(const std::vector<int>& b, cplx a);  // also sets a_{-b}
  const std::map<std::vector<int>, cplx>& coefficients() const { return coeffs_; }

  double value(const std::vector<double>& q) const;
  std::vector<double> gradient(const std::vector<double>& q) const;
  double sup_gradient_diff(const TrigPotential& other, int samples_per_dim = 64) const;
  double lipschitz_estimate(int samples_per_dim = 64) const;  // of (p,-grad V)

 private:
  int dim_ = 0;
  std::map<std::vector<int>, cplx> coeffs_;
};

// Stormer-Verlet with torus wrap
PhasePoint integrate(const PhasePoint& start, const TrigPotential& v, double t, double dt);

double energy(const PhasePoint& x, const TrigPotential& v);

struct DecayRow {
  double bp0;       // |b . p_0|
  double distance;  // d(Phi_V, Phi_{V-V_b}) at t = 1
};
struct DecayTable {
  std::vector<DecayRow> rows;
  double slope = 0;  // log-log fit
  bool slope_meaningful = false;
};
// compare the V-flow against the (V - V_b)-flow along the ray p_0 = s * dir
DecayTable dynamics_comparison(const TrigPotential& v, const std::vector<int>& b,
                               const std::vector<double>& q0, const std::vector<double>& dir,
                               const std::vector<double>& speeds, double dt);

// coefficientwise (1 - |k_e|/m)_+ damping
TrigPotential fejer_smooth(const TrigPotential& v, int m);

struct GronwallReport {
  bool holds = true;
  double worst_margin = 0;  // max over checkpoints of d(y,z) - bound
  double epsilon = 0;       // sup |grad V1 - grad V2|
  double lipschitz = 0;     // sampled Lipschitz constant of the V1 field
};
GronwallReport gronwall_check(const PhasePoint& start, const TrigPotential& v1,
                              const TrigPotential& v2, double t, double dt);

}  // namespace speclab
