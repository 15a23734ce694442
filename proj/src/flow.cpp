#include "speclab/flow.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

void PhasePoint::wrap() {
  for (auto& x : q) {
    x -= std::floor(x);
    if (x >= 1.0) x = 0.0;
  }
}

double phase_distance(const PhasePoint& x, const PhasePoint& y) {
  double acc = 0;
  for (int i = 0; i < x.dim(); ++i) {
    double dq = std::abs(x.q[i] - y.q[i]);
    dq = std::min(dq, 1.0 - dq);
    acc += dq * dq;
    const double dp = x.p[i] - y.p[i];
    acc += dp * dp;
  }
  return std::sqrt(acc);
}

void TrigPotential::set_coefficient(const std::vector<int>& b, cplx a) {
  if (static_cast<int>(b.size()) != dim_) throw contract_error("TrigPotential: dim mismatch");
  std::vector<int> nb(b.size());
  for (size_t i = 0; i < b.size(); ++i) nb[i] = -b[i];
  coeffs_[b] = a;
  coeffs_[nb] = std::conj(a);
}

double TrigPotential::value(const std::vector<double>& q) const {
  cplx acc = 0;
  for (const auto& [b, a] : coeffs_) {
    double phase = 0;
    for (int i = 0; i < dim_; ++i) phase += 2 * M_PI * b[i] * q[i];
    acc += a * std::exp(cplx(0, phase));
  }
  return acc.real();
}

std::vector<double> TrigPotential::gradient(const std::vector<double>& q) const {
  std::vector<double> g(dim_, 0.0);
  for (const auto& [b, a] : coeffs_) {
    double phase = 0;
    for (int i = 0; i < dim_; ++i) phase += 2 * M_PI * b[i] * q[i];
    const cplx val = a * std::exp(cplx(0, phase)) * cplx(0, 2 * M_PI);
    for (int i = 0; i < dim_; ++i) g[i] += (val * double(b[i])).real();
  }
  return g;
}

double TrigPotential::sup_gradient_diff(const TrigPotential& other, int samples_per_dim) const {
  double worst = 0;
  std::vector<double> q(dim_, 0.0);
  std::vector<int> idx(dim_, 0);
  while (true) {
    for (int i = 0; i < dim_; ++i) q[i] = double(idx[i]) / samples_per_dim;
    auto g1 = gradient(q);
    auto g2 = other.gradient(q);
    double n2 = 0;
    for (int i = 0; i < dim_; ++i) n2 += (g1[i] - g2[i]) * (g1[i] - g2[i]);
    worst = std::max(worst, std::sqrt(n2));
    int c = dim_ - 1;
    while (c >= 0 && ++idx[c] == samples_per_dim) idx[c--] = 0;
    if (c < 0) break;
  }
  return worst;
}

double TrigPotential::lipschitz_estimate(int samples_per_dim) const {
  // field (q,p) -> (p, -grad V(q)); Lipschitz constant is max(1, L_gradV)
  // with L_gradV estimated from the Hessian sup
  double worst = 0;
  std::vector<double> q(dim_, 0.0);
  std::vector<int> idx(dim_, 0);
  while (true) {
    for (int i = 0; i < dim_; ++i) q[i] = double(idx[i]) / samples_per_dim;
    double fro = 0;
    for (const auto& [b, a] : coeffs_) {
      double phase = 0;
      for (int i = 0; i < dim_; ++i) phase += 2 * M_PI * b[i] * q[i];
      const cplx h = -a * std::exp(cplx(0, phase)) * (2 * M_PI) * (2 * M_PI);
      double b2 = 0;
      for (int i = 0; i < dim_; ++i) b2 += double(b[i]) * b[i];
      fro += std::abs(h.real()) * b2;
    }
    worst = std::max(worst, fro);
    int c = dim_ - 1;
    while (c >= 0 && ++idx[c] == samples_per_dim) idx[c--] = 0;
    if (c < 0) break;
  }
  return std::max(1.0, worst);
}

PhasePoint integrate(const PhasePoint& start, const TrigPotential& v, double t, double dt) {
  if (dt <= 0) throw contract_error("integrate: dt must be positive");
  PhasePoint x = start;
  x.wrap();
  const int dim = x.dim();
  long long steps = static_cast<long long>(std::llround(t / dt));
  if (steps < 0) throw contract_error("integrate: negative time; integrate the reversed field");
  for (long long s = 0; s < steps; ++s) {
    auto g = v.gradient(x.q);
    for (int i = 0; i < dim; ++i) x.p[i] -= 0.5 * dt * g[i];
    for (int i = 0; i < dim; ++i) x.q[i] += dt * x.p[i];
    x.wrap();
    g = v.gradient(x.q);
    for (int i = 0; i < dim; ++i) x.p[i] -= 0.5 * dt * g[i];
  }
  return x;
}

double energy(const PhasePoint& x, const TrigPotential& v) {
  double k = 0;
  for (double p : x.p) k += 0.5 * p * p;
  return k + v.value(x.q);
}

DecayTable dynamics_comparison(const TrigPotential& v, const std::vector<int>& b,
                               const std::vector<double>& q0, const std::vector<double>& dir,
                               const std::vector<double>& speeds, double dt) {
  TrigPotential reduced = v;
  // remove V_b = a_b e_b + a_{-b} e_{-b}
  auto it = v.coefficients().find(b);
  if (it != v.coefficients().end()) reduced.set_coefficient(b, cplx(0, 0));

  double bdir = 0;
  for (size_t i = 0; i < b.size(); ++i) bdir += b[i] * dir[i];

  DecayTable table;
  std::vector<double> lx, ly;
  for (double s : speeds) {
    PhasePoint start;
    start.q = q0;
    start.p.resize(dir.size());
    for (size_t i = 0; i < dir.size(); ++i) start.p[i] = s * dir[i];
    // the integrator must resolve the fast phase |b . p_0|
    const double dt_s = std::min(dt, 1.0 / (40.0 * std::max(1.0, std::abs(s * bdir))));
    PhasePoint a = integrate(start, v, 1.0, dt_s);
    PhasePoint c = integrate(start, reduced, 1.0, dt_s);
    DecayRow row;
    row.bp0 = std::abs(s * bdir);
    row.distance = phase_distance(a, c);
    table.rows.push_back(row);
    if (row.bp0 > 0 && row.distance > 0) {
      lx.push_back(std::log(row.bp0));
      ly.push_back(std::log(row.distance));
    }
  }
  table.slope_meaningful = std::abs(bdir) > 1e-12 && lx.size() >= 2;
  if (table.slope_meaningful) {
    const int n = static_cast<int>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    table.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

TrigPotential fejer_smooth(const TrigPotential& v, int m) {
  if (m < 1) throw contract_error("fejer_smooth: m must be >= 1");
  TrigPotential out(v.dim());
  for (const auto& [b, a] : v.coefficients()) {
    double damp = 1;
    for (int be : b) damp *= std::max(0.0, 1.0 - std::abs(be) / double(m));
    if (damp > 0) out.set_coefficient(b, a * damp);
  }
  return out;
}

GronwallReport gronwall_check(const PhasePoint& start, const TrigPotential& v1,
                              const TrigPotential& v2, double t, double dt) {
  GronwallReport rep;
  rep.epsilon = v1.sup_gradient_diff(v2);
  rep.lipschitz = v1.lipschitz_estimate();

  PhasePoint y = start, z = start;
  y.wrap();
  z.wrap();
  const long long steps = static_cast<long long>(std::llround(t / dt));
  double worst = -1e300;
  for (long long s = 1; s <= steps; ++s) {
    y = integrate(y, v1, dt, dt);
    z = integrate(z, v2, dt, dt);
    const double tcur = s * dt;
    const double bound = tcur * rep.epsilon * std::exp(tcur * rep.lipschitz);
    const double margin = phase_distance(y, z) - bound;
    worst = std::max(worst, margin);
  }
  rep.worst_margin = worst;
  rep.holds = worst <= 1e-9;
  return rep;
}

}  // namespace speclab
