#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speclab/flow.hpp"
#include "speclab/rng.hpp"

using namespace speclab;

namespace {

TrigPotential sample_potential() {
  TrigPotential v(2);
  v.set_coefficient({1, 0}, cplx(0.3, 0.1));
  v.set_coefficient({0, 1}, cplx(-0.2, 0.05));
  v.set_coefficient({1, 1}, cplx(0.1, 0.0));
  return v;
}

}  // namespace

TEST_CASE("potential is real-valued with an exact gradient") {
  TrigPotential v = sample_potential();
  Rng rng(601);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> q{rng.uniform(), rng.uniform()};
    // reality
    CHECK(std::abs(v.value(q)) < 1e6);
    // gradient vs finite differences
    auto g = v.gradient(q);
    for (int i = 0; i < 2; ++i) {
      const double h = 1e-6;
      auto qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      CHECK(g[i] == doctest::Approx((v.value(qp) - v.value(qm)) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("free flow is exact for any dt") {
  TrigPotential zero(2);
  PhasePoint x0;
  x0.q = {0.25, 0.5};
  x0.p = {1.3, -0.7};
  PhasePoint x1 = integrate(x0, zero, 1.0, 0.05);
  // Phi_0(q,p) = (q + p, p) with wrap
  PhasePoint expect;
  expect.q = {0.25 + 1.3, 0.5 - 0.7};
  expect.p = x0.p;
  expect.wrap();
  CHECK(phase_distance(x1, expect) < 1e-12);
}

TEST_CASE("stationary point of V with p = 0 stays put") {
  TrigPotential v(1);
  v.set_coefficient({1}, cplx(0.5, 0));  // V = cos(2 pi q), critical at q = 0, 1/2
  PhasePoint x0;
  x0.q = {0.5};
  x0.p = {0.0};
  PhasePoint x1 = integrate(x0, v, 1.0, 1e-3);
  CHECK(phase_distance(x1, x0) < 1e-12);
}

TEST_CASE("energy drift is second order in dt") {
  TrigPotential v = sample_potential();
  PhasePoint x0;
  x0.q = {0.1, 0.7};
  x0.p = {0.8, 0.4};
  const double e0 = energy(x0, v);
  double drift_prev = -1;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    PhasePoint x1 = integrate(x0, v, 1.0, dt);
    const double drift = std::abs(energy(x1, v) - e0);
    if (drift_prev > 0) CHECK(drift < 0.3 * drift_prev);  // ~ 4x per halving
    drift_prev = drift;
  }
}

TEST_CASE("reversibility") {
  TrigPotential v = sample_potential();
  PhasePoint x0;
  x0.q = {0.3, 0.9};
  x0.p = {0.5, -1.1};
  PhasePoint fwd = integrate(x0, v, 1.0, 1e-3);
  PhasePoint back = fwd;
  for (auto& p : back.p) p = -p;
  PhasePoint ret = integrate(back, v, 1.0, 1e-3);
  for (auto& p : ret.p) p = -p;
  CHECK(phase_distance(ret, x0) < 1e-9);
}

TEST_CASE("free pullback of generators (flow side)") {
  Rng rng(607);
  // b = 0 leaves the generator alone
  ClassicalGenerator g0;
  g0.b = {0, 0};
  g0.atoms = {{cplx(1, 0), {0.2, -0.1}}};
  ClassicalGenerator p0 = free_classical_pullback(g0, 0.7);
  CHECK(p0.atoms[0].xi[0] == g0.atoms[0].xi[0]);
  CHECK(p0.atoms[0].xi[1] == g0.atoms[0].xi[1]);
}

TEST_CASE("dynamics comparison decays like 1/|b.p0|") {
  TrigPotential v(1);
  v.set_coefficient({1}, cplx(0.2, 0.05));
  v.set_coefficient({2}, cplx(0.075, -0.025));

  auto table = dynamics_comparison(v, {2}, {0.2}, {1.0}, {8, 16, 32, 64, 128}, 1e-3);
  REQUIRE(table.slope_meaningful);
  CHECK(std::abs(table.slope + 1.0) <= 0.15);

  // V = V_b alone: reduced flow is free; table still reports distances
  TrigPotential vb(1);
  vb.set_coefficient({2}, cplx(0.15, -0.05));
  auto t2 = dynamics_comparison(vb, {2}, {0.2}, {1.0}, {8, 16, 32, 64, 128}, 1e-3);
  CHECK(t2.slope_meaningful);

  // b orthogonal to the ray: no slope asserted
  TrigPotential v2(2);
  v2.set_coefficient({0, 1}, cplx(0.3, 0));
  auto t3 = dynamics_comparison(v2, {0, 1}, {0.1, 0.2}, {1.0, 0.0}, {8, 16, 32}, 1e-3);
  CHECK_FALSE(t3.slope_meaningful);
}

TEST_CASE("fejer smoothing") {
  TrigPotential v(1);
  v.set_coefficient({1}, cplx(0.5, 0.1));
  v.set_coefficient({3}, cplx(0.2, 0.0));

  // constant potential unchanged
  TrigPotential c(1);
  c.set_coefficient({0}, cplx(2.0, 0));
  TrigPotential cs = fejer_smooth(c, 4);
  CHECK(cs.value({0.3}) == doctest::Approx(c.value({0.3})));

  // coefficients damped by (1 - |k|/m)+ and grad error monotone in m
  TrigPotential s4 = fejer_smooth(v, 4);
  CHECK(std::abs(s4.coefficients().at({1}) - cplx(0.5, 0.1) * 0.75) < 1e-15);
  CHECK(std::abs(s4.coefficients().at({3}) - cplx(0.2, 0.0) * 0.25) < 1e-15);
  double prev = 1e300;
  for (int m : {4, 8, 16, 32}) {
    const double err = v.sup_gradient_diff(fejer_smooth(v, m), 256);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("gronwall bound holds on trajectory pairs") {
  Rng rng(613);
  TrigPotential v(1);
  v.set_coefficient({1}, cplx(0.4, 0.1));
  v.set_coefficient({2}, cplx(0.15, -0.05));
  for (int t = 0; t < 10; ++t) {
    TrigPotential vm = fejer_smooth(v, 2 + int(rng.next_u64() % 6));
    PhasePoint x0;
    x0.q = {rng.uniform()};
    x0.p = {2 * rng.uniform() - 1};
    auto rep = gronwall_check(x0, v, vm, 1.0, 1e-3);
    CHECK(rep.holds);
  }
}
