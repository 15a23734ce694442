#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "speclab/torusq.hpp"
#include "speclab/rng.hpp"

using namespace speclab;

namespace {

ClassicalGenerator make_gen(std::vector<int> b, std::vector<std::pair<cplx, std::vector<double>>> atoms) {
  ClassicalGenerator g;
  g.b = std::move(b);
  for (auto& [c, xi] : atoms) g.atoms.push_back({c, xi});
  return g;
}

ClassicalGenerator random_inball_gen(Rng& rng, int dim) {
  std::vector<int> b(dim);
  for (auto& x : b) x = int(rng.next_u64() % 3) - 1;
  std::vector<double> xi(dim);
  for (auto& x : xi) x = (rng.uniform() - 0.5) * 0.25;  // |xi| < 0.125 < 1/(2pi)
  return make_gen(b, {{cplx(0.5 + rng.uniform(), rng.uniform() - 0.5), xi}});
}

}  // namespace

TEST_CASE("quantize on basis vectors reproduces the Weyl formula") {
  // e_b (x) 1: pure shift
  auto shift = make_gen({1}, {{cplx(1, 0), {0.0}}});
  TorusOperator qs = quantize(shift, 0.5, 4);
  Matrix dense = to_dense(qs);
  // column of a=0 (index 4 in window [-4..4]) has 1 at row a=1 (index 5)
  CHECK(dense(5, 4) == cplx(1, 0));
  CHECK(std::abs(dense(4, 4)) == 0.0);

  // 1 (x) e^{i xi p}: diagonal with phase e^{2 pi i hbar xi . a}
  auto diag = make_gen({0}, {{cplx(1, 0), {0.1}}});
  TorusOperator qd = quantize(diag, 0.5, 4);
  Matrix dd = to_dense(qd);
  for (int a = -4; a <= 4; ++a) {
    const cplx expect = std::exp(cplx(0, 2 * M_PI * 0.5 * 0.1 * a));
    CHECK(std::abs(dd(a + 4, a + 4) - expect) < 1e-14);
  }

  // general e_b (x) h: h evaluated at the midpoint 2 pi hbar (a + b/2)
  auto gen = make_gen({2}, {{cplx(0.3, -0.2), {0.07}}});
  TorusOperator qg = quantize(gen, 0.3, 5);
  Matrix dg = to_dense(qg);
  for (int a = -5; a <= 3; ++a) {
    const cplx expect = cplx(0.3, -0.2) * std::exp(cplx(0, 0.07 * 2 * M_PI * 0.3 * (a + 1.0)));
    CHECK(std::abs(dg(a + 2 + 5, a + 5) - expect) < 1e-14);
  }
}

TEST_CASE("star-preservation: Q(f)^* = Q(conj f) exactly") {
  Rng rng(501);
  auto f = random_inball_gen(rng, 2);
  TorusOperator q = quantize(f, 0.4, 3);
  TorusOperator qc = quantize(f.conjugate(), 0.4, 3);
  CHECK(Matrix::dist(to_dense(q).adjoint(), to_dense(qc)) < 1e-13);
}

TEST_CASE("op_product agrees with the dense window product") {
  Rng rng(503);
  for (int trial = 0; trial < 4; ++trial) {
    auto f = random_inball_gen(rng, 1);
    auto g = random_inball_gen(rng, 1);
    const double hbar = 0.37;
    const int cutoff = 6;
    TorusOperator qf = quantize(f, hbar, cutoff), qg = quantize(g, hbar, cutoff);
    Matrix lhs = to_dense(op_product(qf, qg));
    Matrix rhs = to_dense(qf) * to_dense(qg);
    // rows within reach of both shifts are exact; boundary rows differ by
    // truncation, so compare on the interior
    const int margin = 3;
    double worst = 0;
    for (int r = 0; r < lhs.dim(); ++r) {
      if (std::abs(r - cutoff) > cutoff - margin) continue;
      for (int c = 0; c < lhs.dim(); ++c)
        if (std::abs(c - cutoff) <= cutoff - margin)
          worst = std::max(worst, std::abs(lhs(r, c) - rhs(r, c)));
    }
    CHECK(worst < 1e-12);
  }

  // shift * shift = shift by sum
  auto s1 = make_gen({1}, {{cplx(1, 0), {0.0}}});
  auto s2 = make_gen({2}, {{cplx(1, 0), {0.0}}});
  TorusOperator p = op_product(quantize(s1, 0.5, 5), quantize(s2, 0.5, 5));
  REQUIRE(p.terms().size() == 1);
  CHECK(p.terms()[0].b[0] == 3);

  // O * identity = O
  auto idgen = make_gen({1}, {{cplx(1, 0), {0.0}}});
  auto one = make_gen({1}, {{cplx(1, 0), {0.0}}});
  TorusOperator q = quantize(random_inball_gen(rng, 1), 0.5, 5);
  TorusOperator ident = quantize(make_gen({0}, {{cplx(1, 0), {0.0}}}), 0.5, 5);
  CHECK(Matrix::dist(to_dense(op_product(q, ident)), to_dense(q)) < 1e-13);
}

TEST_CASE("op_norm: shifts, diagonals, and generator sup") {
  // pure shift has norm 1
  auto s = make_gen({1}, {{cplx(1, 0), {0.0}}});
  auto nb = op_norm(quantize(s, 0.5, 6), 2);
  CHECK(nb.inner == doctest::Approx(1.0));
  CHECK(nb.outer == doctest::Approx(1.0));

  // diagonal cos symbol: sup over window of |cos| <= 1
  auto c = make_gen({0}, {{cplx(0.5, 0), {0.11}}, {cplx(0.5, 0), {-0.11}}});
  auto nc = op_norm(quantize(c, 0.5, 24), 2);
  CHECK(nc.outer <= 1.0 + 1e-12);
  CHECK(nc.inner > 0.9);

  // single generator: norm = sup_a |h(2 pi hbar (a + b/2))|
  auto g = make_gen({1}, {{cplx(0.7, 0.1), {0.09}}});
  auto ng = op_norm(quantize(g, 0.5, 8), 2);
  CHECK(ng.outer == doctest::Approx(std::abs(cplx(0.7, 0.1))));

  // multi-shift operator: power iteration vs dense singular value
  Rng rng(507);
  auto f1 = random_inball_gen(rng, 1);
  auto f2 = random_inball_gen(rng, 1);
  TorusOperator sum = quantize(f1, 0.4, 6) + quantize(f2, 0.4, 6);
  auto nn = op_norm(sum, 0);
  CHECK(nn.outer == doctest::Approx(operator_norm(to_dense(sum))).epsilon(1e-8));
}

TEST_CASE("embedding maps: composition functoriality is exact on dyadic data") {
  Lattice base{{1.0, 2.0}};
  Refinement r2 = Refinement::equal_subdivision(base, 2);
  Lattice mid = r2.apply(base);
  Refinement r2b = Refinement::equal_subdivision(mid, 2);
  Refinement r4 = Refinement::compose(base, r2, r2b);

  auto g = make_gen({1, -2}, {{cplx(0.5, 0.25), {0.125, -0.0625}}});
  ClassicalGenerator via2 = embed_classical(embed_classical(g, r2), r2b);
  ClassicalGenerator direct = embed_classical(g, r4);
  REQUIRE(via2.b == direct.b);
  for (size_t j = 0; j < via2.atoms.size(); ++j) {
    CHECK(via2.atoms[j].c == direct.atoms[j].c);
    for (size_t i = 0; i < via2.atoms[j].xi.size(); ++i)
      CHECK(via2.atoms[j].xi[i] == direct.atoms[j].xi[i]);
  }

  // S specializes to (xi/2, xi/2) on an equal bisection
  Refinement bis = Refinement::equal_subdivision(Lattice{{1.0}}, 2);
  auto sx = bis.S({0.3});
  CHECK(sx[0] == doctest::Approx(0.15));
  CHECK(sx[1] == doctest::Approx(0.15));

  // added edges extend by zero
  Refinement add = Refinement::add_edges(Lattice{{1.0}}, {0.7});
  auto ax = add.S({0.3});
  REQUIRE(ax.size() == 2);
  CHECK(ax[1] == 0.0);
  CHECK(add.T({5})[1] == 0);
}

TEST_CASE("intertwining F_Q(O) u = u O on window basis vectors") {
  Rng rng(509);
  Lattice base{{1.0}};
  for (int parts : {2, 3}) {
    Refinement ref = Refinement::equal_subdivision(base, parts);
    auto g = random_inball_gen(rng, 1);
    TorusOperator o = quantize(g, 0.45, 6);
    CHECK(intertwining_defect(o, ref, 6 * parts) < 1e-12);
  }
  // addition of an edge is also exact
  Refinement add = Refinement::add_edges(base, {1.0});
  auto g = random_inball_gen(rng, 1);
  CHECK(intertwining_defect(quantize(g, 0.45, 5), add, 5) < 1e-14);
}

TEST_CASE("free quantum evolution: closed form vs dense conjugation") {
  Rng rng(511);
  const double hbar = 0.5, t = 0.3;
  const int cutoff = 8;
  auto g = random_inball_gen(rng, 1);
  TorusOperator o = quantize(g, hbar, cutoff);

  // t = 0 identity, b = 0 unchanged
  CHECK(Matrix::dist(to_dense(free_quantum_evolution(o, 0.0)), to_dense(o)) < 1e-14);
  auto diag = make_gen({0}, {{cplx(0.8, 0), {0.1}}});
  TorusOperator od = quantize(diag, hbar, cutoff);
  CHECK(Matrix::dist(to_dense(free_quantum_evolution(od, 1.2)), to_dense(od)) < 1e-14);

  TorusOperator evolved = free_quantum_evolution(o, t);
  // dense conjugation by exp(i t H0 / hbar), H0 psi_a = 2 pi^2 hbar^2 |a|^2
  std::vector<double> h0;
  for (int a = -cutoff; a <= cutoff; ++a) h0.push_back(2 * M_PI * M_PI * hbar * hbar * a * a);
  Matrix u = expm_i(HermitianMatrix::diag(h0), -t / hbar);
  Matrix conj = u * to_dense(o) * u.adjoint();
  Matrix lhs = to_dense(evolved);
  // compare away from the boundary rows
  double worst = 0;
  const int margin = 2;
  for (int r = margin; r < lhs.dim() - margin; ++r)
    for (int c = margin; c < lhs.dim() - margin; ++c)
      worst = std::max(worst, std::abs(lhs(r, c) - conj(r, c)));
  CHECK(worst < 1e-9);
}

TEST_CASE("free classical pullback matches pointwise sampling") {
  Rng rng(513);
  auto g = random_inball_gen(rng, 2);
  const double t = 0.8;
  ClassicalGenerator pulled = free_classical_pullback(g, t);
  for (int s = 0; s < 100; ++s) {
    std::vector<double> q{rng.uniform(), rng.uniform()};
    std::vector<double> p{4 * rng.uniform() - 2, 4 * rng.uniform() - 2};
    // (Phi_0^t)^* f (q,p) = f(q + t p, p)
    std::vector<double> qt{q[0] + t * p[0], q[1] + t * p[1]};
    CHECK(std::abs(g.value(qt, p) - pulled.value(q, p)) < 1e-12);
  }
}

TEST_CASE("injectivity witness") {
  Rng rng(517);
  std::vector<ClassicalGenerator> gens;
  for (int j = 0; j < 5; ++j) gens.push_back(random_inball_gen(rng, 1));
  auto rep = injectivity_witness(gens, 1.0 / 3, 24);
  CHECK(rep.smallest_singular_value > 1e-6);
  for (double n : rep.norms) CHECK(n > 0);
}

TEST_CASE("rieffel failure: norm 0 at hbar0, norm 1 at hbar_N") {
  const double hbar0 = 0.5;
  auto f = rieffel_failure_generator(1, hbar0);
  CHECK_FALSE(f.in_ball());

  auto n0 = op_norm(quantize(f, hbar0, 16), 0);
  CHECK(n0.outer < 1e-12);

  const int N = 8;
  const double hbarN = hbar0 * (1.0 + 1.0 / (4 * N));
  auto n1 = op_norm(quantize(f, hbarN, 16), 0);
  CHECK(n1.outer == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sdq residual curve: slopes and bound") {
  Rng rng(521);
  auto f = random_inball_gen(rng, 1);
  auto g = random_inball_gen(rng, 1);
  std::vector<double> hbars;
  for (int k = 1; k <= 6; ++k) hbars.push_back(std::pow(2.0, -k));
  auto curve = sdq_residual_curve(f, g, hbars, 24, 3);

  CHECK(curve.poisson_sign == -1);
  CHECK(curve.vn_slope > 0.9);
  CHECK(curve.vn_slope < 1.1);
  // Weyl midpoint quantization gives a second-order Dirac defect
  CHECK(curve.dirac_slope > 1.5);
  for (const auto& s : curve.samples) {
    CHECK(s.von_neumann <= s.vn_bound * (1 + 1e-9));
    if (s.hbar < 0.26) {
      // decay: each halving of hbar at least halves the residual (slope ~ 1)
    }
  }
  // residuals decay monotonically
  for (size_t i = 1; i < curve.samples.size(); ++i) {
    CHECK(curve.samples[i].von_neumann <= curve.samples[i - 1].von_neumann * 1.01);
    CHECK(curve.samples[i].dirac <= curve.samples[i - 1].dirac * 1.01);
  }

  // constant f: both residuals vanish identically
  auto constf = make_gen({0}, {{cplx(1, 0), {0.0}}});
  auto cc = sdq_residual_curve(constf, g, hbars, 24, 3);
  for (const auto& s : cc.samples) {
    CHECK(s.von_neumann < 1e-13);
    CHECK(s.dirac < 1e-13);
  }
}

TEST_CASE("rieffel0 and tower stability vs single-lattice jump") {
  // in-ball generator: tower norms stable over a 1% hbar interval at depth 4
  auto inball = make_gen({0}, {{cplx(0, -0.5), {0.12}}, {cplx(0, 0.5), {-0.12}}});
  Lattice base{{1.0}};
  const double h1 = 1.0 / 3;
  std::vector<double> hbars{h1 * 0.995, h1, h1 * 1.005};
  auto table = rieffel_tower_table(inball, base, hbars, 4, 24, 0);
  double tmin = 1e300, tmax = 0;
  for (const auto& s : table) {
    tmin = std::min(tmin, s.sup_over_tower);
    tmax = std::max(tmax, s.sup_over_tower);
  }
  CHECK((tmax - tmin) / tmax <= 0.05);

  // failure configuration: single-lattice norm jumps 0 -> O(1) across the interval
  const double hbar0 = 0.5;
  auto fail = rieffel_failure_generator(1, hbar0);
  std::vector<double> jam{hbar0 * 0.995, hbar0, hbar0 * 1.005};
  auto jtab = rieffel_tower_table(fail, base, jam, 4, 24, 0);
  double jmin = 1e300, jmax = 0;
  for (const auto& s : jtab) {
    jmin = std::min(jmin, s.single_lattice);
    jmax = std::max(jmax, s.single_lattice);
  }
  CHECK(jmin < 1e-10);
  CHECK(jmax > 0.5);

  // rieffel0: |Q_hbar(f)| approaches sup|f| as hbar -> 0; the window must
  // resolve the symbol argument range, so it grows like 1/hbar
  std::vector<double> small{0.5, 0.25, 0.125, 0.0625};
  auto r0 = rieffel0_curve(inball, small, 512, 0);
  double prev = 1e300;
  for (const auto& s : r0) {
    const double dev = std::abs(s.qnorm - s.supnorm);
    CHECK(dev <= prev * (1 + 1e-9));
    prev = dev;
  }
  CHECK(std::abs(r0.back().qnorm - r0.back().supnorm) < 0.05);
}

TEST_CASE("dyson vs exact") {
  // V = cos(2 pi q) = (e_1 + e_{-1})/2, norm 1; hbar = 1 so the tail bound
  // coincides with sum_{k>m} |t|^k ||V||^k / k!
  std::vector<std::pair<std::vector<int>, cplx>> pot{{{1}, cplx(0.5, 0)},
                                                     {{-1}, cplx(0.5, 0)}};
  // m = 0: partial sum is the identity; residual <= e^{|t| ||V||} - 1
  auto r0 = dyson_vs_exact(pot, 1.0, 0.2, 1.0, 0, 16);
  CHECK(r0.residual <= r0.tail_bound + 1e-4);

  // V = 0: both sides are the identity
  std::vector<std::pair<std::vector<int>, cplx>> zero{{{1}, cplx(0, 0)},
                                                      {{-1}, cplx(0, 0)}};
  auto rz = dyson_vs_exact(zero, 0.0, 0.2, 1.0, 1, 16);
  CHECK(rz.residual < 1e-10);

  // m = 3, t = 0.2: residual within the analytic tail bound + quadrature slack
  auto r3 = dyson_vs_exact(pot, 1.0, 0.2, 1.0, 3, 16);
  CHECK(r3.residual <= r3.tail_bound + 1e-4);
  CHECK(r3.residual < r0.residual);
}

TEST_CASE("free evolution out of the ball is tagged and rejected by towers") {
  // in-ball generator with nonzero b: evolution shifts xi by 2 pi t b
  ClassicalGenerator g;
  g.b = {1};
  g.atoms = {{cplx(1, 0), {0.1}}};
  REQUIRE(g.in_ball());
  ClassicalGenerator moved = free_classical_pullback(g, 1.0);
  CHECK(moved.evolved_out_of_ball);
  Lattice base{{1.0}};
  Refinement ref = Refinement::equal_subdivision(base, 2);
  CHECK_THROWS_AS(embed_classical(moved, ref), contract_error);
  CHECK_THROWS_AS(rieffel_tower_table(moved, base, {0.5}, 2, 8, 0), contract_error);

  // b = 0 stays put and keeps its membership
  ClassicalGenerator d0;
  d0.b = {0};
  d0.atoms = {{cplx(1, 0), {0.1}}};
  CHECK_FALSE(free_classical_pullback(d0, 3.0).evolved_out_of_ball);
}

TEST_CASE("sdq residuals on a two-edge lattice (d = 2 windows)") {
  ClassicalGenerator f, g;
  f.b = {1, 0};
  f.atoms = {{cplx(0.8, 0.1), {0.1, -0.05}}};
  g.b = {0, 1};
  g.atoms = {{cplx(0.6, -0.2), {-0.07, 0.11}}};
  auto curve = sdq_residual_curve(f, g, {0.25, 0.125, 0.0625}, 8, 3);
  CHECK(curve.poisson_sign == -1);
  for (size_t i = 1; i < curve.samples.size(); ++i) {
    CHECK(curve.samples[i].von_neumann < curve.samples[i - 1].von_neumann);
    CHECK(curve.samples[i].dirac < curve.samples[i - 1].dirac);
  }
  for (const auto& s : curve.samples) CHECK(s.von_neumann <= s.vn_bound * (1 + 1e-9));
}
