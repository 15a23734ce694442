#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "speclab/oneloop.hpp"
#include "speclab/rng.hpp"

using namespace speclab;

namespace {
TestFunction quartic() {
  // x^4 + x^2: (f')^[1] > 0 everywhere on positive spectra
  return TestFunction::polynomial({0, 0, 1, 0, 1});
}
}  // namespace

TEST_CASE("propagator values") {
  // f = x^2: G = 1/2 everywhere
  OneLoopContext c2(HermitianMatrix::diag({1, 2}), TestFunction::monomial(2), 2);
  CHECK(c2.prop()(0, 0) == doctest::Approx(0.5));
  CHECK(c2.prop()(0, 1) == doctest::Approx(0.5));

  // f = x^3 on diag(1,2): G = 1/(3(lam_k+lam_l))
  OneLoopContext c3(HermitianMatrix::diag({1, 2}), TestFunction::monomial(3), 2);
  CHECK(c3.prop()(0, 0) == doctest::Approx(1.0 / 6));
  CHECK(c3.prop()(0, 1) == doctest::Approx(1.0 / 9));
  CHECK(c3.prop()(1, 1) == doctest::Approx(1.0 / 12));
  CHECK(c3.prop()(1, 0) == doctest::Approx(c3.prop()(0, 1)));

  // degenerate spectrum with f = x^2 still fine
  OneLoopContext cd(HermitianMatrix::diag({1, 1, 2}), TestFunction::monomial(2), 3);
  CHECK(cd.prop()(0, 1) == doctest::Approx(0.5));

  // f = -x^2 violates positivity
  CHECK_THROWS_AS(OneLoopContext(HermitianMatrix::diag({1, 2}),
                                 TestFunction::polynomial({0, 0, -1}), 2),
                  contract_error);
}

TEST_CASE("single-vertex amplitude equals the bracket") {
  Rng rng(301);
  const int dim = 3;
  HermitianMatrix d = random_hermitian(rng, dim);
  HermitianMatrix shift(d.matrix() +
                        Matrix::diag({5, 5, 5}));  // positive spectrum for x^3-type f
  OneLoopContext ctx(shift, quartic(), dim);
  for (int n = 1; n <= 3; ++n) {
    std::vector<Matrix> vs;
    for (int j = 0; j < n; ++j) vs.push_back(random_hermitian_unit(rng, dim).matrix());
    cplx amp = amplitude(ctx, Diagram::single_vertex(n), vs);
    cplx br = bracket(shift, quartic(), vs);
    CHECK(std::abs(amp - br) < 1e-9 * std::max(1.0, std::abs(br)));
  }
}

TEST_CASE("engine matches the three explicit two-point closed forms") {
  Rng rng(303);
  const int dim = 3;
  HermitianMatrix d = HermitianMatrix::diag({1.0, 1.7, 2.4});
  OneLoopContext ctx(d, quartic(), dim);
  Matrix v1 = random_hermitian_unit(rng, dim).matrix();
  Matrix v2 = random_hermitian_unit(rng, dim).matrix();

  struct Case {
    TwoPointKind kind;
    Diagram diag;
  };
  std::vector<Case> cases{{TwoPointKind::chain, Diagram::two_point_chain()},
                          {TwoPointKind::bubble, Diagram::two_point_bubble()},
                          {TwoPointKind::tadpole, Diagram::tadpole(2, 0)}};
  for (auto& c : cases) {
    cplx closed = explicit_two_point(ctx, c.kind, v1, v2);
    cplx engine = amplitude(ctx, c.diag, {v1, v2});
    CHECK(std::abs(closed - engine) < 1e-10 * std::max(1.0, std::abs(closed)));
  }
}

TEST_CASE("hand value: eq 2ptA chain at N=2 with f=x^3") {
  HermitianMatrix d = HermitianMatrix::diag({1, 2});
  OneLoopContext ctx(d, TestFunction::monomial(3), 2);
  Matrix v = Matrix::diag({1, -1});
  // closed form: sum_{i,k} (f')^[2](i,i,k) (f')^[2](i,k,k) v_ii v_kk G_ik^2 with (f')^[2]=3
  // G 11=1/6, 12=1/9, 22=1/12
  const double expect = 9.0 * (1.0 / 36 - 1.0 / 81 - 1.0 / 81 + 1.0 / 144);
  cplx got = explicit_two_point(ctx, TwoPointKind::chain, v, v);
  CHECK(got.real() == doctest::Approx(expect).epsilon(1e-12));
  cplx eng = amplitude(ctx, Diagram::two_point_chain(), {v, v});
  CHECK(eng.real() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bubble amplitude vanishes for f=x^2") {
  OneLoopContext ctx(HermitianMatrix::diag({1, 2, 3}), TestFunction::monomial(2), 3);
  Rng rng(307);
  Matrix v1 = random_hermitian_unit(rng, 3).matrix();
  Matrix v2 = random_hermitian_unit(rng, 3).matrix();
  CHECK(std::abs(amplitude(ctx, Diagram::two_point_bubble(), {v1, v2})) == 0.0);
  CHECK(std::abs(explicit_two_point(ctx, TwoPointKind::bubble, v1, v2)) == 0.0);
}

TEST_CASE("chain amplitude is independent of N once fields fit (irrelevant diagram)") {
  // fields supported in the top-left 2x2 block of a diagonal D
  HermitianMatrix d = HermitianMatrix::diag({1.0, 1.5, 2.0, 2.5, 3.0});
  Matrix v(5);
  v(0, 0) = 1.0;
  v(1, 1) = -0.5;
  v(0, 1) = cplx(0.2, 0.1);
  v(1, 0) = cplx(0.2, -0.1);
  cplx prev;
  for (int N = 2; N <= 5; ++N) {
    OneLoopContext ctx(d, quartic(), N);
    cplx amp = amplitude(ctx, Diagram::two_point_chain(), {v, v});
    if (N > 2) CHECK(std::abs(amp - prev) == 0.0);
    prev = amp;
  }
}

TEST_CASE("edge sign: one-edge diagram carries a minus") {
  // single vertex of degree 3 with a self-loop and one external edge
  HermitianMatrix d = HermitianMatrix::diag({1, 2});
  OneLoopContext ctx(d, quartic(), 2);
  Matrix v = Matrix::diag({1, 1});
  Diagram g = Diagram::tadpole(1, 0);
  // amplitude = - sum_{i,j} (f')^[2](i,i,j) v_ii G_ij  (self-loop deltas merge indices)
  double expect = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      expect -= ctx.vertex_factor({i, i, j}).real() * ctx.prop()(i, j);
  cplx got = amplitude(ctx, g, {v});
  CHECK(got.real() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("propagator symmetry is exact") {
  OneLoopContext ctx(HermitianMatrix::diag({0.5, 1.1, 2.2, 3.7}), quartic(), 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) CHECK(ctx.prop()(k, l) == ctx.prop()(l, k));
}

TEST_CASE("quantum bracket: trivial and cyclicity") {
  Rng rng(311);
  const int dim = 3;
  HermitianMatrix d = HermitianMatrix::diag({1, 2, 3});
  OneLoopContext ctx(d, quartic(), dim);

  // all fields zero
  CHECK(std::abs(quantum_bracket(ctx, {Matrix(dim), Matrix(dim)}, 2)) == 0.0);

  // n = 2 equals bubble + both tadpole markings
  Matrix v1 = random_hermitian_unit(rng, dim).matrix();
  Matrix v2 = random_hermitian_unit(rng, dim).matrix();
  cplx qb = quantum_bracket(ctx, {v1, v2}, 2);
  cplx parts = amplitude(ctx, Diagram::two_point_bubble(), {v1, v2}) +
               amplitude(ctx, Diagram::tadpole(2, 0), {v1, v2}) +
               amplitude(ctx, Diagram::tadpole(2, 1), {v1, v2});
  CHECK(std::abs(qb - parts) < 1e-12 * std::max(1.0, std::abs(parts)));

  // cyclicity at n = 2 and n = 3
  CHECK(std::abs(quantum_bracket(ctx, {v2, v1}, 2) - qb) <
        1e-10 * std::max(1.0, std::abs(qb)));
  Matrix v3 = random_hermitian_unit(rng, dim).matrix();
  cplx q3 = quantum_bracket(ctx, {v1, v2, v3}, 3);
  cplx q3r = quantum_bracket(ctx, {v2, v3, v1}, 3);
  CHECK(std::abs(q3 - q3r) < 1e-10 * std::max(1.0, std::abs(q3)));
}

TEST_CASE("ward identities") {
  Rng rng(313);
  const int dim = 3;
  HermitianMatrix d = HermitianMatrix::diag({1, 2, 3});
  OneLoopContext ctx(d, quartic(), dim);

  WardInputs in;
  in.fields = {random_hermitian_unit(rng, dim).matrix(),
               random_hermitian_unit(rng, dim).matrix()};
  in.a = random_hermitian_unit(rng, dim).matrix();
  in.v_max = 2;

  // a = identity: all three residuals vanish
  WardInputs id = in;
  id.a = Matrix::identity(dim);
  CHECK(ward_check(ctx, WardKind::vertex, id).residual < 1e-12);
  CHECK(ward_check(ctx, WardKind::gauge_edge, id).residual < 1e-12);
  CHECK(ward_check(ctx, WardKind::quantum, id).residual < 1e-12);

  auto rv = ward_check(ctx, WardKind::vertex, in);
  CHECK(rv.residual <= 1e-9 * rv.scale);
  auto rg = ward_check(ctx, WardKind::gauge_edge, in);
  CHECK(rg.residual <= 1e-9 * rg.scale);
  auto rq = ward_check(ctx, WardKind::quantum, in);
  CHECK(rq.residual <= 1e-9 * rq.scale);
}

TEST_CASE("quantum ward at n = 3") {
  Rng rng(317);
  const int dim = 3;
  OneLoopContext ctx(HermitianMatrix::diag({1, 2, 3}), quartic(), dim);
  WardInputs in;
  in.fields = {random_hermitian_unit(rng, dim).matrix(),
               random_hermitian_unit(rng, dim).matrix(),
               random_hermitian_unit(rng, dim).matrix()};
  in.a = random_hermitian_unit(rng, dim).matrix();
  in.v_max = 3;
  auto r = ward_check(ctx, WardKind::quantum, in);
  CHECK(r.residual <= 1e-9 * r.scale);
}

TEST_CASE("amplitude size guard") {
  HermitianMatrix d = HermitianMatrix::diag({1, 2, 3, 4, 5, 6, 7, 8});
  OneLoopContext ctx(d, quartic(), 8);
  // a 10-external single vertex has 10 free classes: 8^10 > 1e8
  std::vector<Matrix> vs(10, Matrix::identity(8));
  CHECK_THROWS_AS(amplitude(ctx, Diagram::single_vertex(10), vs), size_error);
}
