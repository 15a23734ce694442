// Experiment runner: wraps the module report operations behind subcommands,
// with seeded randomness and machine-readable JSON/CSV outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "speclab/expansion.hpp"
#include "speclab/flow.hpp"
#include "speclab/json_io.hpp"
#include "speclab/moi.hpp"
#include "speclab/oneloop.hpp"
#include "speclab/rng.hpp"
#include "speclab/ssf.hpp"
#include "speclab/torusq.hpp"

using namespace speclab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssert = 2;
constexpr int kExitUsage = 64;

struct Output {
  json summary;
  bool any_failed = false;

  Output(const std::string& subcommand, uint64_t seed) {
    summary["schema"] = 1;
    summary["subcommand"] = subcommand;
    summary["seed"] = seed;
    summary["config"] = json::object();
    summary["checks"] = json::array();
    summary["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
  }

  void check(const std::string& name, bool pass, double value, double tolerance) {
    json c;
    c["check"] = name;
    c["pass"] = pass;
    c["value"] = format_double(value);
    c["tolerance"] = format_double(tolerance);
    summary["checks"].push_back(c);
    if (!pass) any_failed = true;
  }

  void record(const std::string& key, const json& v) { summary[key] = v; }
  void config(const std::string& key, const json& v) { summary["config"][key] = v; }

  int finish(const std::string& out_path) {
    summary["status"] = any_failed ? "fail" : "pass";
    const std::string text = summary.dump(2) + "\n";
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_path);
      f << text;
    }
    return any_failed ? kExitAssert : kExitOk;
  }
};

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  if (path.empty()) return;
  std::ofstream f(path);
  f << header << "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << format_double(r[i]);
    f << "\n";
  }
}

TestFunction make_function(const std::string& family) {
  if (family == "gaussian") return TestFunction::gaussian();
  if (family == "x2") return TestFunction::monomial(2);
  if (family == "x3") return TestFunction::monomial(3);
  if (family == "x4") return TestFunction::monomial(4);
  if (family == "x4+x2") return TestFunction::polynomial({0, 0, 1, 0, 1});
  throw contract_error("unknown function family: " + family);
}

UniversalForm small_one_form(Rng& rng, const HermitianMatrix& d, int dim, double target) {
  Matrix x = random_matrix(rng, dim), y = random_matrix(rng, dim);
  UniversalForm a0 = UniversalForm::hermitian_one_form(x, y);
  const double nrm = operator_norm(pi_D(a0, d));
  const double s = nrm > 0 ? target / nrm : 1.0;
  return UniversalForm::hermitian_one_form(x * cplx(s, 0), y);
}

int run_expand(uint64_t seed, int dim, int K, const std::string& ffam, const std::string& out,
               const std::string& csv) {
  Output o("expand", seed);
  o.config("dim", dim);
  o.config("K", K);
  o.config("f", ffam);
  Rng rng(seed);
  HermitianMatrix d = random_hermitian(rng, dim);
  TestFunction f = make_function(ffam);
  UniversalForm a = small_one_form(rng, d, dim, 0.2);

  auto rep = expand(d, f, a, K);
  o.check("remainder_direct_equals_formula", rep.remainders_agree,
          std::abs(rep.remainder_direct - rep.remainder_formula), 1e-7 * rep.scale);
  o.record("lhs", json::array({rep.lhs.real(), rep.lhs.imag()}));
  o.record("tk_size", rep.tk_size);

  std::vector<std::vector<double>> rows;
  for (int k = 0; k < K; ++k)
    rows.push_back({double(k + 1), rep.cs_terms[k].real(), rep.ym_terms[k].real(),
                    rep.partial[k].real(), std::abs(rep.lhs - rep.partial[k])});
  write_csv(csv, "k,cs,ym,partial,remainder", rows);
  return o.finish(out);
}

int run_cocycle_check(uint64_t seed, int dim, int n_max, const std::string& out) {
  Output o("cocycle-check", seed);
  o.config("dim", dim);
  o.config("n_max", n_max);
  Rng rng(seed);
  HermitianMatrix d = random_hermitian(rng, dim);
  CocycleContext ctx(d, TestFunction::gaussian());

  auto tuple = [&](int count) {
    std::vector<AlgebraElement> t;
    for (int j = 0; j < count; ++j)
      t.push_back(AlgebraElement::wrap(random_hermitian_unit(rng, dim).matrix()));
    return t;
  };

  for (int n = 1; n <= n_max; n += 2) {
    auto t = tuple(n + 2);
    const cplx lhs = b_op(ctx.phi(n))(t);
    const cplx rhs = ctx.phi(n + 1)(t);
    const double scale = std::max(1.0, std::abs(rhs));
    o.check("b_phi_" + std::to_string(n), std::abs(lhs - rhs) <= 1e-9 * scale,
            std::abs(lhs - rhs), 1e-9 * scale);
  }
  for (int n = 2; n <= n_max; n += 2) {
    auto t = tuple(n + 2);
    const double v = std::abs(b_op(ctx.phi(n))(t));
    o.check("b_phi_even_" + std::to_string(n), v <= 1e-9, v, 1e-9);
  }
  for (int k = 1; k <= 2; ++k) {
    auto t = tuple(2 * k + 1);
    const cplx v1 = b_op(ctx.psi_tilde(k))(t);
    const cplx v2 = B_op(ctx.psi_tilde(k + 1))(t);
    const double scale = std::max({1.0, std::abs(v1), std::abs(v2)});
    o.check("bB_cocycle_k" + std::to_string(k), std::abs(v1 + v2) <= 1e-9 * scale,
            std::abs(v1 + v2), 1e-9 * scale);
  }
  return o.finish(out);
}

int run_oneloop(uint64_t seed, int dim, int v_max, const std::string& ffam,
                const std::string& out) {
  Output o("oneloop", seed);
  o.config("dim", dim);
  o.config("v_max", v_max);
  o.config("f", ffam);
  Rng rng(seed);
  std::vector<double> spec(dim);
  for (int i = 0; i < dim; ++i) spec[i] = i + 1.0;
  HermitianMatrix d = HermitianMatrix::diag(spec);
  OneLoopContext ctx(d, make_function(ffam), dim);

  Matrix v1 = random_hermitian_unit(rng, dim).matrix();
  Matrix v2 = random_hermitian_unit(rng, dim).matrix();
  struct Case {
    const char* name;
    TwoPointKind kind;
    Diagram diag;
  };
  std::vector<Case> cases{{"chain", TwoPointKind::chain, Diagram::two_point_chain()},
                          {"bubble", TwoPointKind::bubble, Diagram::two_point_bubble()},
                          {"tadpole", TwoPointKind::tadpole, Diagram::tadpole(2, 0)}};
  json amps = json::object();
  for (auto& c : cases) {
    const cplx closed = explicit_two_point(ctx, c.kind, v1, v2);
    const cplx engine = amplitude(ctx, c.diag, {v1, v2});
    const double scale = std::max(1.0, std::abs(closed));
    o.check(std::string("engine_matches_") + c.name, std::abs(closed - engine) <= 1e-10 * scale,
            std::abs(closed - engine), 1e-10 * scale);
    amps[c.name] = json::array({closed.real(), closed.imag()});
  }
  o.record("amplitudes", amps);

  WardInputs in;
  in.fields = {v1, v2};
  in.a = random_hermitian_unit(rng, dim).matrix();
  in.v_max = v_max;
  auto rv = ward_check(ctx, WardKind::vertex, in);
  o.check("ward_vertex", rv.residual <= 1e-9 * rv.scale, rv.residual, 1e-9 * rv.scale);
  auto rg = ward_check(ctx, WardKind::gauge_edge, in);
  o.check("ward_gauge_edge", rg.residual <= 1e-9 * rg.scale, rg.residual, 1e-9 * rg.scale);
  auto rq = ward_check(ctx, WardKind::quantum, in);
  o.check("ward_quantum", rq.residual <= 1e-9 * rq.scale, rq.residual, 1e-9 * rq.scale);

  const cplx qb = quantum_bracket(ctx, {v1, v2}, v_max);
  const cplx qr = quantum_bracket(ctx, {v2, v1}, v_max);
  o.check("quantum_bracket_cyclicity", std::abs(qb - qr) <= 1e-10 * std::max(1.0, std::abs(qb)),
          std::abs(qb - qr), 1e-10 * std::max(1.0, std::abs(qb)));
  return o.finish(out);
}

int run_ssf(uint64_t seed, int dim, int n, const json& fixtures, const std::string& out,
            const std::string& csv) {
  Output o("ssf", seed);
  o.config("dim", dim);
  o.config("n", n);
  Rng rng(seed);
  // matrices may come from JSON fixtures ([[ [re,im], .. ], ..] row-major)
  HermitianMatrix h = fixtures.contains("H") ? HermitianMatrix(matrix_from_json(fixtures["H"]))
                                             : random_hermitian(rng, dim);
  HermitianMatrix v = fixtures.contains("V") ? HermitianMatrix(matrix_from_json(fixtures["V"]))
                                             : random_hermitian_unit(rng, dim);
  o.record("H", matrix_to_json(h.matrix()));
  o.record("V", matrix_to_json(v.matrix()));

  SteppedFunction eta = eta_one(h, v);
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < eta.breakpoints.size(); ++i)
    rows.push_back({eta.breakpoints[i], double(eta.values[i + 1])});
  write_csv(csv, "breakpoint,value_right_of", rows);

  for (auto [name, f] : std::vector<std::pair<std::string, TestFunction>>{
           {"x2", TestFunction::monomial(2)}, {"gaussian", TestFunction::gaussian()}}) {
    auto rep = trace_formula_check(h, v, f, 1);
    o.check("trace_formula_n1_" + name, rep.residual <= 1e-10 * rep.scale, rep.residual,
            1e-10 * rep.scale);
  }
  for (int k = 2; k <= n; ++k) {
    auto rep = trace_formula_check(h, v, TestFunction::gaussian(), k);
    o.check("remainder_paths_n" + std::to_string(k), rep.residual <= 1e-8 * rep.scale,
            rep.residual, 1e-8 * rep.scale);
  }
  return o.finish(out);
}

int run_moi_check(uint64_t seed, int dim, int n_max, const std::string& out) {
  Output o("moi-check", seed);
  o.config("dim", dim);
  o.config("n_max", n_max);
  Rng rng(seed);
  auto f = TestFunction::gaussian();

  for (int n = 1; n <= n_max; ++n) {
    HermitianMatrix h = random_hermitian(rng, dim);
    HermitianMatrix v = random_hermitian_unit(rng, dim);
    auto pair = taylor_remainder(h, v, f, n);
    const double scale = std::max(1.0, pair.direct.max_abs());
    const double rd = Matrix::dist(pair.direct, pair.moi_form);
    o.check("remainder_n" + std::to_string(n), rd <= 1e-8 * scale, rd, 1e-8 * scale);
  }
  for (int n = 1; n <= std::min(3, n_max); ++n) {
    std::vector<HermitianMatrix> hs;
    for (int j = 0; j <= n; ++j) hs.push_back(random_hermitian(rng, 3));
    std::vector<Matrix> vs;
    for (int j = 0; j < n; ++j) vs.push_back(random_hermitian_unit(rng, 3).matrix());
    MoiContext ctx(hs, f);
    auto pair = change_of_variables(ctx, vs);
    const double scale = std::max(1.0, pair.lhs.max_abs());
    const double rd = Matrix::dist(pair.lhs, pair.rhs);
    o.check("change_of_variables_n" + std::to_string(n), rd <= 1e-8 * scale, rd, 1e-8 * scale);
  }
  return o.finish(out);
}

int run_torus_sdq(uint64_t seed, int dims, int cutoff, int depth,
                  const std::vector<double>& hbars, bool rieffel_failure, const std::string& out,
                  const std::string& csv) {
  Output o("torus-sdq", seed);
  o.config("dims", dims);
  o.config("cutoff", cutoff);
  o.config("depth", depth);
  {
    json grid = json::array();
    for (double h : hbars) grid.push_back(h);
    o.config("hbar_grid", grid);
  }
  o.config("rieffel_failure", rieffel_failure);
  Rng rng(seed);

  if (rieffel_failure) {
    const double hbar0 = 0.5;
    auto fail = rieffel_failure_generator(dims, hbar0);
    const double n0 = op_norm(quantize(fail, hbar0, cutoff), 0).outer;
    const int bigN = 8;
    const double hbarN = hbar0 * (1.0 + 1.0 / (4 * bigN));
    const double n1 = op_norm(quantize(fail, hbarN, cutoff), 0).outer;
    o.check("rieffel_failure_zero_at_hbar0", n0 < 1e-12, n0, 1e-12);
    o.check("rieffel_failure_one_at_hbarN", std::abs(n1 - 1.0) < 1e-12, n1, 1.0);
    return o.finish(out);
  }

  auto rand_gen = [&](int d) {
    ClassicalGenerator g;
    g.b.resize(d);
    for (auto& x : g.b) x = int(rng.next_u64() % 3) - 1;
    Atom a;
    a.c = cplx(0.5 + rng.uniform(), rng.uniform() - 0.5);
    a.xi.resize(d);
    for (auto& x : a.xi) x = (rng.uniform() - 0.5) * 0.25;
    g.atoms.push_back(a);
    return g;
  };
  auto f = rand_gen(dims);
  auto g = rand_gen(dims);
  auto curve = sdq_residual_curve(f, g, hbars, cutoff, 3);

  std::vector<std::vector<double>> rows;
  for (const auto& s : curve.samples) {
    rows.push_back({s.hbar, s.von_neumann, s.dirac, s.vn_bound});
    o.check("vn_below_analytic_bound_hbar" + format_double(s.hbar),
            s.von_neumann <= s.vn_bound * (1 + 1e-9), s.von_neumann, s.vn_bound);
  }
  write_csv(csv, "hbar,von_neumann,dirac,vn_bound", rows);
  o.check("vn_slope_in_range", curve.vn_slope > 0.9 && curve.vn_slope < 1.1, curve.vn_slope, 1.0);
  o.record("vn_slope", format_double(curve.vn_slope));
  o.record("dirac_slope", format_double(curve.dirac_slope));
  o.record("poisson_sign", curve.poisson_sign);

  // tower stability at depth for an in-ball generator
  ClassicalGenerator inball;
  inball.b.assign(dims, 0);
  Atom ap, am;
  ap.c = cplx(0, -0.5);
  am.c = cplx(0, 0.5);
  ap.xi.assign(dims, 0.0);
  am.xi.assign(dims, 0.0);
  ap.xi[0] = 0.12;
  am.xi[0] = -0.12;
  inball.atoms = {ap, am};
  Lattice base{std::vector<double>(dims, 1.0)};
  const double h1 = 1.0 / 3;
  auto table = rieffel_tower_table(inball, base, {h1 * 0.995, h1, h1 * 1.005}, depth, cutoff, 0);
  double tmin = 1e300, tmax = 0;
  for (const auto& s : table) {
    tmin = std::min(tmin, s.sup_over_tower);
    tmax = std::max(tmax, s.sup_over_tower);
  }
  o.check("tower_sup_stable_5pct", (tmax - tmin) / std::max(tmax, 1e-300) <= 0.05,
          (tmax - tmin) / std::max(tmax, 1e-300), 0.05);
  return o.finish(out);
}

int run_flow(uint64_t seed, const std::string& out, const std::string& csv) {
  Output o("flow", seed);
  Rng rng(seed);
  TrigPotential v(1);
  v.set_coefficient({1}, cplx(0.2, 0.05));
  v.set_coefficient({2}, cplx(0.075, -0.025));

  auto table = dynamics_comparison(v, {2}, {0.2}, {1.0}, {8, 16, 32, 64, 128}, 1e-3);
  std::vector<std::vector<double>> rows;
  for (const auto& r : table.rows) rows.push_back({r.bp0, r.distance});
  write_csv(csv, "b_dot_p0,distance", rows);
  o.check("decay_slope_minus_one", std::abs(table.slope + 1.0) <= 0.15, table.slope, -1.0);

  if (!csv.empty()) {
    // sample trajectory alongside the decay table
    PhasePoint x;
    x.q = {0.2};
    x.p = {0.9};
    std::vector<std::vector<double>> traj;
    for (int s = 0; s <= 100; ++s) {
      traj.push_back({s * 0.01, x.q[0], x.p[0]});
      x = integrate(x, v, 0.01, 1e-3);
    }
    write_csv(csv + ".trajectory.csv", "t,q,p", traj);
  }

  int gronwall_fails = 0;
  for (int t = 0; t < 10; ++t) {
    TrigPotential vm = fejer_smooth(v, 2 + int(rng.next_u64() % 6));
    PhasePoint x0;
    x0.q = {rng.uniform()};
    x0.p = {2 * rng.uniform() - 1};
    if (!gronwall_check(x0, v, vm, 1.0, 1e-3).holds) ++gronwall_fails;
  }
  o.check("gronwall_holds_all", gronwall_fails == 0, gronwall_fails, 0.0);
  return o.finish(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speclab: operator-integral and quantization experiments"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand name

  uint64_t seed = 0;
  int dim = 3, K = 3, n = 3, cutoff = 24, depth = 4, v_max = 3;
  std::string ffam, out, csv, config;
  std::vector<double> hbar_grid;
  bool rieffel_failure = false;
  bool deterministic = true;  // single-threaded reductions; accepted for compatibility

  app.add_option("--seed", seed, "RNG seed (SplitMix64 streams)");
  app.add_option("--dim", dim, "matrix dimension");
  app.add_option("--K", K, "expansion truncation order");
  app.add_option("--n", n, "operator-integral order");
  app.add_option("--cutoff", cutoff, "Fourier window cutoff");
  app.add_option("--depth", depth, "refinement tower depth");
  app.add_option("--v-max", v_max, "loop-vertex cap for the quantum bracket");
  app.add_option("--f", ffam, "test function family (gaussian|x2|x3|x4|x4+x2); default gaussian, x4+x2 for oneloop");
  app.add_option("--out", out, "JSON summary path (stdout when empty)");
  app.add_option("--csv", csv, "CSV table path");
  app.add_option("--hbar-grid", hbar_grid, "hbar values");
  app.add_option("--config", config, "JSON config file overriding flags");
  app.add_flag("--rieffel-failure", rieffel_failure, "reproduce the norm discontinuity");
  app.add_flag("--deterministic", deterministic, "force sequential reductions");

  auto* c_expand = app.add_subcommand("expand", "cocycle expansion of the spectral action");
  auto* c_cocycle = app.add_subcommand("cocycle-check", "(b,B)-cocycle identities");
  auto* c_oneloop = app.add_subcommand("oneloop", "one-loop amplitudes and Ward identities");
  auto* c_ssf = app.add_subcommand("ssf", "spectral shift trace formulas");
  auto* c_moi = app.add_subcommand("moi-check", "operator-integral identities");
  auto* c_torus = app.add_subcommand("torus-sdq", "deformation-quantization residuals");
  auto* c_flow = app.add_subcommand("flow", "classical dynamics experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  json fixtures = json::object();
  if (!config.empty()) {
    std::ifstream cf(config);
    if (!cf) {
      std::cerr << "cannot open config: " << config << "\n";
      return kExitUsage;
    }
    json j;
    cf >> j;
    fixtures = j;
    if (j.contains("seed")) seed = j["seed"].get<uint64_t>();
    if (j.contains("dim")) dim = j["dim"].get<int>();
    if (j.contains("K")) K = j["K"].get<int>();
    if (j.contains("n")) n = j["n"].get<int>();
    if (j.contains("cutoff")) cutoff = j["cutoff"].get<int>();
    if (j.contains("depth")) depth = j["depth"].get<int>();
    if (j.contains("f")) ffam = j["f"].get<std::string>();
    if (j.contains("hbar_grid")) hbar_grid = j["hbar_grid"].get<std::vector<double>>();
  }
  if (hbar_grid.empty())
    for (int k = 1; k <= 6; ++k) hbar_grid.push_back(std::pow(2.0, -k));

  try {
    if (*c_expand) return run_expand(seed, dim, K, ffam.empty() ? "gaussian" : ffam, out, csv);
    if (*c_cocycle) return run_cocycle_check(seed, dim, std::min(n, 5), out);
    if (*c_oneloop) return run_oneloop(seed, dim, v_max, ffam.empty() ? "x4+x2" : ffam, out);
    if (*c_ssf) return run_ssf(seed, dim, n, fixtures, out, csv);
    if (*c_moi) return run_moi_check(seed, dim, n, out);
    if (*c_torus)
      return run_torus_sdq(seed, 1, cutoff, depth, hbar_grid, rieffel_failure, out, csv);
    if (*c_flow) return run_flow(seed, out, csv);
  } catch (const contract_error& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssert;
  }

  std::cout << app.help();
  return kExitUsage;
}
