#include "speclab/oneloop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace speclab {

void Diagram::validate() const {
  std::vector<int> edge_count(n_edges, 0);
  std::vector<int> mark_count(n_external, 0);
  for (const auto& v : vertices)
    for (const auto& leg : v) {
      if (leg.external) {
        if (leg.index < 0 || leg.index >= n_external)
          throw contract_error("Diagram: marking out of range");
        mark_count[leg.index]++;
      } else {
        if (leg.index < 0 || leg.index >= n_edges)
          throw contract_error("Diagram: edge id out of range");
        edge_count[leg.index]++;
      }
    }
  for (int c : edge_count)
    if (c != 2) throw contract_error("Diagram: every internal edge needs exactly two legs");
  for (int c : mark_count)
    if (c != 1) throw contract_error("Diagram: markings must be a permutation of 1..n");
}

Diagram Diagram::single_vertex(int n) {
  Diagram g;
  g.n_external = n;
  g.n_edges = 0;
  g.vertices.resize(1);
  for (int t = 0; t < n; ++t) g.vertices[0].push_back({true, t});
  g.validate();
  return g;
}

Diagram Diagram::two_point_chain() {
  Diagram g;
  g.n_external = 2;
  g.n_edges = 2;
  g.vertices = {{{true, 0}, {false, 0}, {false, 1}}, {{true, 1}, {false, 0}, {false, 1}}};
  g.validate();
  return g;
}

Diagram Diagram::two_point_bubble() {
  Diagram g;
  g.n_external = 2;
  g.n_edges = 2;
  g.vertices = {{{true, 0}, {false, 0}, {false, 1}}, {{true, 1}, {false, 1}, {false, 0}}};
  g.validate();
  return g;
}

Diagram Diagram::tadpole(int n, int gap) {
  Diagram g;
  g.n_external = n;
  g.n_edges = 1;
  g.vertices.resize(1);
  for (int t = 0; t < n; ++t) g.vertices[0].push_back({true, (gap + 1 + t) % n});
  g.vertices[0].push_back({false, 0});
  g.vertices[0].push_back({false, 0});
  g.validate();
  return g;
}

OneLoopContext::OneLoopContext(const HermitianMatrix& d, TestFunction f, int cutoff,
                               const Tolerances& tol)
    : d_(d), f_(std::move(f)), cutoff_(cutoff), tol_(tol) {
  if (cutoff_ < 1 || cutoff_ > d.dim())
    throw contract_error("OneLoopContext: cutoff must be in [1, dim]");
  eig_ = std::make_shared<EigenSystem>(eigh(d_, tol_));
  kernel_ = std::make_shared<SpectralKernel>(eig_->eigenvalues, f_.derivative_function(), tol_);
  prop_ = make_propagator(d_, f_, cutoff_, tol_);
}

cplx OneLoopContext::vertex_factor(const std::vector<int>& idx) const {
  return kernel_->dd(idx);
}

Matrix OneLoopContext::truncate_field(const Matrix& v, bool* mass_warning) const {
  Matrix w = eig_->eigenvectors.adjoint() * v * eig_->eigenvectors;
  double discarded = 0;
  Matrix out(v.dim());
  for (int i = 0; i < v.dim(); ++i)
    for (int j = 0; j < v.dim(); ++j) {
      if (i < cutoff_ && j < cutoff_)
        out(i, j) = w(i, j);
      else
        discarded += std::norm(w(i, j));
    }
  if (mass_warning) *mass_warning = std::sqrt(discarded) > 1e-12;
  return out;
}

Propagator make_propagator(const HermitianMatrix& d, const TestFunction& f, int cutoff,
                           const Tolerances& tol) {
  EigenSystem es = eigh(d, tol);
  if (cutoff > d.dim()) throw contract_error("make_propagator: cutoff exceeds dim");
  TestFunction fp = f.derivative_function();
  Propagator p;
  p.cutoff = cutoff;
  p.table.resize(static_cast<size_t>(cutoff) * cutoff);
  for (int k = 0; k < cutoff; ++k)
    for (int l = 0; l < cutoff; ++l) {
      const cplx dd =
          divided_difference(fp, {{es.eigenvalues[k], es.eigenvalues[l]}}, tol);
      if (!(dd.real() > 0.0) || std::abs(dd.imag()) > 1e-12 * std::max(1.0, std::abs(dd)))
        throw contract_error("propagator: (f')^[1] not positive at (" + std::to_string(k) + "," +
                             std::to_string(l) + ")");
      p.table[static_cast<size_t>(k) * cutoff + l] = 1.0 / dd.real();
    }
  return p;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

cplx amplitude(const OneLoopContext& ctx, const Diagram& g, const std::vector<Matrix>& fields,
               bool* truncation_warning) {
  g.validate();
  if (static_cast<int>(fields.size()) != g.n_external)
    throw contract_error("amplitude: field count mismatch");
  const int N = ctx.cutoff();

  // compress fields into the eigenbasis at level N
  std::vector<Matrix> w;
  for (const auto& v : fields) {
    bool warn = false;
    w.push_back(ctx.truncate_field(v, &warn));
    if (warn && truncation_warning) *truncation_warning = true;
  }

  // slot layout
  const int nv = static_cast<int>(g.vertices.size());
  std::vector<int> slot_base(nv);
  int total_slots = 0;
  for (int v = 0; v < nv; ++v) {
    slot_base[v] = total_slots;
    total_slots += static_cast<int>(g.vertices[v].size());
  }

  // leg (v,t) carries element (slot(v,t), slot(v,t+1))
  auto leg_slots = [&](int v, int t) {
    const int deg = static_cast<int>(g.vertices[v].size());
    return std::pair<int, int>{slot_base[v] + t, slot_base[v] + (t + 1) % deg};
  };

  // locate edge endpoints
  std::vector<std::vector<std::pair<int, int>>> edge_legs(g.n_edges);
  for (int v = 0; v < nv; ++v)
    for (int t = 0; t < static_cast<int>(g.vertices[v].size()); ++t)
      if (!g.vertices[v][t].external) edge_legs[g.vertices[v][t].index].push_back({v, t});

  UnionFind uf(total_slots);
  for (int e = 0; e < g.n_edges; ++e) {
    auto [v1, t1] = edge_legs[e][0];
    auto [v2, t2] = edge_legs[e][1];
    auto [a, b] = leg_slots(v1, t1);
    auto [c, d] = leg_slots(v2, t2);
    uf.unite(a, d);  // delta_{ad}
    uf.unite(b, c);  // delta_{bc}
  }

  std::vector<int> cls(total_slots, -1);
  int nclasses = 0;
  for (int s = 0; s < total_slots; ++s) {
    const int root = uf.find(s);
    if (cls[root] < 0) cls[root] = nclasses++;
    cls[s] = cls[root];
  }

  double est = 1;
  for (int c = 0; c < nclasses; ++c) est *= N;
  if (est * (total_slots + 1) > 1e8) throw size_error("amplitude: estimated term count too large");

  const double edge_sign = (g.n_edges % 2 == 0) ? 1.0 : -1.0;
  cplx acc = 0;
  std::vector<int> assign(nclasses, 0);
  std::vector<int> vidx;
  while (true) {
    cplx term(edge_sign, 0);
    for (int v = 0; v < nv && term != cplx(0, 0); ++v) {
      const int deg = static_cast<int>(g.vertices[v].size());
      vidx.assign(deg, 0);
      for (int t = 0; t < deg; ++t) vidx[t] = assign[cls[slot_base[v] + t]];
      term *= ctx.vertex_factor(vidx);
      if (term == cplx(0, 0)) break;
      for (int t = 0; t < deg; ++t) {
        const auto& leg = g.vertices[v][t];
        auto [sa, sb] = leg_slots(v, t);
        const int a = assign[cls[sa]], b = assign[cls[sb]];
        if (leg.external) term *= w[leg.index](a, b);
        if (term == cplx(0, 0)) break;
      }
    }
    if (term != cplx(0, 0)) {
      for (int e = 0; e < g.n_edges; ++e) {
        auto [v1, t1] = edge_legs[e][0];
        auto [a, b] = leg_slots(v1, t1);
        term *= ctx.prop()(assign[cls[a]], assign[cls[b]]);
      }
      acc += term;
    }
    int c = nclasses - 1;
    while (c >= 0 && ++assign[c] == N) assign[c--] = 0;
    if (c < 0) break;
  }
  return acc;
}

cplx explicit_two_point(const OneLoopContext& ctx, TwoPointKind kind, const Matrix& v1,
                        const Matrix& v2) {
  const int N = ctx.cutoff();
  Matrix w1 = ctx.truncate_field(v1), w2 = ctx.truncate_field(v2);
  const auto& G = ctx.prop();
  cplx acc = 0;
  switch (kind) {
    case TwoPointKind::chain:
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
          acc += ctx.vertex_factor({i, i, k}) * ctx.vertex_factor({i, k, k}) * w1(i, i) *
                 w2(k, k) * G(i, k) * G(i, k);
      return acc;
    case TwoPointKind::bubble:
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k) {
            const cplx f2 = ctx.vertex_factor({i, j, k});
            acc += f2 * f2 * w1(i, j) * w2(j, i) * G(i, k) * G(k, j);
          }
      return acc;
    case TwoPointKind::tadpole:
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            acc -= ctx.vertex_factor({i, j, j, k}) * w1(i, j) * w2(j, i) * G(j, k);
      return acc;
  }
  throw contract_error("explicit_two_point: unknown kind");
}

namespace {

// all one-loop diagrams with the externals 0..n-1 cyclically marked and the
// loop cut at the gap subset; vertices clockwise, externals outside
std::vector<Diagram> relevant_diagrams(int n, int v_max) {
  std::vector<Diagram> out;
  if (n < 1) return out;
  const int vcap = std::min(v_max, n);
  // v = 1: self-loop in any of the n gaps
  if (vcap >= 1)
    for (int gap = 0; gap < n; ++gap) out.push_back(Diagram::tadpole(n, gap));
  // v >= 2: choose v cut gaps, arcs between consecutive cuts become vertices
  for (int v = 2; v <= vcap; ++v) {
    std::vector<int> cuts(v);
    std::function<void(int, int)> choose = [&](int start, int k) {
      if (k == v) {
        Diagram g;
        g.n_external = n;
        g.n_edges = v;
        g.vertices.resize(v);
        for (int t = 0; t < v; ++t) {
          const int from = cuts[t];
          const int to = cuts[(t + 1) % v];
          // externals strictly after gap `from` up to and including gap `to`
          for (int m = (from + 1) % n; ; m = (m + 1) % n) {
            g.vertices[t].push_back({true, m});
            if (m == to) break;
          }
          g.vertices[t].push_back({false, t});            // out: edge t to vertex t+1
          g.vertices[t].push_back({false, (t + v - 1) % v});  // in: edge t-1
        }
        g.validate();
        out.push_back(std::move(g));
        return;
      }
      for (int gidx = start; gidx < n; ++gidx) {
        cuts[k] = gidx;
        choose(gidx + 1, k + 1);
      }
    };
    choose(0, 0);
  }
  return out;
}

}  // namespace

cplx quantum_bracket(const OneLoopContext& ctx, const std::vector<Matrix>& fields, int v_max) {
  const int n = static_cast<int>(fields.size());
  if (n < 1) throw contract_error("quantum_bracket: needs at least one field");
  if (v_max < 1) throw contract_error("quantum_bracket: v_max must be >= 1");
  cplx acc = 0;
  for (const auto& g : relevant_diagrams(n, v_max)) acc += amplitude(ctx, g, fields);
  return acc;
}

WardReport ward_check(const OneLoopContext& ctx, WardKind kind, const WardInputs& in) {
  WardReport rep;
  const Matrix& a = in.a;
  const int n = static_cast<int>(in.fields.size());
  switch (kind) {
    case WardKind::vertex: {
      // <aV1,..,Vn> - <V1,..,Vn a> = <V1,..,Vn,[D,a]>
      std::vector<Matrix> left = in.fields;
      left[0] = a * in.fields[0];
      std::vector<Matrix> right = in.fields;
      right[n - 1] = in.fields[n - 1] * a;
      std::vector<Matrix> ins = in.fields;
      ins.push_back(commutator(ctx.D().matrix(), a));
      const cplx lhs = bracket(ctx.D(), ctx.f(), left, ctx.tol()) -
                       bracket(ctx.D(), ctx.f(), right, ctx.tol());
      const cplx rhs = bracket(ctx.D(), ctx.f(), ins, ctx.tol());
      rep.residual = std::abs(lhs - rhs);
      rep.scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      return rep;
    }
    case WardKind::gauge_edge: {
      // kernel-level identity at all index values
      const int N = ctx.cutoff();
      Matrix aw = ctx.truncate_field(a);
      const auto& G = ctx.prop();
      const auto& lam = ctx.eig().eigenvalues;
      double worst = 0, scale = 1;
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
          for (int l = 0; l < N; ++l)
            for (int nn = 0; nn < N; ++nn) {
              cplx lhs = 0;
              for (int m = 0; m < N; ++m) {
                if (i == m && k == l) lhs += G(i, k) * aw(m, nn);
                if (m == nn && k == l) lhs -= G(l, nn) * aw(i, m);
              }
              cplx rhs = 0;
              for (int p = 0; p < N; ++p)
                for (int q = 0; q < N; ++q)
                  for (int r = 0; r < N; ++r) {
                    if (q != i || p != k || r != nn || p != l) continue;
                    rhs -= ctx.vertex_factor({p, q, r}) * (lam[q] - lam[r]) * aw(q, r) *
                           G(i, k) * G(r, p);
                  }
              worst = std::max(worst, std::abs(lhs - rhs));
              scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
            }
      rep.residual = worst;
      rep.scale = scale;
      return rep;
    }
    case WardKind::quantum: {
      std::vector<Matrix> left = in.fields;
      left[0] = a * in.fields[0];
      std::vector<Matrix> right = in.fields;
      right[n - 1] = in.fields[n - 1] * a;
      std::vector<Matrix> ins = in.fields;
      ins.push_back(commutator(ctx.D().matrix(), a));
      const int vl = std::min(in.v_max, n);
      const cplx lhs = quantum_bracket(ctx, left, vl) - quantum_bracket(ctx, right, vl);
      const cplx rhs = quantum_bracket(ctx, ins, vl + 1);
      rep.residual = std::abs(lhs - rhs);
      rep.scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      return rep;
    }
  }
  throw contract_error("ward_check: unknown kind");
}

}  // namespace speclab
