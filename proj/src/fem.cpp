#include "sacflow/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sacflow {

LineRule gauss_legendre(int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("gauss_legendre: 1 <= n <= 16");
  LineRule r;
  r.points.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev guess, then map [-1, 1] -> [0, 1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.points[n - 1 - i] = 0.5 * (x + 1.0);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

QuadratureRule tensor_gauss(int n) {
  const LineRule g = gauss_legendre(n);
  QuadratureRule r;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      r.points.push_back({g.points[i], g.points[j]});
      r.weights.push_back(g.weights[i] * g.weights[j]);
    }
  return r;
}

const QuadratureRule& cell_rule() {
  static const QuadratureRule rule = tensor_gauss(3);
  return rule;
}

const LineRule& edge_rule() {
  static const LineRule rule = gauss_legendre(3);
  return rule;
}

ShapeValues q1_shape(Vec2 q) {
  const double x = q.x, y = q.y;
  ShapeValues s;
  s.phi = {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
  s.dphi = {Vec2{-(1 - y), -(1 - x)}, Vec2{1 - y, -x}, Vec2{y, x}, Vec2{-y, 1 - x}};
  return s;
}

Mat2 bilinear_jacobian(const std::array<Vec2, 4>& v, Vec2 q) {
  const ShapeValues s = q1_shape(q);
  Mat2 G;
  for (int k = 0; k < 4; ++k) {
    G.a11 += v[k].x * s.dphi[k].x;
    G.a12 += v[k].x * s.dphi[k].y;
    G.a21 += v[k].y * s.dphi[k].x;
    G.a22 += v[k].y * s.dphi[k].y;
  }
  return G;
}

Vec2 edge_point(int local_edge, double s) {
  switch (local_edge) {
    case 0: return {s, 0.0};
    case 1: return {1.0, s};
    case 2: return {1.0 - s, 1.0};
    case 3: return {0.0, 1.0 - s};
  }
  throw std::out_of_range("edge_point: local edge must be 0..3");
}

BasisAt basis_eval(const std::array<Vec2, 4>& v, Vec2 q) {
  const ShapeValues s = q1_shape(q);
  const Mat2 G = bilinear_jacobian(v, q);
  const Mat2 GinvT = G.inverse().transpose();
  BasisAt b;
  b.detG = G.det();
  b.phi = s.phi;
  for (int k = 0; k < 4; ++k) {
    b.x += s.phi[k] * v[k];
    b.grad[k] = GinvT * s.dphi[k];
  }
  return b;
}

void eval_cell(const QuadMesh& mesh, int cell, const QuadratureRule& rule, CellValues& out) {
  const auto v = mesh.cell_vertices(cell);
  out.n = static_cast<int>(rule.points.size());
  if (out.n > 16) throw std::invalid_argument("eval_cell: at most 16 quadrature points");
  for (int q = 0; q < out.n; ++q) {
    out.at[q] = basis_eval(v, rule.points[q]);
    out.dx[q] = rule.weights[q] * out.at[q].detG;
  }
}

void eval_edge(const QuadMesh& mesh, int cell, int local_edge, EdgeValues& out) {
  const auto v = mesh.cell_vertices(cell);
  const auto& rule = edge_rule();
  const double len = mesh.edge_length(cell, local_edge);
  out.n = static_cast<int>(rule.points.size());
  out.normal = mesh.edge_normal(cell, local_edge);
  for (int q = 0; q < out.n; ++q) {
    out.at[q] = basis_eval(v, edge_point(local_edge, rule.points[q]));
    out.ds[q] = rule.weights[q] * len;
  }
}

std::vector<char> vertices_on_markers(const QuadMesh& mesh, std::initializer_list<Marker> markers) {
  std::vector<char> on(mesh.n_vertices(), 0);
  for (const auto& be : mesh.boundary_edges()) {
    if (std::find(markers.begin(), markers.end(), be.marker) == markers.end()) continue;
    for (int v : mesh.edge_vertices(be.cell, be.local_edge)) on[v] = 1;
  }
  return on;
}

DofLayout DofLayout::flow(const QuadMesh& mesh, std::initializer_list<Marker> velocity_markers) {
  DofLayout d;
  d.kind = Kind::Flow;
  d.n_vertices = mesh.n_vertices();
  d.dirichlet.assign(3 * d.n_vertices, 0);
  const auto on = vertices_on_markers(mesh, velocity_markers);
  for (std::size_t v = 0; v < d.n_vertices; ++v)
    if (on[v]) d.dirichlet[3 * v] = d.dirichlet[3 * v + 1] = 1;
  return d;
}

DofLayout DofLayout::transport(const QuadMesh& mesh, std::initializer_list<Marker> markers) {
  DofLayout d;
  d.kind = Kind::Transport;
  d.n_vertices = mesh.n_vertices();
  d.dirichlet = vertices_on_markers(mesh, markers);
  return d;
}

std::size_t DofLayout::n_constrained() const {
  return static_cast<std::size_t>(std::count(dirichlet.begin(), dirichlet.end(), 1));
}

SparsityPattern make_pattern(const QuadMesh& mesh, int components, bool patch_cliques) {
  const std::size_t nv = mesh.n_vertices();
  std::vector<std::vector<int>> adj(nv);
  auto clique = [&](std::span<const int> nodes) {
    for (int a : nodes)
      for (int b : nodes) adj[a].push_back(b);
  };
  for (const auto& c : mesh.cells()) clique(c);
  if (patch_cliques)
    for (const auto& p : mesh.patches()) clique(p.nodes);

  std::vector<std::vector<int>> rows(nv * components);
  for (std::size_t a = 0; a < nv; ++a) {
    auto& nb = adj[a];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (int ci = 0; ci < components; ++ci) {
      auto& row = rows[a * components + ci];
      row.reserve(nb.size() * components);
      for (int b : nb)
        for (int cj = 0; cj < components; ++cj) row.push_back(b * components + cj);
    }
  }
  return SparsityPattern::from_rows(std::move(rows));
}

void apply_dirichlet(CsrMatrix& A, std::span<double> residual, const DofLayout& layout) {
  for (std::size_t i = 0; i < layout.dirichlet.size(); ++i) {
    if (!layout.dirichlet[i]) continue;
    A.set_identity_row(static_cast<int>(i));
    residual[i] = 0.0;
  }
}

void apply_dirichlet_values(CsrMatrix& A, std::span<double> rhs, const DofLayout& layout,
                            std::span<const double> values) {
  for (std::size_t i = 0; i < layout.dirichlet.size(); ++i) {
    if (!layout.dirichlet[i]) continue;
    A.set_identity_row(static_cast<int>(i));
    rhs[i] = values[i];
  }
}

const std::array<std::array<double, 9>, 9>& patch_fluctuation_matrix() {
  static const auto K = [] {
    // i_2h on the 3x3 patch lattice: corners kept, edge midpoints average two
    // corners, the centre averages all four.
    std::array<std::array<double, 9>, 9> I{};
    I[0][0] = I[2][2] = I[6][6] = I[8][8] = 1.0;
    I[1][0] = I[1][2] = 0.5;
    I[3][0] = I[3][6] = 0.5;
    I[5][2] = I[5][8] = 0.5;
    I[7][6] = I[7][8] = 0.5;
    I[4][0] = I[4][2] = I[4][6] = I[4][8] = 0.25;
    std::array<std::array<double, 9>, 9> k{};
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) k[i][j] = (i == j ? 1.0 : 0.0) - I[i][j];
    return k;
  }();
  return K;
}

std::vector<double> apply_fluctuation(std::span<const double> field, const QuadMesh& mesh) {
  if (!mesh.has_patches()) throw MeshError("apply_fluctuation: mesh has no patch hierarchy");
  if (field.size() != mesh.n_vertices())
    throw std::invalid_argument("apply_fluctuation: field size does not match the mesh");
  const auto& K = patch_fluctuation_matrix();
  std::vector<double> out(field.size(), 0.0);
  // Nodes shared by two patches get identical values from both; overwrite is fine.
  for (const Patch& p : mesh.patches()) {
    for (int i = 0; i < 9; ++i) {
      double s = 0.0;
      for (int j = 0; j < 9; ++j) s += K[i][j] * field[p.nodes[j]];
      out[p.nodes[i]] = s;
    }
  }
  return out;
}

}  // namespace sacflow
