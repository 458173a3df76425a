#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "sacflow/fem.hpp"
#include "sacflow/mesh.hpp"
#include "sacflow/sparse.hpp"

using namespace sacflow;

namespace {

QuadMesh square_mesh(int refinements) {
  auto g = std::make_shared<MacroGeometry>();
  MacroCell c = MacroCell::straight({0, 0}, {1, 0}, {1, 1}, {0, 1});
  c.edge_marker = {Marker::Wall, Marker::Wall, Marker::Wall, Marker::Io};
  g->cells.push_back(c);
  QuadMesh m = QuadMesh::from_macro(g);
  for (int i = 0; i < refinements; ++i) m = uniform_refine(m);
  return m;
}

}  // namespace

TEST(Quadrature, GaussLegendreExactness) {
  for (int n = 1; n <= 6; ++n) {
    const LineRule r = gauss_legendre(n);
    EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-15);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Quadrature, TensorRuleOnSquare) {
  const QuadratureRule& r = cell_rule();
  ASSERT_EQ(r.points.size(), 9u);
  EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-15);
  double s = 0.0;
  for (std::size_t i = 0; i < r.points.size(); ++i)
    s += r.weights[i] * std::pow(r.points[i].x, 5) * std::pow(r.points[i].y, 4);
  EXPECT_NEAR(s, 1.0 / 30.0, 1e-15);
  EXPECT_EQ(edge_rule().points.size(), 3u);
}

TEST(Quadrature, CellAndEdgeMeasures) {
  const QuadMesh m = generate_half_lens_mesh(3);
  double area = 0.0;
  CellValues cv;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    eval_cell(m, c, cell_rule(), cv);
    for (int q = 0; q < cv.n; ++q) area += cv.dx[q];
  }
  EXPECT_NEAR(area, m.reference_area(), 1e-13);

  EdgeValues ev;
  for (const auto& e : m.boundary_edges()) {
    eval_edge(m, e.cell, e.local_edge, ev);
    double len = 0.0;
    for (int q = 0; q < ev.n; ++q) len += ev.ds[q];
    EXPECT_NEAR(len, m.edge_length(e.cell, e.local_edge), 1e-14);
  }
}

TEST(Quadrature, TrigonometricIntegrandOnFineMesh) {
  const QuadMesh m = generate_half_lens_mesh(6);
  auto f = [](Vec2 x) { return std::pow(std::sin(x.x), 3) * (1.0 + x.y * x.y); };
  const QuadratureRule ref = tensor_gauss(8);
  double a = 0.0, b = 0.0;
  CellValues cv;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    eval_cell(m, c, cell_rule(), cv);
    for (int q = 0; q < cv.n; ++q) a += cv.dx[q] * f(cv.at[q].x);
    const auto v = m.cell_vertices(c);
    for (std::size_t q = 0; q < ref.points.size(); ++q) {
      const BasisAt at = basis_eval(v, ref.points[q]);
      b += ref.weights[q] * at.detG * f(at.x);
    }
  }
  EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-8);
}

TEST(Basis, CentreAndVertices) {
  const ShapeValues c = q1_shape({0.5, 0.5});
  for (double v : c.phi) EXPECT_DOUBLE_EQ(v, 0.25);
  const std::array<Vec2, 4> corners{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
  for (int i = 0; i < 4; ++i) {
    const ShapeValues s = q1_shape(corners[i]);
    for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(s.phi[k], i == k ? 1.0 : 0.0);
  }
}

TEST(Basis, PartitionOfUnityOnDistortedCell) {
  const std::array<Vec2, 4> v{Vec2{0.1, 0.0}, Vec2{1.3, 0.2}, Vec2{1.0, 0.9}, Vec2{-0.2, 1.1}};
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const BasisAt b = basis_eval(v, {u(gen), u(gen)});
    double s = 0.0;
    Vec2 g;
    Vec2 x;
    for (int k = 0; k < 4; ++k) {
      s += b.phi[k];
      g += b.grad[k];
      x += b.phi[k] * v[k];
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(g.x, 0.0, 1e-14);
    EXPECT_NEAR(g.y, 0.0, 1e-14);
    EXPECT_NEAR(x.x, b.x.x, 1e-14);
    EXPECT_GT(b.detG, 0.0);
    // gradient of the coordinate function x is e1
    Vec2 gx;
    for (int k = 0; k < 4; ++k) gx += v[k].x * b.grad[k];
    EXPECT_NEAR(gx.x, 1.0, 1e-13);
    EXPECT_NEAR(gx.y, 0.0, 1e-13);
  }
}

TEST(Fluctuation, KillsPatchBilinearFields) {
  const QuadMesh m = square_mesh(3);
  std::vector<double> f(m.n_vertices()), c(m.n_vertices(), 2.5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Vec2 x = m.vertices()[i];
    f[i] = 1.0 + 2.0 * x.x - 3.0 * x.y + 4.0 * x.x * x.y;
  }
  for (double v : apply_fluctuation(f, m)) EXPECT_NEAR(v, 0.0, 1e-14);
  for (double v : apply_fluctuation(c, m)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Fluctuation, MidpointHatUnchanged) {
  const QuadMesh m = square_mesh(2);
  const int mid = m.patches()[0].nodes[4];
  std::vector<double> f(m.n_vertices(), 0.0);
  f[mid] = 1.0;
  const auto k = apply_fluctuation(f, m);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_DOUBLE_EQ(k[i], f[i]);
}

TEST(Fluctuation, ProjectionAndZeroAtCorners) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(m.n_vertices());
  for (auto& v : f) v = u(gen);
  const auto k1 = apply_fluctuation(f, m);
  const auto k2 = apply_fluctuation(k1, m);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(k1[i], k2[i], 1e-14);
  for (const Patch& p : m.patches())
    for (int c : kPatchCornerNodes) EXPECT_EQ(k1[p.nodes[c]], 0.0);
}

TEST(Fluctuation, RequiresHierarchy) {
  const QuadMesh m = square_mesh(0);
  std::vector<double> f(m.n_vertices(), 1.0);
  EXPECT_THROW(apply_fluctuation(f, m), MeshError);
}

TEST(DofLayout, FlowCounts) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  const DofLayout l = DofLayout::flow(m, {Marker::Wall, Marker::Blood});
  EXPECT_EQ(l.n_dofs(), 3 * m.n_vertices());
  const auto on = vertices_on_markers(m, {Marker::Wall, Marker::Blood});
  const std::size_t pinned = std::count(on.begin(), on.end(), 1);
  EXPECT_EQ(l.n_constrained(), 2 * pinned);
  for (std::size_t v = 0; v < m.n_vertices(); ++v) {
    EXPECT_EQ(l.dirichlet[3 * v], on[v]);
    EXPECT_EQ(l.dirichlet[3 * v + 2], 0);  // pressure never pinned
  }
}

TEST(DofLayout, TransportPinsBloodOnly) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  const DofLayout l = DofLayout::transport(m, {Marker::Blood});
  EXPECT_EQ(l.n_dofs(), m.n_vertices());
  const auto blood = vertices_on_markers(m, {Marker::Blood});
  for (std::size_t v = 0; v < m.n_vertices(); ++v) EXPECT_EQ(l.dirichlet[v], blood[v]);
  EXPECT_GT(l.n_constrained(), 0u);
}

TEST(Dirichlet, IdentityRowsAndZeroResidual) {
  const QuadMesh m = square_mesh(2);
  const DofLayout l = DofLayout::transport(m, {Marker::Io});
  CsrMatrix A(std::make_shared<SparsityPattern>(make_pattern(m, 1, false)));
  for (auto& v : A.values()) v = 1.0;
  std::vector<double> r(l.n_dofs(), 3.0);
  apply_dirichlet(A, r, l);
  for (std::size_t i = 0; i < l.n_dofs(); ++i) {
    if (!l.dirichlet[i]) continue;
    EXPECT_EQ(r[i], 0.0);
    const auto& p = A.pattern();
    for (int k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      EXPECT_EQ(A.values()[k], p.cols[k] == static_cast<int>(i) ? 1.0 : 0.0);
  }
}

TEST(Dirichlet, LaplaceReproducesLinearData) {
  const QuadMesh m = square_mesh(3);
  const DofLayout l = DofLayout::transport(m, {Marker::Io, Marker::Wall});
  CsrMatrix A(std::make_shared<SparsityPattern>(make_pattern(m, 1, false)));
  CellValues cv;
  for (std::size_t c = 0; c < m.n_cells(); ++c) {
    eval_cell(m, c, cell_rule(), cv);
    const auto& cell = m.cells()[c];
    for (int q = 0; q < cv.n; ++q)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          A.add(cell[i], cell[j], cv.dx[q] * dot(cv.at[q].grad[i], cv.at[q].grad[j]));
  }
  auto exact = [](Vec2 x) { return 0.3 + 1.7 * x.x - 0.6 * x.y; };
  std::vector<double> rhs(l.n_dofs(), 0.0), g(l.n_dofs());
  for (std::size_t v = 0; v < m.n_vertices(); ++v) g[v] = exact(m.vertices()[v]);
  apply_dirichlet_values(A, rhs, l, g);
  SolveReport rep;
  const auto u = factor_solve(A, rhs, &rep);
  EXPECT_LT(rep.relative_residual, 1e-12);
  for (std::size_t v = 0; v < m.n_vertices(); ++v) EXPECT_NEAR(u[v], g[v], 1e-13);
}

TEST(Pattern, PatchCliquesAddCouplings) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  const SparsityPattern cell = make_pattern(m, 3, false);
  const SparsityPattern patch = make_pattern(m, 3, true);
  EXPECT_EQ(cell.n, 3 * m.n_vertices());
  EXPECT_GT(patch.nnz(), cell.nnz());
  for (std::size_t i = 0; i < cell.n; ++i)
    for (int k = cell.row_ptr[i] + 1; k < cell.row_ptr[i + 1]; ++k)
      EXPECT_LT(cell.cols[k - 1], cell.cols[k]);
}
