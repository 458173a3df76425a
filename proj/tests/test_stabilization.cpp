#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "sacflow/fem.hpp"
#include "sacflow/stabilization.hpp"

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

const std::vector<StabParams> kAll{
    {StabKind::LpsAniso, 1.0, IsoMode::ScaledFluctuation},
    {StabKind::IpAniso, 1.0, IsoMode::ScaledFluctuation},
    {StabKind::LpsIso, 1.0, IsoMode::ScaledFluctuation},
    {StabKind::LpsSimple, 1.0, IsoMode::ScaledFluctuation},
    {StabKind::LpsIso, 1.0, IsoMode::AsPrinted},
    {StabKind::LpsSimple, 1.0, IsoMode::AsPrinted},
};

std::string name(const StabParams& s) { return to_string(s.kind) + "/" + to_string(s.mode); }

std::vector<double> node_values(const QuadMesh& m, double (*f)(Vec2)) {
  std::vector<double> p(m.n_vertices());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = f(m.vertices()[i]);
  return p;
}

}  // namespace

TEST(Defaults, AlphaFromViscosity) {
  EXPECT_DOUBLE_EQ(default_stab(StabKind::LpsAniso, 2.0).alpha, 0.5);
  EXPECT_DOUBLE_EQ(default_stab(StabKind::LpsIso, 2.0).alpha, 0.5);
  EXPECT_DOUBLE_EQ(default_stab(StabKind::IpAniso, 2.0).alpha, 1.0 / 120.0);
  for (auto k : {StabKind::LpsAniso, StabKind::IpAniso, StabKind::LpsIso, StabKind::LpsSimple})
    EXPECT_EQ(parse_stab_kind(to_string(k)), k);
  for (auto m : {IsoMode::AsPrinted, IsoMode::ScaledFluctuation})
    EXPECT_EQ(parse_iso_mode(to_string(m)), m);
  EXPECT_THROW(parse_stab_kind("supg"), ConfigError);
}

TEST(AllForms, SymmetricPositiveSemidefinite) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  const AleMap map = AleMap::alveolar_sin();
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(m.n_vertices());
  for (const auto& s : kAll) {
    const CsrMatrix S = stabilization_matrix(s, m, map, 0.7);
    const auto& pat = S.pattern();
    for (std::size_t i = 0; i < pat.n; ++i)
      for (int k = pat.row_ptr[i]; k < pat.row_ptr[i + 1]; ++k)
        ASSERT_NEAR(S.values()[k], S.at(pat.cols[k], i), 1e-15 * S.max_abs()) << name(s);
    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
      for (auto& v : p) v = u(gen);
      worst = std::min(worst, quadratic_form(S, p));
    }
    EXPECT_GE(worst, -1e-12) << name(s);
  }
}

TEST(AllForms, ConstantsInKernel) {
  const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  const std::vector<double> c(m.n_vertices(), 3.0);
  for (const auto& s : kAll) {
    const CsrMatrix S = stabilization_matrix(s, m, AleMap::alveolar_sin(), 2.0);
    EXPECT_NEAR(quadratic_form(S, c), 0.0, 1e-12) << name(s);
  }
}

TEST(Kernel, PatchBilinearFieldsOnUniformMesh) {
  const QuadMesh m = square_mesh(3);
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> p(m.n_vertices());
  for (auto& v : p) v = u(gen);
  const auto kp = apply_fluctuation(p, m);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= kp[i];
  for (std::size_t i = 0; i < 4; ++i) {
    const CsrMatrix S = stabilization_matrix(kAll[i], m, AleMap::axis_scale(0.3), 0.0);
    EXPECT_NEAR(quadratic_form(S, p), 0.0, 1e-13) << name(kAll[i]);
  }
}

TEST(Kernel, GlobalBilinearHasNoJumps) {
  const QuadMesh m = square_mesh(3);
  const auto p = node_values(m, [](Vec2 x) { return 2.0 * x.x - x.y + 5.0 * x.x * x.y; });
  const CsrMatrix S = stabilization_matrix(kAll[1], m, AleMap::identity(), 0.0);
  EXPECT_NEAR(quadratic_form(S, p), 0.0, 1e-13);
}

TEST(LpsAniso, MidpointHatMatchesQuadrature) {
  const QuadMesh m = square_mesh(1);
  std::vector<double> p(m.n_vertices(), 0.0);
  p[m.patches()[0].nodes[4]] = 1.0;
  const double alpha = 2.5;
  const CsrMatrix S = stabilization_matrix({StabKind::LpsAniso, alpha}, m, AleMap::identity(), 0.0);

  // p = (1 - |2x - 1|)(1 - |2y - 1|), h1 = h2 = 1/2 on every cell
  const QuadratureRule r = tensor_gauss(4);
  double oracle = 0.0;
  for (double x0 : {0.0, 0.5})
    for (double y0 : {0.0, 0.5})
      for (std::size_t q = 0; q < r.points.size(); ++q) {
        const double x = x0 + 0.5 * r.points[q].x, y = y0 + 0.5 * r.points[q].y;
        const double sx = x < 0.5 ? 2.0 : -2.0, sy = y < 0.5 ? 2.0 : -2.0;
        const double dx = sx * (1 - std::abs(2 * y - 1)), dy = sy * (1 - std::abs(2 * x - 1));
        oracle += 0.25 * r.weights[q] * 0.25 * (dx * dx + dy * dy);
      }
  EXPECT_NEAR(quadratic_form(S, p), alpha * oracle, 1e-14);
  EXPECT_NEAR(oracle, 2.0 / 3.0, 1e-14);
}

TEST(IpAniso, EdgeHatMatchesHandAssembly) {
  const QuadMesh m = square_mesh(1);
  std::vector<double> p(m.n_vertices(), 0.0);
  p[m.patches()[0].nodes[1]] = 1.0;  // midpoint of the bottom side
  const double alpha = 3.0;
  const CsrMatrix S = stabilization_matrix({StabKind::IpAniso, alpha}, m, AleMap::identity(), 0.0);
  // h_n^3 = 1/8. Lower vertical edge: jump of d_x p is 4(1 - 2y), int = 16/6.
  // Left and right horizontal edges: jump of d_y p is 4x resp. 4(1 - x'), int = 2/3 each.
  const double oracle = 0.125 * (16.0 / 6.0 + 2.0 / 3.0 + 2.0 / 3.0);
  EXPECT_NEAR(quadratic_form(S, p), alpha * oracle, 1e-14);
}

TEST(Scaling, AxisScaleMultipliesAnisoFormsByJ) {
  const QuadMesh m = generate_half_lens_mesh(2);
  for (StabKind k : {StabKind::LpsAniso, StabKind::IpAniso}) {
    const CsrMatrix S1 = stabilization_matrix({k, 1.0}, m, AleMap::identity(), 0.0);
    const CsrMatrix Sa = stabilization_matrix({k, 1.0}, m, AleMap::axis_scale(0.01), 0.0);
    const double tol = 1e-14 * S1.max_abs();
    for (std::size_t i = 0; i < S1.nnz(); ++i)
      ASSERT_NEAR(Sa.values()[i], 0.01 * S1.values()[i], tol) << to_string(k);
  }
}

TEST(Isotropic, IdentityMapGivesSameMatrices) {
  const QuadMesh m = generate_half_lens_mesh(2);
  for (IsoMode mode : {IsoMode::AsPrinted, IsoMode::ScaledFluctuation}) {
    const CsrMatrix A = stabilization_matrix({StabKind::LpsIso, 1.0, mode}, m, AleMap::identity(), 0);
    const CsrMatrix B =
        stabilization_matrix({StabKind::LpsSimple, 1.0, mode}, m, AleMap::identity(), 0);
    for (std::size_t i = 0; i < A.nnz(); ++i) ASSERT_NEAR(A.values()[i], B.values()[i], 1e-14);
  }
}

TEST(Isotropic, AsPrintedDirectionWeights) {
  const QuadMesh m = generate_half_lens_mesh(2);
  const AleMap map = AleMap::axis_scale(0.01);
  const CsrMatrix iso = stabilization_matrix({StabKind::LpsIso, 1.0, IsoMode::AsPrinted}, m, map, 0);
  const CsrMatrix simple =
      stabilization_matrix({StabKind::LpsSimple, 1.0, IsoMode::AsPrinted}, m, map, 0);
  const auto px = node_values(m, [](Vec2 x) { return x.x; });
  const auto py = node_values(m, [](Vec2 x) { return x.y; });
  // J (F^-T)_11^2 = 0.01 * 100^2 and J (F^-T)_22^2 = 0.01
  EXPECT_NEAR(quadratic_form(iso, px) / quadratic_form(simple, px), 100.0, 1e-10);
  EXPECT_NEAR(quadratic_form(iso, py) / quadratic_form(simple, py), 0.01, 1e-12);
}

TEST(ExactZero, LocalPatchSpaceIsDefinite) {
  const QuadMesh m = square_mesh(1);
  const Patch& P = m.patches()[0];
  const std::array<int, 5> local{P.nodes[1], P.nodes[3], P.nodes[5], P.nodes[7], P.nodes[4]};
  for (StabKind k : {StabKind::IpAniso, StabKind::LpsAniso}) {
    const CsrMatrix S = stabilization_matrix({k, 1.0}, m, AleMap::identity(), 0.0);
    Eigen::Matrix<double, 5, 5> A;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) A(i, j) = S.at(local[i], local[j]);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(A);
    EXPECT_GT(es.eigenvalues().minCoeff(), 1e-3) << to_string(k);
  }
}

TEST(Assembly, PressureBlockOffsetsRows) {
  const QuadMesh m = square_mesh(2);
  const CsrMatrix S = stabilization_matrix({StabKind::LpsAniso, 1.0}, m, AleMap::identity(), 0);
  CsrMatrix F(std::make_shared<SparsityPattern>(make_pattern(m, 3, true)));
  assemble_stabilization({StabKind::LpsAniso, 1.0}, m, AleMap::identity(), 0.0, F, {3, 2});
  for (std::size_t i = 0; i < m.n_vertices(); ++i)
    for (std::size_t j = 0; j < m.n_vertices(); ++j) {
      const auto& pat = S.pattern();
      bool in = false;
      for (int k = pat.row_ptr[i]; k < pat.row_ptr[i + 1]; ++k) in |= pat.cols[k] == int(j);
      if (in) EXPECT_DOUBLE_EQ(F.at(3 * i + 2, 3 * j + 2), S.at(i, j));
    }
  EXPECT_EQ(F.at(0, 0), 0.0);
}
