#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sacflow/analysis.hpp"
#include "sacflow/config.hpp"
#include "sacflow/studies.hpp"
#include "sacflow/transport.hpp"

using namespace sacflow;

namespace {

const QuadMesh& sac0() {
  static const QuadMesh m = generate_alveolar_sac_mesh(SacGeometrySpec{}, 0);
  return m;
}

FlowState uniform_flow(std::size_t nv, Vec2 v, double t) {
  FlowState s = FlowState::zero(nv, t);
  for (std::size_t i = 0; i < nv; ++i) {
    s.u[3 * i] = v.x;
    s.u[3 * i + 1] = v.y;
  }
  return s;
}

}  // namespace

TEST(BcMode, RoundTrip) {
  for (BcMode m : {BcMode::ClassicalNitsche, BcMode::Artificial})
    EXPECT_EQ(parse_bc_mode(to_string(m)), m);
  EXPECT_THROW(parse_bc_mode("robin"), ConfigError);
}

TEST(Transport, ConstantStateIsExact) {
  const QuadMesh& m = sac0();
  PhysParams p;
  p.c_ext = p.c_bl;
  for (BcMode mode : {BcMode::ClassicalNitsche, BcMode::Artificial}) {
    TransportProblem tp(m, AleMap::identity(), p, mode);
    TransportState c = TransportState::constant(m.n_vertices(), p.c_bl);
    const FlowState v = FlowState::zero(m.n_vertices());
    for (int k = 1; k <= 5; ++k) c = tp.step(c, v, k * p.dt);
    for (double x : c.c) EXPECT_NEAR(x, p.c_bl, 1e-14) << to_string(mode);
  }
}

TEST(Transport, BloodNodesHoldDirichletValue) {
  const QuadMesh& m = sac0();
  const PhysParams p;
  TransportProblem tp(m, AleMap::alveolar_sin(), p, BcMode::ClassicalNitsche);
  TransportReport rep;
  const TransportState c = tp.step(TransportState::constant(m.n_vertices(), p.c_ext),
                                   uniform_flow(m.n_vertices(), {0.02, 0.0}, p.dt), p.dt, &rep);
  const auto blood = vertices_on_markers(m, {Marker::Blood});
  for (std::size_t v = 0; v < m.n_vertices(); ++v)
    if (blood[v]) EXPECT_EQ(c.c[v], p.c_bl);
  EXPECT_LT(rep.solve.relative_residual, 1e-9);
  EXPECT_EQ(rep.out_of_range, 0u);
}

TEST(Transport, LinearInDataWithHomogenisedBoundary) {
  const QuadMesh& m = sac0();
  PhysParams p;
  p.c_bl = 0.0;
  p.c_ext = 0.0;
  const FlowState v = uniform_flow(m.n_vertices(), {0.05, 0.01}, 0.4);  // inflow at io
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (BcMode mode : {BcMode::ClassicalNitsche, BcMode::Artificial}) {
    TransportProblem tp(m, AleMap::alveolar_sin(), p, mode);
    TransportState c1 = TransportState::constant(m.n_vertices(), 0.0, 0.35), c2 = c1, mix = c1;
    for (std::size_t i = 0; i < c1.c.size(); ++i) {
      c1.c[i] = u(gen);
      c2.c[i] = u(gen);
      mix.c[i] = 2.0 * c1.c[i] - 0.7 * c2.c[i];
    }
    const auto r1 = tp.step(c1, v, 0.4), r2 = tp.step(c2, v, 0.4), rm = tp.step(mix, v, 0.4);
    for (std::size_t i = 0; i < c1.c.size(); ++i)
      EXPECT_NEAR(rm.c[i], 2.0 * r1.c[i] - 0.7 * r2.c[i], 1e-13) << to_string(mode);
  }
}

TEST(Transport, NitscheSilentOnOutflow) {
  const QuadMesh& m = sac0();
  const PhysParams p;
  TransportProblem tp(m, AleMap::identity(), p, BcMode::ClassicalNitsche);
  const std::vector<double> cold(m.n_vertices(), 0.05);
  for (Vec2 v : {Vec2{0.0, 0.0}, Vec2{-0.03, 0.0}}) {
    CsrMatrix A = tp.make_matrix();
    std::vector<double> rhs(m.n_vertices(), 0.0);
    tp.assemble_boundary(uniform_flow(m.n_vertices(), v, 0.0).u, cold, 0.05, A, rhs);
    EXPECT_EQ(A.max_abs(), 0.0);
    for (double r : rhs) EXPECT_EQ(r, 0.0);
  }
  // inflow switches the terms on
  CsrMatrix A = tp.make_matrix();
  std::vector<double> rhs(m.n_vertices(), 0.0);
  tp.assemble_boundary(uniform_flow(m.n_vertices(), {0.03, 0.0}, 0.0).u, cold, 0.05, A, rhs);
  EXPECT_GT(A.max_abs(), 0.0);
}

TEST(Transport, ArtificialWithoutFlowRelaxesToBloodValue) {
  const QuadMesh& m = sac0();
  PhysParams p;
  p.dt = 1e3;
  TransportProblem tp(m, AleMap::identity(), p, BcMode::Artificial);
  TransportState c = TransportState::constant(m.n_vertices(), p.c_ext);
  const FlowState v = FlowState::zero(m.n_vertices());
  for (int k = 1; k <= 20; ++k) c = tp.step(c, v, k * p.dt);
  for (double x : c.c) EXPECT_NEAR(x, p.c_bl, 1e-9);
}

TEST(Transport, IoEdgesMustStayFixed) {
  const QuadMesh& m = sac0();
  TransportProblem fixed(m, AleMap::alveolar_sin(), PhysParams{}, BcMode::Artificial);
  EXPECT_NO_THROW(fixed.check_io_fixed(1.3));
  TransportProblem moving(m, AleMap::axis_scale(1.2), PhysParams{}, BcMode::Artificial);
  EXPECT_THROW(moving.check_io_fixed(0.0), ConfigError);
}

TEST(Transport, SacRunStaysWithinDataRange) {
  RunConfig cfg = parse_config("");
  cfg.newton.reuse_jacobian = true;
  double lo = 1.0, hi = 0.0;
  SacHooks hooks;
  hooks.on_step = [&](int, const QuadMesh&, const AleMap&, const FlowState&,
                      const TransportState& c) {
    const auto [a, b] = std::minmax_element(c.c.begin(), c.c.end());
    lo = std::min(lo, *a);
    hi = std::max(hi, *b);
  };
  const SacRun run = run_sac_simulation(cfg, hooks);
  EXPECT_EQ(run.series.size(), 200u);
  EXPECT_GE(lo, 0.0429);
  EXPECT_LE(hi, 0.0601);
}

TEST(Diagnostics, PecletRange) {
  const PhysParams p;
  EXPECT_NEAR(peclet(1e-2, 0.055, p.D), 3.2e-5, 0.05e-5);
  EXPECT_NEAR(peclet(1e-2, 0.1125, p.D), 6.6e-5, 0.05e-5);
}
