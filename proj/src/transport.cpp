#include "sacflow/transport.hpp"

#include <algorithm>
#include <cmath>

namespace sacflow {

std::string to_string(BcMode m) {
  return m == BcMode::ClassicalNitsche ? "classical_nitsche" : "artificial";
}

BcMode parse_bc_mode(const std::string& s) {
  if (s == "classical_nitsche" || s == "nitsche") return BcMode::ClassicalNitsche;
  if (s == "artificial") return BcMode::Artificial;
  throw ConfigError("unknown bc mode '" + s + "'");
}

TransportState TransportState::constant(std::size_t n_vertices, double value, double t) {
  return {std::vector<double>(n_vertices, value), t};
}

TransportProblem::TransportProblem(const QuadMesh& mesh, AleMap ale, PhysParams params,
                                   BcMode mode)
    : mesh_(mesh),
      ale_(ale),
      params_(params),
      mode_(mode),
      layout_(DofLayout::transport(mesh, {Marker::Blood})),
      pattern_(std::make_shared<const SparsityPattern>(make_pattern(mesh, 1, false))),
      matrix_(pattern_) {
  params_.validate();
}

void TransportProblem::check_io_fixed(double t) const {
  EdgeValues ev;
  for (const BoundaryEdge& be : mesh_.boundary_edges()) {
    if (be.marker != Marker::Io) continue;
    eval_edge(mesh_, be.cell, be.local_edge, ev);
    for (int q = 0; q < ev.n; ++q) {
      const AleEval e = ale_.evaluate_in_cell(mesh_, be.cell, ev.at[q].x, t);
      if ((e.F - Mat2::identity()).frobenius2() > 1e-28 || norm(e.v_dom) > 1e-14)
        throw ConfigError("io boundary must stay fixed under the map (cell " +
                          std::to_string(be.cell) + ")");
    }
  }
}

void TransportProblem::assemble_boundary(std::span<const double> u, std::span<const double> c_old,
                                         double t, CsrMatrix& A, std::span<double> rhs) const {
  (void)t;
  const double D = params_.D;
  EdgeValues ev;
  for (const BoundaryEdge& be : mesh_.boundary_edges()) {
    if (be.marker != Marker::Io) continue;
    const auto& cell = mesh_.cells()[be.cell];
    eval_edge(mesh_, be.cell, be.local_edge, ev);
    const double gamma = params_.gamma0 / normal_extent(mesh_, be.cell, be.local_edge);
    const Vec2 n = ev.normal;  // the map is the identity here
    std::array<std::array<double, 4>, 4> K{};
    std::array<double, 4> f{};
    for (int q = 0; q < ev.n; ++q) {
      const BasisAt& b = ev.at[q];
      Vec2 v;
      double cold = 0.0;
      for (int a = 0; a < 4; ++a) {
        v += b.phi[a] * Vec2{u[3 * cell[a]], u[3 * cell[a] + 1]};
        cold += b.phi[a] * c_old[cell[a]];
      }
      const double vn = dot(v, n);
      const double ds = ev.ds[q];
      if (mode_ == BcMode::ClassicalNitsche) {
        if (!(vn < 0.0)) continue;  // Heaviside(-v.n), outflow stays Neumann
        for (int a = 0; a < 4; ++a) {
          f[a] += ds * gamma * params_.c_ext * b.phi[a];
          for (int bb = 0; bb < 4; ++bb)
            K[a][bb] += ds * (gamma * b.phi[bb] - D * dot(b.grad[bb], n)) * b.phi[a];
        }
      } else {
        const double inflow = std::max(-vn, 0.0);
        const double idt = 1.0 / params_.dt;
        for (int a = 0; a < 4; ++a) {
          f[a] += ds * (idt * cold + inflow * params_.c_ext) * b.phi[a];
          for (int bb = 0; bb < 4; ++bb)
            K[a][bb] += ds * (idt + inflow) * b.phi[bb] * b.phi[a];
        }
      }
    }
    for (int a = 0; a < 4; ++a) {
      rhs[cell[a]] += f[a];
      for (int bb = 0; bb < 4; ++bb)
        if (K[a][bb] != 0.0) A.add(cell[a], cell[bb], K[a][bb]);
    }
  }
}

void TransportProblem::assemble(std::span<const double> u, std::span<const double> c_old, double t,
                                CsrMatrix& A, std::span<double> rhs) const {
  A.set_zero();
  std::fill(rhs.begin(), rhs.end(), 0.0);
  const double idt = 1.0 / params_.dt;
  const double D = params_.D;
  CellValues cv;
  for (int c = 0; c < static_cast<int>(mesh_.n_cells()); ++c) {
    const auto& cell = mesh_.cells()[c];
    eval_cell(mesh_, c, cell_rule(), cv);
    std::array<std::array<double, 4>, 4> K{};
    std::array<double, 4> f{};
    for (int q = 0; q < cv.n; ++q) {
      const BasisAt& b = cv.at[q];
      const AleEval e = ale_.evaluate_in_cell(mesh_, c, b.x, t);
      const double w = e.J * cv.dx[q];
      std::array<Vec2, 4> g;
      Vec2 v;
      double cold = 0.0;
      for (int a = 0; a < 4; ++a) {
        g[a] = e.FinvT * b.grad[a];
        v += b.phi[a] * Vec2{u[3 * cell[a]], u[3 * cell[a] + 1]};
        cold += b.phi[a] * c_old[cell[a]];
      }
      const Vec2 rel = v - e.v_dom;
      for (int a = 0; a < 4; ++a) {
        f[a] += w * idt * cold * b.phi[a];
        for (int bb = 0; bb < 4; ++bb)
          K[a][bb] += w * ((idt * b.phi[bb] + dot(rel, g[bb])) * b.phi[a] +
                           D * dot(g[a], g[bb]));
      }
    }
    for (int a = 0; a < 4; ++a) {
      rhs[cell[a]] += f[a];
      for (int bb = 0; bb < 4; ++bb) A.add(cell[a], cell[bb], K[a][bb]);
    }
  }
  assemble_boundary(u, c_old, t, A, rhs);
}

TransportState TransportProblem::step(const TransportState& prev, const FlowState& flow,
                                      double t_new, TransportReport* report) {
  if (prev.c.size() != layout_.n_dofs() || flow.u.size() != 3 * layout_.n_dofs())
    throw std::invalid_argument("TransportProblem::step: state size mismatch");
  check_io_fixed(t_new);
  std::vector<double> rhs(layout_.n_dofs());
  assemble(flow.u, prev.c, t_new, matrix_, rhs);
  const std::vector<double> g(layout_.n_dofs(), params_.c_bl);
  apply_dirichlet_values(matrix_, rhs, layout_, g);
  lu_.factor(matrix_);
  TransportState next{std::vector<double>(layout_.n_dofs(), 0.0), t_new};
  TransportReport rep;
  rep.solve = lu_.solve(rhs, next.c);
  for (double c : next.c)
    if (c < -1e-6 || c > 1.0 + 1e-6) ++rep.out_of_range;
  if (report) *report = rep;
  return next;
}

TransportState transport_step(const TransportState& prev, const FlowState& flow, double t_new,
                              const QuadMesh& mesh, const AleMap& ale, const PhysParams& params,
                              BcMode mode, TransportReport* report) {
  TransportProblem problem(mesh, ale, params, mode);
  return problem.step(prev, flow, t_new, report);
}

}  // namespace sacflow
