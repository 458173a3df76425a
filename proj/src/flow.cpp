#include "sacflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sacflow/analysis.hpp"
#include "sacflow/manufactured.hpp"

namespace sacflow {

void PhysParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string("physics.") + name + " must be positive");
  };
  positive(rho, "rho");
  positive(nu, "nu");
  positive(D, "D");
  positive(gamma0, "gamma0");
  positive(dt, "dt");
  if (!(c_bl >= 0.0 && c_bl <= 1.0)) throw ConfigError("physics.c_bl must lie in [0, 1]");
  if (!(c_ext >= 0.0 && c_ext <= 1.0)) throw ConfigError("physics.c_ext must lie in [0, 1]");
}

FlowState FlowState::zero(std::size_t n_vertices, double t) {
  FlowState s;
  s.u.assign(3 * n_vertices, 0.0);
  s.t = t;
  return s;
}

FlowProblem::FlowProblem(const QuadMesh& mesh, AleMap ale, PhysParams params, StabParams stab,
                         std::optional<AleMap> boundary_map)
    : mesh_(mesh),
      ale_(ale),
      boundary_map_(boundary_map.value_or(ale)),
      params_(params),
      stab_(stab),
      layout_(DofLayout::flow(mesh, {Marker::Wall, Marker::Blood})),
      pattern_(std::make_shared<const SparsityPattern>(make_pattern(mesh, 3, mesh.has_patches()))),
      stab_matrix_(pattern_),
      jacobian_(pattern_) {
  params_.validate();
}

std::vector<double> FlowProblem::dirichlet_values(double t) const {
  std::vector<double> g(layout_.n_dofs(), 0.0);
  const auto verts = mesh_.vertices();
  for (std::size_t v = 0; v < layout_.n_vertices; ++v) {
    if (!layout_.dirichlet[3 * v]) continue;
    const Vec2 w = boundary_map_.evaluate(verts[v], t).v_dom;
    g[3 * v] = w.x;
    g[3 * v + 1] = w.y;
  }
  return g;
}

const CsrMatrix& FlowProblem::stab_at(double t) {
  if (!stab_valid_ || stab_t_ != t) {
    stab_matrix_.set_zero();
    assemble_stabilization(stab_, mesh_, ale_, t, stab_matrix_, {3, 2});
    stab_t_ = t;
    stab_valid_ = true;
  }
  return stab_matrix_;
}

void FlowProblem::assemble(std::span<const double> u, std::span<const double> u_old, double t,
                           std::span<double> R, CsrMatrix* Jm) {
  const double rho = params_.rho;
  const double nu = params_.nu;
  const double idt = 1.0 / params_.dt;
  std::fill(R.begin(), R.end(), 0.0);
  if (Jm) Jm->set_zero();

  CellValues cv;
  for (int c = 0; c < static_cast<int>(mesh_.n_cells()); ++c) {
    const auto& cell = mesh_.cells()[c];
    eval_cell(mesh_, c, cell_rule(), cv);
    std::array<double, 12> r{};
    std::array<std::array<double, 12>, 12> K{};
    for (int q = 0; q < cv.n; ++q) {
      const BasisAt& b = cv.at[q];
      const AleEval e = ale_.evaluate_in_cell(mesh_, c, b.x, t);
      const double w = e.J * cv.dx[q];
      std::array<Vec2, 4> g;
      for (int a = 0; a < 4; ++a) g[a] = e.FinvT * b.grad[a];

      Vec2 v, vold;
      double p = 0.0;
      Mat2 G;
      for (int a = 0; a < 4; ++a) {
        const int n = cell[a];
        const Vec2 va{u[3 * n], u[3 * n + 1]};
        v += b.phi[a] * va;
        vold += b.phi[a] * Vec2{u_old[3 * n], u_old[3 * n + 1]};
        p += b.phi[a] * u[3 * n + 2];
        G.a11 += va.x * g[a].x;
        G.a12 += va.x * g[a].y;
        G.a21 += va.y * g[a].x;
        G.a22 += va.y * g[a].y;
      }
      const Vec2 rel = v - e.v_dom;
      const Vec2 conv = G * rel;
      const double div = G.trace();

      for (int a = 0; a < 4; ++a) {
        const double pa = b.phi[a];
        for (int i = 0; i < 2; ++i) {
          const double visc = G(i, 0) * g[a].x + G(i, 1) * g[a].y;
          r[3 * a + i] += w * (rho * (v[i] - vold[i]) * idt * pa + rho * conv[i] * pa +
                               rho * nu * visc - p * g[a][i]);
        }
        r[3 * a + 2] += w * div * pa;
      }
      if (!Jm) continue;
      for (int a = 0; a < 4; ++a) {
        const double pa = b.phi[a];
        for (int bb = 0; bb < 4; ++bb) {
          const double pb = b.phi[bb];
          const double mass = rho * idt * pa * pb;
          const double adv = rho * dot(g[bb], rel) * pa;
          const double lap = rho * nu * dot(g[a], g[bb]);
          for (int i = 0; i < 2; ++i) {
            for (int k = 0; k < 2; ++k) {
              double val = rho * G(i, k) * pb * pa;
              if (i == k) val += mass + adv + lap;
              K[3 * a + i][3 * bb + k] += w * val;
            }
            K[3 * a + i][3 * bb + 2] -= w * pb * g[a][i];
            K[3 * a + 2][3 * bb + i] += w * g[bb][i] * pa;
          }
        }
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 3; ++i) {
        const int row = 3 * cell[a] + i;
        R[row] += r[3 * a + i];
        if (!Jm) continue;
        for (int bb = 0; bb < 4; ++bb)
          for (int k = 0; k < 3; ++k)
            if (K[3 * a + i][3 * bb + k] != 0.0)
              Jm->add(row, 3 * cell[bb] + k, K[3 * a + i][3 * bb + k]);
      }
  }

  const CsrMatrix& S = stab_at(t);
  std::vector<double> Su(u.size());
  S.multiply(u, Su);
  for (std::size_t i = 0; i < Su.size(); ++i) R[i] += Su[i];
  if (Jm) *Jm += S;
}

double FlowProblem::residual_norm(std::span<const double> r) const {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!layout_.dirichlet[i]) s += r[i] * r[i];
  return std::sqrt(s);
}

FlowState FlowProblem::step(const FlowState& prev, double t_new, NewtonReport* report) {
  const std::size_t n = layout_.n_dofs();
  if (prev.u.size() != n) throw std::invalid_argument("FlowProblem::step: state size mismatch");
  NewtonReport rep;
  FlowState next{prev.u, t_new};
  const auto g = dirichlet_values(t_new);
  for (std::size_t i = 0; i < n; ++i)
    if (layout_.dirichlet[i]) next.u[i] = g[i];

  std::vector<double> R(n), Rtry(n), delta(n), rhs(n), utry(n);
  auto residual = [&](std::span<const double> u, std::span<double> out) {
    assemble(u, prev.u, t_new, out, nullptr);
    for (std::size_t i = 0; i < n; ++i)
      if (layout_.dirichlet[i]) out[i] = 0.0;
    return residual_norm(out);
  };

  double rn = residual(next.u, R);
  const double r0 = rn;
  rep.residuals.push_back(rn);
  bool fresh_needed = !newton_.reuse_jacobian || !lu_.factored();

  for (int it = 1; it <= newton_.max_iter; ++it) {
    const bool stale = !fresh_needed;
    if (!stale) {
      assemble(next.u, prev.u, t_new, Rtry, &jacobian_);
      apply_dirichlet(jacobian_, Rtry, layout_);
      lu_.factor(jacobian_);
      ++rep.factorizations;
      fresh_needed = !newton_.reuse_jacobian;
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -R[i];
    lu_.solve(rhs, delta);

    double lambda = 1.0;
    double rtry = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) utry[i] = next.u[i] + lambda * delta[i];
      rtry = residual(utry, Rtry);
      if (rtry < rn || lambda <= newton_.min_damping || (stale && lambda == 1.0)) break;
      lambda *= 0.5;
    }
    rep.iterations = it;
    if (stale && !(rtry < 0.5 * rn)) {
      // The old factorisation no longer contracts; retry with a fresh Jacobian.
      fresh_needed = true;
      if (!(rtry < rn)) continue;
    }
    next.u.swap(utry);
    R.swap(Rtry);
    rn = rtry;
    rep.residuals.push_back(rn);
    if (rn <= newton_.rel_tol * r0 || rn <= newton_.abs_tol) {
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;
  if (!rep.converged) {
    std::ostringstream os;
    os << "Newton did not converge at t = " << t_new << " after " << rep.iterations
       << " iterations; residuals:";
    for (double r : rep.residuals) os << ' ' << r;
    throw NewtonFailure(os.str(), rep.residuals);
  }
  return next;
}

FlowState navier_stokes_step(const FlowState& prev, double t_new, const QuadMesh& mesh,
                             const AleMap& ale, const PhysParams& params, const StabParams& stab,
                             NewtonReport* report) {
  FlowProblem problem(mesh, ale, params, stab);
  return problem.step(prev, t_new, report);
}

StokesResult solve_stokes(double a, const QuadMesh& mesh, const StabParams& stab,
                          const StokesOptions& opt) {
  const AleMap ale = AleMap::axis_scale(a);
  const ManufacturedSolution exact(a);
  DofLayout layout = opt.dirichlet_on_io ? DofLayout::flow(mesh, {Marker::Wall, Marker::Io})
                                         : DofLayout::flow(mesh, {Marker::Wall});
  auto pattern = std::make_shared<const SparsityPattern>(make_pattern(mesh, 3, mesh.has_patches()));
  CsrMatrix A(pattern);
  std::vector<double> b(layout.n_dofs(), 0.0);

  CellValues cv;
  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    const auto& cell = mesh.cells()[c];
    eval_cell(mesh, c, cell_rule(), cv);
    std::array<std::array<double, 12>, 12> K{};
    std::array<double, 12> f{};
    for (int q = 0; q < cv.n; ++q) {
      const BasisAt& bq = cv.at[q];
      const AleEval e = ale.evaluate_in_cell(mesh, c, bq.x, 0.0);
      const double w = e.J * cv.dx[q];
      std::array<Vec2, 4> g;
      for (int k = 0; k < 4; ++k) g[k] = e.FinvT * bq.grad[k];
      const Vec2 rhs = exact.eval(e.x).f;
      for (int i = 0; i < 4; ++i) {
        f[3 * i] += w * rhs.x * bq.phi[i];
        f[3 * i + 1] += w * rhs.y * bq.phi[i];
        for (int j = 0; j < 4; ++j) {
          const double lap = w * dot(g[i], g[j]);
          K[3 * i][3 * j] += lap;
          K[3 * i + 1][3 * j + 1] += lap;
          for (int k = 0; k < 2; ++k) {
            K[3 * i + k][3 * j + 2] -= w * bq.phi[j] * g[i][k];
            K[3 * i + 2][3 * j + k] += w * g[j][k] * bq.phi[i];
          }
        }
      }
    }
    for (int i = 0; i < 4; ++i)
      for (int ci = 0; ci < 3; ++ci) {
        const int row = 3 * cell[i] + ci;
        b[row] += f[3 * i + ci];
        for (int j = 0; j < 4; ++j)
          for (int cj = 0; cj < 3; ++cj)
            if (K[3 * i + ci][3 * j + cj] != 0.0)
              A.add(row, 3 * cell[j] + cj, K[3 * i + ci][3 * j + cj]);
      }
  }
  assemble_stabilization(stab, mesh, ale, 0.0, A, {3, 2});

  std::vector<double> g(layout.n_dofs(), 0.0);
  const auto verts = mesh.vertices();
  for (std::size_t v = 0; v < layout.n_vertices; ++v) {
    if (!layout.dirichlet[3 * v]) continue;
    const Vec2 ex = exact.eval(ale.evaluate(verts[v], 0.0).x).v;
    g[3 * v] = ex.x;
    g[3 * v + 1] = ex.y;
  }
  if (opt.dirichlet_on_io) {
    // enclosed flow: pressure fixed up to a constant, pin one node to the exact value
    layout.dirichlet[2] = 1;
    g[2] = exact.eval(ale.evaluate(verts[0], 0.0).x).p;
  }
  apply_dirichlet_values(A, b, layout, g);

  StokesResult res;
  res.cells = mesh.n_cells();
  res.state.u = factor_solve(A, b, &res.solve);
  res.errors = eval_errors(res.state.u, exact, mesh, ale);
  res.j_div = j_div(mesh, ale, 0.0, res.state.u);
  return res;
}

}  // namespace sacflow
