#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sacflow/ale.hpp"
#include "sacflow/fem.hpp"
#include "sacflow/mesh.hpp"
#include "sacflow/sparse.hpp"
#include "sacflow/stabilization.hpp"

namespace sacflow {

/// Physical and numerical constants (mm, s, ug).
struct PhysParams {
  double rho = 1.21;
  double nu = 14.711;
  double D = 17.0;
  double c_bl = 0.06;
  double c_ext = 0.04302;
  double gamma0 = 10.0;
  double dt = 0.05;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Nodal (v1, v2, p) per vertex at time t.
struct FlowState {
  std::vector<double> u;
  double t = 0.0;

  static FlowState zero(std::size_t n_vertices, double t = 0.0);
  Vec2 v(int vertex) const { return {u[3 * vertex], u[3 * vertex + 1]}; }
  double p(int vertex) const { return u[3 * vertex + 2]; }
  std::size_t n_vertices() const { return u.size() / 3; }
};

struct NewtonOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_iter = 25;
  double min_damping = 1.0 / 1024.0;
  /// Keep the previous factorisation while it still contracts the residual.
  bool reuse_jacobian = false;
};

struct NewtonReport {
  int iterations = 0;
  int factorizations = 0;
  bool converged = false;
  std::vector<double> residuals;
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Backward Euler ALE Navier-Stokes on one mesh with do-nothing on io edges and
/// v = v_dom on wall and blood edges.
class FlowProblem {
 public:
  /// `boundary_map` supplies the Dirichlet velocity; defaults to `ale`. A fixed
  /// domain with moving wall data uses ale = Identity and boundary_map = AlveolarSin.
  FlowProblem(const QuadMesh& mesh, AleMap ale, PhysParams params, StabParams stab,
              std::optional<AleMap> boundary_map = std::nullopt);

  const DofLayout& layout() const { return layout_; }
  const QuadMesh& mesh() const { return mesh_; }
  const AleMap& ale() const { return ale_; }
  const PhysParams& params() const { return params_; }
  NewtonOptions& newton() { return newton_; }

  std::vector<double> dirichlet_values(double t) const;

  /// Residual (and optionally Jacobian) without Dirichlet modification.
  void assemble(std::span<const double> u, std::span<const double> u_old, double t,
                std::span<double> residual, CsrMatrix* jacobian);

  /// Fresh matrix on the flow pattern.
  CsrMatrix make_matrix() const { return CsrMatrix(pattern_); }

  FlowState step(const FlowState& prev, double t_new, NewtonReport* report = nullptr);

 private:
  const CsrMatrix& stab_at(double t);
  double residual_norm(std::span<const double> r) const;

  const QuadMesh& mesh_;
  AleMap ale_;
  AleMap boundary_map_;
  PhysParams params_;
  StabParams stab_;
  DofLayout layout_;
  std::shared_ptr<const SparsityPattern> pattern_;
  CsrMatrix stab_matrix_;
  double stab_t_ = -1.0;
  bool stab_valid_ = false;
  CsrMatrix jacobian_;
  LuSolver lu_;
  NewtonOptions newton_;
};

FlowState navier_stokes_step(const FlowState& prev, double t_new, const QuadMesh& mesh,
                             const AleMap& ale, const PhysParams& params, const StabParams& stab,
                             NewtonReport* report = nullptr);

struct StokesErrors {
  double grad_v = 0.0;  ///< ||grad(v - v_h)||
  double v = 0.0;       ///< ||v - v_h||
  double p = 0.0;       ///< ||p - p_h||
};

struct StokesResult {
  FlowState state;
  StokesErrors errors;
  double j_div = 0.0;
  SolveReport solve;
  std::size_t cells = 0;
};

struct StokesOptions {
  /// Impose the exact velocity on the io edge too instead of do-nothing; the
  /// pressure at vertex 0 is then pinned to its exact value.
  bool dirichlet_on_io = false;
};

/// Stationary unit-viscosity Stokes on the half lens stretched by AxisScale(a),
/// with the manufactured right-hand side. Throws NumericallySingular.
StokesResult solve_stokes(double a, const QuadMesh& mesh, const StabParams& stab,
                          const StokesOptions& opt = {});

}  // namespace sacflow
