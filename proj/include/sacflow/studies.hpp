#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sacflow/analysis.hpp"
#include "sacflow/config.hpp"
#include "sacflow/flow.hpp"
#include "sacflow/transport.hpp"

namespace sacflow {

inline constexpr const char* kVersion = "1.0.0";

/// A time step failed; carries where.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, int step, double t)
      : std::runtime_error(what), step_(step), t_(t) {}
  int step() const { return step_; }
  double time() const { return t_; }

 private:
  int step_;
  double t_;
};

// ---- Stokes benchmark -------------------------------------------------------

struct StokesRow {
  StabKind kind = StabKind::LpsAniso;
  int level = 0;
  std::size_t cells = 0;
  double h = 0.0;
  bool failed = false;
  std::string failure;
  double j_div = 0.0;
  StokesErrors errors;
  double relative_residual = 0.0;
};

struct StokesStudy {
  double stretch = 1.0;
  std::vector<StokesRow> rows;
  /// Power-law fits per kind over the solved levels: J_div, p, grad v, v.
  std::vector<std::pair<StabKind, std::array<std::optional<ConvergenceFit>, 4>>> fits;
};

StokesStudy run_stokes_study(const RunConfig& cfg, std::ostream* log = nullptr);
void write_stokes_csv(std::ostream& os, const StokesStudy& study, const RunConfig& cfg);

// ---- Sac simulation ---------------------------------------------------------

struct SacSample {
  double t = 0.0;
  double j_gamma0 = 0.0;
  double j_omega = 0.0;
  double j_sigma = 0.0;
  double j_vort = 0.0;
  double p_norm = 0.0;
  int newton_iterations = 0;
};

struct SacRun {
  std::vector<SacSample> series;
  FlowState flow;
  TransportState conc;
  std::size_t cells = 0;
  double h = 0.0;
};

struct SacHooks {
  /// Called after every step with the step index (1-based) and the new states.
  std::function<void(int, const QuadMesh&, const AleMap&, const FlowState&, const TransportState&)>
      on_step;
  std::ostream* log = nullptr;
};

/// Geometry map used for the run (identity for fixed-domain mode).
AleMap geometry_map(const RunConfig& cfg);
/// Map supplying the wall velocity.
AleMap wall_velocity_map(const RunConfig& cfg);

/// Runs to cfg.t_end on the sac mesh at cfg.sac_level with the first stab kind.
SacRun run_sac_simulation(const RunConfig& cfg, const SacHooks& hooks = {});
void write_sac_csv(std::ostream& os, const SacRun& run, const RunConfig& cfg);

// ---- Sac convergence --------------------------------------------------------

struct ConvergenceRow {
  StabKind kind = StabKind::LpsAniso;
  int level = 0;
  std::size_t cells = 0;
  double h = 0.0;
  double j_vort = 0.0;
  double p_norm = 0.0;
  double j_omega = 0.0;
};

struct ConvergenceStudy {
  double time = 0.0;
  std::vector<ConvergenceRow> rows;
  /// Offset-power fits per kind on the three finest levels: vort, p, omega.
  std::vector<std::pair<StabKind, std::array<ConvergenceFit, 3>>> fits;
};

ConvergenceStudy run_convergence(const RunConfig& cfg, std::ostream* log = nullptr);
void write_convergence_csv(std::ostream& os, const ConvergenceStudy& study, const RunConfig& cfg);

/// Metadata comment block shared by every CSV.
void write_csv_header(std::ostream& os, const RunConfig& cfg);
/// %.6e
std::string fmt(double v);

// ---- VTK --------------------------------------------------------------------

/// Legacy VTK with points at mapped positions and point data velocity, pressure,
/// concentration (empty spans are skipped).
void write_vtk_solution(std::ostream& os, const QuadMesh& mesh, const AleMap& ale, double t,
                        std::span<const double> u, std::span<const double> c);

}  // namespace sacflow
