#pragma once

#include <span>
#include <string>
#include <vector>

#include "sacflow/ale.hpp"
#include "sacflow/flow.hpp"
#include "sacflow/manufactured.hpp"
#include "sacflow/mesh.hpp"

namespace sacflow {

/// int J tr(grad v F^{-1})^2 over the whole domain.
double j_div(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> u);
/// int (d_y v1 - d_x v2)^2 over the current domain.
double j_vort(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> u);
/// L2 norm of p over the sac part (x_hat_1 >= 0) of the current domain.
double pressure_norm_sac(const QuadMesh& mesh, const AleMap& ale, double t,
                         std::span<const double> u);
/// Mean of c over the interface line.
double j_gamma0(const QuadMesh& mesh, std::span<const double> c);
/// int c over the current sac (x_hat_1 >= 0).
double j_omega(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> c);
/// int J c over the whole domain.
double total_mass(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> c);
/// int over blood edges of (sigma n) . e1 with sigma = rho nu grad v - p I in the
/// current configuration (n do = J F^{-T} n_hat do_hat).
double j_sigma_blood(const QuadMesh& mesh, const AleMap& ale, double t,
                     std::span<const double> u, const PhysParams& params);
/// Area of the current sac part.
double sac_area(const QuadMesh& mesh, const AleMap& ale, double t);

enum class FunctionalKind { Div, Vorticity, PressureNorm, Gamma0, Omega, WallStress };
FunctionalKind parse_functional(const std::string& name);

/// Dispatch by kind; throws std::invalid_argument if the needed state is missing.
double eval_functional(FunctionalKind kind, const QuadMesh& mesh, const AleMap& ale, double t,
                       const FlowState* flow, std::span<const double> c,
                       const PhysParams& params = {});

/// Errors against the manufactured solution of the AxisScale map.
StokesErrors eval_errors(std::span<const double> u, const ManufacturedSolution& exact,
                         const QuadMesh& mesh, const AleMap& ale);

/// sqrt(reference area / #cells)
double mesh_size(const QuadMesh& mesh);

struct ConvergenceFit {
  enum class Model { Power, OffsetPower };
  Model model = Model::Power;
  double j_e = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  double residual = 0.0;
  /// Data not monotone in h; the fit is still returned.
  bool non_monotone = false;
};

/// Power: f = c h^alpha (log-space least squares, j_e = 0).
/// OffsetPower: f = j_e + c h^alpha (golden-section over alpha).
ConvergenceFit fit_convergence(std::span<const double> h, std::span<const double> f,
                               ConvergenceFit::Model model);

/// Reynolds and Peclet number V r / nu and V r / D.
inline double reynolds(double V, double r, double nu) { return V * r / nu; }
inline double peclet(double V, double r, double D) { return V * r / D; }

}  // namespace sacflow
