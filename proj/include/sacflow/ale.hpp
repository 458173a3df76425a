#pragma once

#include <span>
#include <stdexcept>

#include "sacflow/mesh.hpp"
#include "sacflow/types.hpp"

namespace sacflow {

class DegenerateMap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AleEval {
  Vec2 x;        ///< mapped point T(x_hat, t)
  Mat2 F;        ///< d T / d x_hat
  double J = 1;  ///< det F
  Mat2 FinvT;    ///< F^{-T}
  Vec2 v_dom;    ///< d T / d t
};

/// Time-dependent map from the reference domain to the current domain.
///
/// AlveolarSin stretches x_hat_1 >= 0 by (1 - a cos(omega t)) and is the identity
/// on the duct x_hat_1 < 0. Its gradient jumps across x_hat_1 = 0, so cell
/// quantities go through evaluate_in_cell, which picks the branch from the cell.
class AleMap {
 public:
  enum class Kind { Identity, AxisScale, AlveolarSin };

  static AleMap identity() { return AleMap(Kind::Identity, 1.0, 0.0); }
  static AleMap axis_scale(double a);
  static AleMap alveolar_sin(double a = 0.09, double omega = 0.4 * M_PI);

  Kind kind() const { return kind_; }
  double amplitude() const { return a_; }
  double omega() const { return omega_; }

  AleEval evaluate(Vec2 x_hat, double t) const;
  /// Branch chosen by the side of x_hat_1 = 0 the cell lies on.
  AleEval evaluate_in_cell(const QuadMesh& mesh, int cell, Vec2 x_hat, double t) const;
  /// True if the cell moves with the stretched branch.
  bool stretched_cell(const QuadMesh& mesh, int cell) const;

 private:
  AleMap(Kind k, double a, double omega) : kind_(k), a_(a), omega_(omega) {}
  AleEval eval_branch(Vec2 x_hat, double t, bool stretched) const;

  Kind kind_;
  double a_;
  double omega_;
};

struct AleValidation {
  double min_J = 0.0;
  double max_J = 0.0;
  int worst_cell = -1;
  double worst_t = 0.0;
};

/// Checks J > 0 at every cell quadrature point for all sample times.
AleValidation validate(const AleMap& map, const QuadMesh& mesh, std::span<const double> t_samples);

}  // namespace sacflow
