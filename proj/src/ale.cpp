#include "sacflow/ale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sacflow/fem.hpp"

namespace sacflow {

AleMap AleMap::axis_scale(double a) {
  if (!(a > 0.0)) throw DegenerateMap("AxisScale stretch must be positive");
  return AleMap(Kind::AxisScale, a, 0.0);
}

AleMap AleMap::alveolar_sin(double a, double omega) {
  if (!(a >= 0.0 && a < 1.0)) throw DegenerateMap("AlveolarSin amplitude must lie in [0, 1)");
  return AleMap(Kind::AlveolarSin, a, omega);
}

AleEval AleMap::eval_branch(Vec2 xh, double t, bool stretched) const {
  AleEval e;
  switch (kind_) {
    case Kind::Identity:
      e.x = xh;
      e.F = Mat2::identity();
      break;
    case Kind::AxisScale:
      e.x = {a_ * xh.x, xh.y};
      e.F = Mat2::diag(a_, 1.0);
      break;
    case Kind::AlveolarSin:
      if (stretched) {
        const double s = 1.0 - a_ * std::cos(omega_ * t);
        e.x = {s * xh.x, xh.y};
        e.F = Mat2::diag(s, 1.0);
        e.v_dom = {a_ * omega_ * std::sin(omega_ * t) * xh.x, 0.0};
      } else {
        e.x = xh;
        e.F = Mat2::identity();
      }
      break;
  }
  e.J = e.F.det();
  if (!(e.J > 0.0))
    throw DegenerateMap("non-positive map determinant " + std::to_string(e.J) + " at (" +
                        std::to_string(xh.x) + ", " + std::to_string(xh.y) + "), t = " +
                        std::to_string(t));
  e.FinvT = e.F.inverse().transpose();
  return e;
}

AleEval AleMap::evaluate(Vec2 x_hat, double t) const {
  return eval_branch(x_hat, t, x_hat.x >= 0.0);
}

bool AleMap::stretched_cell(const QuadMesh& mesh, int cell) const {
  return mesh.cell_centroid(cell).x > 0.0;
}

AleEval AleMap::evaluate_in_cell(const QuadMesh& mesh, int cell, Vec2 x_hat, double t) const {
  if (kind_ != Kind::AlveolarSin) return eval_branch(x_hat, t, true);
  return eval_branch(x_hat, t, stretched_cell(mesh, cell));
}

AleValidation validate(const AleMap& map, const QuadMesh& mesh, std::span<const double> t_samples) {
  AleValidation r;
  r.min_J = std::numeric_limits<double>::infinity();
  r.max_J = -std::numeric_limits<double>::infinity();
  CellValues cv;
  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    eval_cell(mesh, c, cell_rule(), cv);
    for (double t : t_samples) {
      for (int q = 0; q < cv.n; ++q) {
        AleEval e;
        try {
          e = map.evaluate_in_cell(mesh, c, cv.at[q].x, t);
        } catch (const DegenerateMap&) {
          throw DegenerateMap("map degenerate in cell " + std::to_string(c) + " at t = " +
                              std::to_string(t));
        }
        if (e.J < r.min_J) {
          r.min_J = e.J;
          r.worst_cell = c;
          r.worst_t = t;
        }
        r.max_J = std::max(r.max_J, e.J);
      }
    }
  }
  return r;
}

}  // namespace sacflow
