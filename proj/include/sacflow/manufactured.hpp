#pragma once

#include "sacflow/types.hpp"

namespace sacflow {

/// Stream-function solution on the stretched half lens,
/// psi = k^2 sin^3(x1 / a) with k = (x1 / a - 1/2)^2 + x2^2 - 1,
/// v = (d2 psi, -d1 psi), p = d12 psi, f = -lap v + grad p.
class ManufacturedSolution {
 public:
  explicit ManufacturedSolution(double a);

  struct Values {
    Vec2 v;
    Mat2 grad_v;  ///< (i, j) = d v_i / d x_j
    double p = 0.0;
    Vec2 f;
  };

  double stretch() const { return a_; }
  double psi(Vec2 x) const;
  Values eval(Vec2 x) const;

 private:
  double a_;
};

}  // namespace sacflow
