#include "sacflow/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace sacflow {

ManufacturedSolution::ManufacturedSolution(double a) : a_(a) {
  if (!(a > 0.0)) throw std::invalid_argument("ManufacturedSolution: stretch must be positive");
}

double ManufacturedSolution::psi(Vec2 x) const {
  const double u = x.x / a_;
  const double k = (u - 0.5) * (u - 0.5) + x.y * x.y - 1.0;
  const double s = std::sin(u);
  return k * k * s * s * s;
}

// Derivatives are taken in (u, y) with u = x1 / a, so d/dx1 = a^{-1} d/du.
ManufacturedSolution::Values ManufacturedSolution::eval(Vec2 x) const {
  const double u = x.x / a_;
  const double y = x.y;
  const double k = (u - 0.5) * (u - 0.5) + y * y - 1.0;
  const double ku = 2.0 * (u - 0.5);
  const double ky = 2.0 * y;

  // q = k^2
  const double q = k * k;
  const double qu = 2.0 * k * ku;
  const double qy = 2.0 * k * ky;
  const double quu = 2.0 * ku * ku + 4.0 * k;
  const double qyy = 2.0 * ky * ky + 4.0 * k;
  const double quy = 2.0 * ku * ky;
  const double quuu = 12.0 * ku;
  const double qyyy = 12.0 * ky;
  const double quyy = 4.0 * ku;

  // s = sin^3 u
  const double sn = std::sin(u), cs = std::cos(u);
  const double s = sn * sn * sn;
  const double s1 = 3.0 * sn * sn * cs;
  const double s2 = 6.0 * sn * cs * cs - 3.0 * sn * sn * sn;
  const double s3 = 6.0 * cs * cs * cs - 21.0 * sn * sn * cs;

  const double p_u = qu * s + q * s1;
  const double p_y = qy * s;
  const double p_uu = quu * s + 2.0 * qu * s1 + q * s2;
  const double p_uy = quy * s + qy * s1;
  const double p_yy = qyy * s;
  const double p_uuu = quuu * s + 3.0 * quu * s1 + 3.0 * qu * s2 + q * s3;
  const double p_uyy = quyy * s + qyy * s1;
  const double p_yyy = qyyy * s;

  const double ia = 1.0 / a_;
  Values r;
  r.v = {p_y, -ia * p_u};
  r.grad_v = {ia * p_uy, p_yy, -ia * ia * p_uu, -ia * p_uy};
  r.p = ia * p_uy;
  r.f = {-p_yyy, ia * ia * ia * p_uuu + 2.0 * ia * p_uyy};
  return r;
}

}  // namespace sacflow
