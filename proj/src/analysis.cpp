#include "sacflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sacflow/fem.hpp"

namespace sacflow {

namespace {

bool in_sac(const QuadMesh& mesh, int cell) { return mesh.cell_centroid(cell).x > 0.0; }

struct FlowAt {
  Vec2 v;
  double p = 0.0;
  Mat2 G;  // physical velocity gradient
};

FlowAt flow_at(const QuadMesh& mesh, int cell, const BasisAt& b, const AleEval& e,
               std::span<const double> u) {
  FlowAt f;
  const auto& vs = mesh.cells()[cell];
  for (int a = 0; a < 4; ++a) {
    const int n = vs[a];
    const Vec2 va{u[3 * n], u[3 * n + 1]};
    const Vec2 g = e.FinvT * b.grad[a];
    f.v += b.phi[a] * va;
    f.p += b.phi[a] * u[3 * n + 2];
    f.G.a11 += va.x * g.x;
    f.G.a12 += va.x * g.y;
    f.G.a21 += va.y * g.x;
    f.G.a22 += va.y * g.y;
  }
  return f;
}

double scalar_at(const QuadMesh& mesh, int cell, const BasisAt& b, std::span<const double> c) {
  const auto& vs = mesh.cells()[cell];
  double s = 0.0;
  for (int a = 0; a < 4; ++a) s += b.phi[a] * c[vs[a]];
  return s;
}

// Sum over cells (optionally sac only) of int J * integrand(cell, basis, map).
template <class F>
double integrate(const QuadMesh& mesh, const AleMap& ale, double t, bool sac_only, F&& integrand,
                 const QuadratureRule& rule = cell_rule()) {
  CellValues cv;
  double sum = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    if (sac_only && !in_sac(mesh, c)) continue;
    eval_cell(mesh, c, rule, cv);
    for (int q = 0; q < cv.n; ++q) {
      const AleEval e = ale.evaluate_in_cell(mesh, c, cv.at[q].x, t);
      sum += e.J * cv.dx[q] * integrand(c, cv.at[q], e);
    }
  }
  return sum;
}

}  // namespace

double j_div(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> u) {
  return integrate(mesh, ale, t, false, [&](int c, const BasisAt& b, const AleEval& e) {
    const double d = flow_at(mesh, c, b, e, u).G.trace();
    return d * d;
  });
}

double j_vort(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> u) {
  return integrate(mesh, ale, t, false, [&](int c, const BasisAt& b, const AleEval& e) {
    const Mat2 G = flow_at(mesh, c, b, e, u).G;
    const double w = G.a12 - G.a21;
    return w * w;
  });
}

double pressure_norm_sac(const QuadMesh& mesh, const AleMap& ale, double t,
                         std::span<const double> u) {
  return std::sqrt(integrate(mesh, ale, t, true, [&](int c, const BasisAt& b, const AleEval& e) {
    const double p = flow_at(mesh, c, b, e, u).p;
    return p * p;
  }));
}

double j_gamma0(const QuadMesh& mesh, std::span<const double> c) {
  if (mesh.interface_edges().empty()) throw std::invalid_argument("j_gamma0: mesh has no interface");
  EdgeValues ev;
  double integral = 0.0, length = 0.0;
  for (const CellEdge& e : mesh.interface_edges()) {
    eval_edge(mesh, e.cell, e.local_edge, ev);
    for (int q = 0; q < ev.n; ++q) {
      integral += ev.ds[q] * scalar_at(mesh, e.cell, ev.at[q], c);
      length += ev.ds[q];
    }
  }
  return integral / length;
}

double j_omega(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> c) {
  return integrate(mesh, ale, t, true, [&](int cell, const BasisAt& b, const AleEval&) {
    return scalar_at(mesh, cell, b, c);
  });
}

double total_mass(const QuadMesh& mesh, const AleMap& ale, double t, std::span<const double> c) {
  return integrate(mesh, ale, t, false, [&](int cell, const BasisAt& b, const AleEval&) {
    return scalar_at(mesh, cell, b, c);
  });
}

double sac_area(const QuadMesh& mesh, const AleMap& ale, double t) {
  return integrate(mesh, ale, t, true, [](int, const BasisAt&, const AleEval&) { return 1.0; });
}

double j_sigma_blood(const QuadMesh& mesh, const AleMap& ale, double t,
                     std::span<const double> u, const PhysParams& params) {
  EdgeValues ev;
  double sum = 0.0;
  for (const BoundaryEdge& be : mesh.boundary_edges()) {
    if (be.marker != Marker::Blood) continue;
    eval_edge(mesh, be.cell, be.local_edge, ev);
    for (int q = 0; q < ev.n; ++q) {
      const AleEval e = ale.evaluate_in_cell(mesh, be.cell, ev.at[q].x, t);
      const FlowAt f = flow_at(mesh, be.cell, ev.at[q], e, u);
      const Vec2 nda = e.J * (e.FinvT * ev.normal);
      const Vec2 Gn = f.G * nda;
      sum += ev.ds[q] * (params.rho * params.nu * Gn.x - f.p * nda.x);
    }
  }
  return sum;
}

FunctionalKind parse_functional(const std::string& name) {
  if (name == "div") return FunctionalKind::Div;
  if (name == "vort") return FunctionalKind::Vorticity;
  if (name == "p_norm") return FunctionalKind::PressureNorm;
  if (name == "gamma0") return FunctionalKind::Gamma0;
  if (name == "omega") return FunctionalKind::Omega;
  if (name == "sigma_bl") return FunctionalKind::WallStress;
  throw std::invalid_argument("unknown functional '" + name + "'");
}

double eval_functional(FunctionalKind kind, const QuadMesh& mesh, const AleMap& ale, double t,
                       const FlowState* flow, std::span<const double> c,
                       const PhysParams& params) {
  auto need_flow = [&]() -> std::span<const double> {
    if (!flow) throw std::invalid_argument("functional needs a flow state");
    return flow->u;
  };
  auto need_c = [&] {
    if (c.empty()) throw std::invalid_argument("functional needs a concentration");
  };
  switch (kind) {
    case FunctionalKind::Div: return j_div(mesh, ale, t, need_flow());
    case FunctionalKind::Vorticity: return j_vort(mesh, ale, t, need_flow());
    case FunctionalKind::PressureNorm: return pressure_norm_sac(mesh, ale, t, need_flow());
    case FunctionalKind::WallStress: return j_sigma_blood(mesh, ale, t, need_flow(), params);
    case FunctionalKind::Gamma0: need_c(); return j_gamma0(mesh, c);
    case FunctionalKind::Omega: need_c(); return j_omega(mesh, ale, t, c);
  }
  throw std::invalid_argument("unknown functional kind");
}

StokesErrors eval_errors(std::span<const double> u, const ManufacturedSolution& exact,
                         const QuadMesh& mesh, const AleMap& ale) {
  static const QuadratureRule rule = tensor_gauss(4);
  double eg = 0.0, ev = 0.0, ep = 0.0;
  CellValues cv;
  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    eval_cell(mesh, c, rule, cv);
    for (int q = 0; q < cv.n; ++q) {
      const AleEval e = ale.evaluate_in_cell(mesh, c, cv.at[q].x, 0.0);
      const FlowAt f = flow_at(mesh, c, cv.at[q], e, u);
      const auto ex = exact.eval(e.x);
      const double w = e.J * cv.dx[q];
      eg += w * (f.G - ex.grad_v).frobenius2();
      const Vec2 dv = f.v - ex.v;
      ev += w * dot(dv, dv);
      ep += w * (f.p - ex.p) * (f.p - ex.p);
    }
  }
  return {std::sqrt(eg), std::sqrt(ev), std::sqrt(ep)};
}

double mesh_size(const QuadMesh& mesh) {
  return std::sqrt(mesh.reference_area() / static_cast<double>(mesh.n_cells()));
}

namespace {

// Least-squares (j_e, c) for fixed alpha; returns the squared residual.
double offset_fit(std::span<const double> h, std::span<const double> f, double alpha, double& je,
                  double& c) {
  const std::size_t n = h.size();
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::pow(h[i], alpha);
    s1 += 1.0;
    sx += x;
    sxx += x * x;
    sy += f[i];
    sxy += x * f[i];
  }
  const double det = s1 * sxx - sx * sx;
  if (det == 0.0) {
    je = sy / s1;
    c = 0.0;
  } else {
    c = (s1 * sxy - sx * sy) / det;
    je = (sy - c * sx) / s1;
  }
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f[i] - je - c * std::pow(h[i], alpha);
    r += d * d;
  }
  return r;
}

}  // namespace

ConvergenceFit fit_convergence(std::span<const double> h, std::span<const double> f,
                               ConvergenceFit::Model model) {
  if (h.size() != f.size()) throw std::invalid_argument("fit_convergence: size mismatch");
  const std::size_t n = h.size();
  ConvergenceFit fit;
  fit.model = model;

  // Order by decreasing h and check that successive differences keep one sign.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  int sign = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const double d = f[idx[k]] - f[idx[k - 1]];
    const int s = (d > 0) - (d < 0);
    if (s != 0 && sign != 0 && s != sign) fit.non_monotone = true;
    if (s != 0) sign = s;
  }

  if (model == ConvergenceFit::Model::Power) {
    if (n < 2) throw std::invalid_argument("fit_convergence: power model needs >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(h[i]);
      const double y = std::log(std::abs(f[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_convergence: all h equal");
    fit.alpha = (n * sxy - sx * sy) / det;
    const double logc = (sy - fit.alpha * sx) / n;
    fit.c = std::exp(logc);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::log(std::abs(f[i])) - logc - fit.alpha * std::log(h[i]);
      r += d * d;
    }
    fit.residual = std::sqrt(r);
    return fit;
  }

  if (n < 3) throw std::invalid_argument("fit_convergence: offset_power model needs >= 3 points");
  double je = 0.0, c = 0.0;
  // Coarse scan to bracket the global minimum, then golden-section refinement.
  const double lo = 0.01, hi = 20.0, step = 0.01;
  double best_a = lo, best_r = std::numeric_limits<double>::infinity();
  for (double a = lo; a <= hi + 1e-12; a += step) {
    const double r = offset_fit(h, f, a, je, c);
    if (r < best_r) {
      best_r = r;
      best_a = a;
    }
  }
  double a = std::max(lo, best_a - step), b = std::min(hi, best_a + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = offset_fit(h, f, x1, je, c), f2 = offset_fit(h, f, x2, je, c);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = offset_fit(h, f, x1, je, c);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = offset_fit(h, f, x2, je, c);
    }
  }
  fit.alpha = 0.5 * (a + b);
  fit.residual = std::sqrt(offset_fit(h, f, fit.alpha, fit.j_e, fit.c));
  return fit;
}

}  // namespace sacflow
