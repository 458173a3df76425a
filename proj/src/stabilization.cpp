#include "sacflow/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sacflow/fem.hpp"

namespace sacflow {

StabParams default_stab(StabKind kind, double nu, IsoMode mode) {
  StabParams s;
  s.kind = kind;
  s.mode = mode;
  s.alpha = kind == StabKind::IpAniso ? 1.0 / (60.0 * nu) : 1.0 / nu;
  return s;
}

std::string to_string(StabKind k) {
  switch (k) {
    case StabKind::LpsAniso: return "lps_aniso";
    case StabKind::IpAniso: return "ip_aniso";
    case StabKind::LpsIso: return "lps_iso";
    case StabKind::LpsSimple: return "lps_simple";
  }
  return "unknown";
}

std::string to_string(IsoMode m) {
  return m == IsoMode::AsPrinted ? "as_printed" : "scaled_fluctuation";
}

StabKind parse_stab_kind(const std::string& s) {
  if (s == "lps_aniso") return StabKind::LpsAniso;
  if (s == "ip_aniso") return StabKind::IpAniso;
  if (s == "lps_iso") return StabKind::LpsIso;
  if (s == "lps_simple") return StabKind::LpsSimple;
  throw ConfigError("unknown stabilisation kind '" + s + "'");
}

IsoMode parse_iso_mode(const std::string& s) {
  if (s == "as_printed") return IsoMode::AsPrinted;
  if (s == "scaled_fluctuation") return IsoMode::ScaledFluctuation;
  throw ConfigError("unknown isotropic mode '" + s + "'");
}

namespace {

using Local9 = std::array<std::array<double, 9>, 9>;

// Patch-node index of each vertex of each sibling cell.
std::array<std::array<int, 4>, 4> patch_local_nodes(const QuadMesh& mesh, const Patch& p) {
  std::array<std::array<int, 4>, 4> loc{};
  for (int k = 0; k < 4; ++k) {
    const auto& cell = mesh.cells()[p.cells[k]];
    for (int i = 0; i < 4; ++i) {
      const auto it = std::find(p.nodes.begin(), p.nodes.end(), cell[i]);
      loc[k][i] = static_cast<int>(it - p.nodes.begin());
    }
  }
  return loc;
}

// M += alpha K^T A K on the patch nodes.
void scatter_patch(const Patch& p, const Local9& A, double alpha, CsrMatrix& M, PressureBlock pb) {
  const auto& K = patch_fluctuation_matrix();
  Local9 AK{};
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      double s = 0.0;
      for (int l = 0; l < 9; ++l) s += A[i][l] * K[l][j];
      AK[i][j] = s;
    }
  for (int i = 0; i < 9; ++i) {
    const int row = pb.stride * p.nodes[i] + pb.offset;
    for (int j = 0; j < 9; ++j) {
      double s = 0.0;
      for (int l = 0; l < 9; ++l) s += K[l][i] * AK[l][j];
      if (s != 0.0) M.add(row, pb.stride * p.nodes[j] + pb.offset, alpha * s);
    }
  }
}

// Largest distance between patch corners.
double patch_diameter(const QuadMesh& mesh, const Patch& p) {
  const auto v = mesh.vertices();
  const Vec2 a = v[p.nodes[0]], b = v[p.nodes[2]], c = v[p.nodes[8]], d = v[p.nodes[6]];
  return std::max({norm(c - a), norm(d - b), norm(b - a), norm(c - b), norm(d - c), norm(a - d)});
}

void require_patches(const QuadMesh& mesh, const char* what) {
  if (!mesh.has_patches()) throw MeshError(std::string(what) + ": mesh has no patch hierarchy");
}

}  // namespace

void assemble_lps_aniso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                        CsrMatrix& M, PressureBlock pb) {
  require_patches(mesh, "assemble_lps_aniso");
  CellValues cv;
  for (const Patch& p : mesh.patches()) {
    const auto loc = patch_local_nodes(mesh, p);
    Local9 A{};
    for (int k = 0; k < 4; ++k) {
      const int c = p.cells[k];
      const CellMetrics m = cell_metrics(mesh, c);
      const double h1 = m.h1_hat * m.h1_hat, h2 = m.h2_hat * m.h2_hat;
      eval_cell(mesh, c, cell_rule(), cv);
      for (int q = 0; q < cv.n; ++q) {
        const double J = ale.evaluate_in_cell(mesh, c, cv.at[q].x, t).J;
        const double w = J * cv.dx[q];
        const auto& g = cv.at[q].grad;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            A[loc[k][i]][loc[k][j]] += w * (h1 * g[i].x * g[j].x + h2 * g[i].y * g[j].y);
      }
    }
    scatter_patch(p, A, alpha, M, pb);
  }
}

void assemble_ip_aniso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                       CsrMatrix& M, PressureBlock pb) {
  require_patches(mesh, "assemble_ip_aniso");
  const auto& rule = edge_rule();
  for (const InteriorEdge& e : interior_patch_edges(mesh)) {
    const auto va = mesh.cell_vertices(e.a.cell);
    const auto vb = mesh.cell_vertices(e.b.cell);
    const auto [ea0, ea1] = mesh.edge_vertices(e.a.cell, e.a.local_edge);
    const auto [eb0, eb1] = mesh.edge_vertices(e.b.cell, e.b.local_edge);
    if (ea0 != eb1 || ea1 != eb0)
      throw MeshError("assemble_ip_aniso: non-conforming edge pairing at cell " +
                      std::to_string(e.a.cell));
    const Vec2 n = mesh.edge_normal(e.a.cell, e.a.local_edge);
    const double hn = normal_extent(mesh, e.a.cell, e.a.local_edge);
    const double len = mesh.edge_length(e.a.cell, e.a.local_edge);

    std::array<int, 8> rows{};
    for (int i = 0; i < 4; ++i) {
      rows[i] = pb.stride * mesh.cells()[e.a.cell][i] + pb.offset;
      rows[4 + i] = pb.stride * mesh.cells()[e.b.cell][i] + pb.offset;
    }
    std::array<std::array<double, 8>, 8> A{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const BasisAt ba = basis_eval(va, edge_point(e.a.local_edge, s));
      const BasisAt bb = basis_eval(vb, edge_point(e.b.local_edge, 1.0 - s));
      const double J = ale.evaluate_in_cell(mesh, e.a.cell, ba.x, t).J;
      const double w = J * hn * hn * hn * rule.weights[q] * len;
      std::array<double, 8> jump{};
      for (int i = 0; i < 4; ++i) {
        jump[i] = dot(ba.grad[i], n);
        jump[4 + i] = -dot(bb.grad[i], n);
      }
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) A[i][j] += w * jump[i] * jump[j];
    }
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) M.add(rows[i], rows[j], alpha * A[i][j]);
  }
}

void assemble_lps_iso(const QuadMesh& mesh, const AleMap& ale, double t, double alpha,
                      bool simple, IsoMode mode, CsrMatrix& M, PressureBlock pb) {
  CellValues cv;
  auto cell_block = [&](int c, std::array<std::array<double, 4>, 4>& A) {
    eval_cell(mesh, c, cell_rule(), cv);
    for (int q = 0; q < cv.n; ++q) {
      std::array<Vec2, 4> g = cv.at[q].grad;
      double w = cv.dx[q];
      if (!simple) {
        const AleEval e = ale.evaluate_in_cell(mesh, c, cv.at[q].x, t);
        for (auto& gi : g) gi = e.FinvT * gi;
        w *= e.J;
      }
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A[i][j] += w * dot(g[i], g[j]);
    }
  };

  if (mode == IsoMode::AsPrinted) {
    for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
      std::array<std::array<double, 4>, 4> A{};
      cell_block(c, A);
      const auto& cell = mesh.cells()[c];
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          M.add(pb.stride * cell[i] + pb.offset, pb.stride * cell[j] + pb.offset, alpha * A[i][j]);
    }
    return;
  }

  require_patches(mesh, "assemble_lps_iso");
  for (const Patch& p : mesh.patches()) {
    const auto loc = patch_local_nodes(mesh, p);
    Local9 A{};
    for (int k = 0; k < 4; ++k) {
      std::array<std::array<double, 4>, 4> Ac{};
      cell_block(p.cells[k], Ac);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A[loc[k][i]][loc[k][j]] += Ac[i][j];
    }
    const double hP = patch_diameter(mesh, p);
    scatter_patch(p, A, alpha * hP * hP, M, pb);
  }
}

void assemble_stabilization(const StabParams& stab, const QuadMesh& mesh, const AleMap& ale,
                            double t, CsrMatrix& M, PressureBlock pb) {
  if (!(stab.alpha > 0.0)) throw ConfigError("stabilisation parameter must be positive");
  switch (stab.kind) {
    case StabKind::LpsAniso: assemble_lps_aniso(mesh, ale, t, stab.alpha, M, pb); break;
    case StabKind::IpAniso: assemble_ip_aniso(mesh, ale, t, stab.alpha, M, pb); break;
    case StabKind::LpsIso: assemble_lps_iso(mesh, ale, t, stab.alpha, false, stab.mode, M, pb); break;
    case StabKind::LpsSimple: assemble_lps_iso(mesh, ale, t, stab.alpha, true, stab.mode, M, pb); break;
  }
}

CsrMatrix stabilization_matrix(const StabParams& stab, const QuadMesh& mesh, const AleMap& ale,
                               double t) {
  CsrMatrix M(std::make_shared<const SparsityPattern>(make_pattern(mesh, 1, mesh.has_patches())));
  assemble_stabilization(stab, mesh, ale, t, M);
  return M;
}

double quadratic_form(const CsrMatrix& M, std::span<const double> x) {
  std::vector<double> y(x.size());
  M.multiply(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace sacflow
