#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "sacflow/mesh.hpp"
#include "sacflow/sparse.hpp"
#include "sacflow/types.hpp"

namespace sacflow {

/// Tensor Gauss rule on the unit square [0, 1]^2 (weights sum to 1).
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

LineRule gauss_legendre(int n);
QuadratureRule tensor_gauss(int n);

/// 3x3 Gauss, used for all cell integrals.
const QuadratureRule& cell_rule();
/// 3-point Gauss on [0, 1], used on edges.
const LineRule& edge_rule();

/// Values and unit-square gradients of the four bilinear shape functions at q.
/// Shape function k is 1 at corner k of (0,0), (1,0), (1,1), (0,1).
struct ShapeValues {
  std::array<double, 4> phi;
  std::array<Vec2, 4> dphi;
};
ShapeValues q1_shape(Vec2 q);

/// d x_hat / d q for the bilinear map of a cell; entry (i, j) = d x_i / d q_j.
Mat2 bilinear_jacobian(const std::array<Vec2, 4>& v, Vec2 q);

/// Point of the unit square on local edge e at edge parameter s (edge runs corner e -> e+1).
Vec2 edge_point(int local_edge, double s);

/// Shape data of one cell at one point: position, reference gradients and the
/// reference measure factor det(d x_hat / d q).
struct BasisAt {
  Vec2 x;
  double detG = 0.0;
  std::array<double, 4> phi;
  std::array<Vec2, 4> grad;  ///< gradient w.r.t. x_hat
};
BasisAt basis_eval(const std::array<Vec2, 4>& v, Vec2 q);

/// Basis data at all quadrature points of one cell; dx = reference measure weight.
struct CellValues {
  int n = 0;
  std::array<BasisAt, 16> at;
  std::array<double, 16> dx;
};
void eval_cell(const QuadMesh& mesh, int cell, const QuadratureRule& rule, CellValues& out);

/// Basis data at edge quadrature points; ds = reference length weight.
struct EdgeValues {
  int n = 0;
  std::array<BasisAt, 4> at;
  std::array<double, 4> ds;
  Vec2 normal;  ///< outward reference unit normal
};
void eval_edge(const QuadMesh& mesh, int cell, int local_edge, EdgeValues& out);

/// Flow unknowns are (v1, v2, p) per vertex, dof = 3 * vertex + component.
struct DofLayout {
  enum class Kind { Flow, Transport };
  Kind kind = Kind::Flow;
  std::size_t n_vertices = 0;
  std::vector<char> dirichlet;  ///< per dof

  static DofLayout flow(const QuadMesh& mesh, std::initializer_list<Marker> velocity_markers);
  static DofLayout transport(const QuadMesh& mesh, std::initializer_list<Marker> markers);

  int components() const { return kind == Kind::Flow ? 3 : 1; }
  std::size_t n_dofs() const { return n_vertices * components(); }
  std::size_t n_constrained() const;
};

/// Vertices lying on a boundary edge with any of the given markers.
std::vector<char> vertices_on_markers(const QuadMesh& mesh, std::initializer_list<Marker> markers);

/// Sparsity: vertices coupled when they share a cell, or a patch if `patch_cliques`.
/// Each coupled vertex pair contributes a full components x components block.
SparsityPattern make_pattern(const QuadMesh& mesh, int components, bool patch_cliques);

/// Replace Dirichlet rows by identity rows and the residual entries by zero.
void apply_dirichlet(CsrMatrix& A, std::span<double> residual, const DofLayout& layout);

/// For a linear system A u = b: identity rows with b = prescribed value (row elimination).
void apply_dirichlet_values(CsrMatrix& A, std::span<double> rhs, const DofLayout& layout,
                            std::span<const double> values);

/// Nodal kappa_h = id - i_2h. Requires a patch hierarchy.
std::vector<double> apply_fluctuation(std::span<const double> field, const QuadMesh& mesh);

/// Local fluctuation matrix on the 9 patch nodes: (kappa u)_k = sum_l K[k][l] u_l.
const std::array<std::array<double, 9>, 9>& patch_fluctuation_matrix();

}  // namespace sacflow
