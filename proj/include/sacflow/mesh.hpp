#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sacflow/types.hpp"

namespace sacflow {

enum class Marker : std::uint8_t { None = 0, Io = 1, Wall = 2, Blood = 3 };

std::string to_string(Marker m);

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Straight segment or circular arc, parameterised by s in [0, 1].
struct EdgeCurve {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  Vec2 from;
  Vec2 to;
  Vec2 center;
  double radius = 0.0;
  double theta_from = 0.0;
  double theta_to = 0.0;

  static EdgeCurve line(Vec2 a, Vec2 b);
  static EdgeCurve arc(Vec2 center, double radius, double theta_from, double theta_to);
  Vec2 at(double s) const;
};

/// One coarse quadrilateral described by its four boundary curves.
///
/// Corners p0..p3 are counterclockwise. The curves run bottom p0->p1, right p1->p2,
/// top p3->p2 and left p0->p3, and the interior is the transfinite (Coons) blend of
/// them, so refined vertices on curved sides land exactly on the curve.
struct MacroCell {
  std::array<Vec2, 4> corners;
  std::array<EdgeCurve, 4> sides;  // bottom, right, top, left
  /// Marker of each cell edge in local numbering (0: p0p1, 1: p1p2, 2: p2p3, 3: p3p0).
  std::array<Marker, 4> edge_marker{Marker::None, Marker::None, Marker::None, Marker::None};
  /// Edge lies on the internal interface line (duct/sac junction).
  std::array<bool, 4> interface_edge{false, false, false, false};

  static MacroCell straight(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3);
  Vec2 map(double xi, double eta) const;
};

struct MacroGeometry {
  std::vector<MacroCell> cells;
  /// Analytic boundary residual used by invariant checks; zero on the boundary curve.
  enum class Shape { Polygonal, HalfLens } shape = Shape::Polygonal;
};

struct BoundaryEdge {
  int cell = -1;
  int local_edge = -1;
  Marker marker = Marker::None;
};

struct CellEdge {
  int cell = -1;
  int local_edge = -1;
};

/// Edge shared by two cells. The normal used for jumps points out of `a`.
struct InteriorEdge {
  CellEdge a;
  CellEdge b;
};

/// Four sibling cells from one refinement and the 3x3 lattice of patch nodes.
///
/// Node k = 3 * j + i sits at parent parameter (i / 2, j / 2); corners are nodes
/// 0, 2, 6 and 8.
struct Patch {
  std::array<int, 4> cells{};
  std::array<int, 9> nodes{};
};

inline constexpr std::array<int, 4> kPatchCornerNodes{0, 2, 8, 6};

/// Location of a cell inside its macro cell's parameter square.
struct CellOrigin {
  int macro = -1;
  double xi0 = 0.0, xi1 = 1.0, eta0 = 0.0, eta1 = 1.0;
};

struct CellMetrics {
  double h1_hat = 0.0;  ///< extent along reference x
  double h2_hat = 0.0;  ///< extent along reference y
  /// False when the reference cell is not an axis-aligned rectangle; the extents
  /// are then those of its bounding box.
  bool rectangular = true;
};

/// Patch-hierarchical quadrilateral mesh on a reference domain. Immutable once built.
class QuadMesh {
 public:
  /// Unrefined mesh whose cells are the macro cells (no patch structure).
  static QuadMesh from_macro(std::shared_ptr<const MacroGeometry> geometry);

  std::span<const Vec2> vertices() const { return vertices_; }
  std::span<const std::array<int, 4>> cells() const { return cells_; }
  std::span<const BoundaryEdge> boundary_edges() const { return boundary_edges_; }
  /// Cell edges on the duct/sac junction line, seen from the cell on the x >= 0 side.
  std::span<const CellEdge> interface_edges() const { return interface_edges_; }
  std::span<const Patch> patches() const { return patches_; }
  std::span<const CellOrigin> origins() const { return origins_; }

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  bool has_patches() const { return !patches_.empty(); }
  int patch_of_cell(int cell) const { return patch_of_cell_.at(cell); }
  /// Number of refinements applied to the macro mesh.
  int refinement_level() const { return level_; }
  const MacroGeometry& geometry() const { return *geometry_; }
  std::shared_ptr<const MacroGeometry> geometry_ptr() const { return geometry_; }

  /// Neighbour across local edge `e` of `cell` (cell = -1 on the boundary).
  CellEdge neighbor(int cell, int e) const { return neighbors_[4 * cell + e]; }

  std::array<Vec2, 4> cell_vertices(int cell) const;
  std::array<int, 2> edge_vertices(int cell, int local_edge) const;
  Vec2 cell_centroid(int cell) const;
  /// Outward unit normal of a cell edge (reference coordinates).
  Vec2 edge_normal(int cell, int local_edge) const;
  double edge_length(int cell, int local_edge) const;
  double reference_area() const;

  /// Same mesh with one boundary marker replaced by another.
  QuadMesh with_marker_replaced(Marker from, Marker to) const;

 private:
  friend QuadMesh uniform_refine(const QuadMesh& mesh);
  void finalize();

  std::shared_ptr<const MacroGeometry> geometry_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<CellOrigin> origins_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<CellEdge> interface_edges_;
  std::vector<Patch> patches_;
  std::vector<int> patch_of_cell_;
  std::vector<CellEdge> neighbors_;
  int level_ = 0;
};

/// Split every cell into four; the children of each cell form one patch.
QuadMesh uniform_refine(const QuadMesh& mesh);

/// Half lens {x1 > 0, (x1 - 0.5)^2 + x2^2 < 1} from five macro cells refined `levels` times.
QuadMesh generate_half_lens_mesh(int levels);

/// Dimensions of the model alveolar sac (mm). All macro cells are axis-aligned rectangles.
struct SacGeometrySpec {
  int n_alveoli = 5;
  int n_blood_channels = 6;
  double duct_length = 0.6;
  double duct_cell_length = 0.15;
  double trunk_length = 0.5;
  double trunk_height = 0.2;
  double alveolus_width = 0.15;
  double alveolus_depth = 0.12;
  double channel_width = 0.02;
  double channel_length = 0.03;
  /// Outward sagitta of the rounded alveolus walls (0: rectangular alveoli).
  double wall_bulge = 0.015;
  std::array<double, 2> top_alveoli_x{0.05, 0.30};
  std::array<double, 2> bottom_alveoli_x{0.15, 0.35};
};

MacroGeometry alveolar_sac_macro_geometry(const SacGeometrySpec& spec);

/// Sac mesh at study level `level` (level 0 is the macro mesh refined once).
QuadMesh generate_alveolar_sac_mesh(const SacGeometrySpec& spec, int level);

/// The four interior edges of every patch.
std::vector<InteriorEdge> interior_patch_edges(const QuadMesh& mesh);

CellMetrics cell_metrics(const QuadMesh& mesh, int cell);
/// Extent of the reference cell in the direction normal to one of its edges.
double normal_extent(const QuadMesh& mesh, int cell, int local_edge);

/// Throws MeshError naming the first cell whose bilinear map has det <= 0.
void check_cells_positive(const QuadMesh& mesh);

/// Legacy VTK unstructured grid: quads plus boundary lines, cell data "marker".
void write_vtk_mesh(std::ostream& os, const QuadMesh& mesh);

}  // namespace sacflow
