#include "sacflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "sacflow/fem.hpp"

namespace sacflow {

std::string to_string(Marker m) {
  switch (m) {
    case Marker::None: return "none";
    case Marker::Io: return "io";
    case Marker::Wall: return "wall";
    case Marker::Blood: return "blood";
  }
  return "unknown";
}

EdgeCurve EdgeCurve::line(Vec2 a, Vec2 b) {
  EdgeCurve c;
  c.kind = Kind::Line;
  c.from = a;
  c.to = b;
  return c;
}

EdgeCurve EdgeCurve::arc(Vec2 center, double radius, double theta_from, double theta_to) {
  EdgeCurve c;
  c.kind = Kind::Arc;
  c.center = center;
  c.radius = radius;
  c.theta_from = theta_from;
  c.theta_to = theta_to;
  c.from = center + radius * Vec2{std::cos(theta_from), std::sin(theta_from)};
  c.to = center + radius * Vec2{std::cos(theta_to), std::sin(theta_to)};
  return c;
}

Vec2 EdgeCurve::at(double s) const {
  if (s == 0.0) return from;
  if (s == 1.0) return to;
  if (kind == Kind::Line) return (1.0 - s) * from + s * to;
  const double th = (1.0 - s) * theta_from + s * theta_to;
  return center + radius * Vec2{std::cos(th), std::sin(th)};
}

MacroCell MacroCell::straight(Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3) {
  MacroCell m;
  m.corners = {p0, p1, p2, p3};
  m.sides = {EdgeCurve::line(p0, p1), EdgeCurve::line(p1, p2), EdgeCurve::line(p3, p2),
             EdgeCurve::line(p0, p3)};
  return m;
}

Vec2 MacroCell::map(double xi, double eta) const {
  const auto& [p0, p1, p2, p3] = corners;
  const Vec2 bottom = sides[0].at(xi);
  const Vec2 right = sides[1].at(eta);
  const Vec2 top = sides[2].at(xi);
  const Vec2 left = sides[3].at(eta);
  const Vec2 bilinear = (1.0 - xi) * (1.0 - eta) * p0 + xi * (1.0 - eta) * p1 + xi * eta * p2 +
                        (1.0 - xi) * eta * p3;
  return (1.0 - eta) * bottom + eta * top + (1.0 - xi) * left + xi * right - bilinear;
}

namespace {

// Local edge e runs from corner e to corner (e + 1) % 4.
constexpr std::array<std::array<int, 2>, 4> kEdgeCorners{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

QuadMesh QuadMesh::from_macro(std::shared_ptr<const MacroGeometry> geometry) {
  if (!geometry || geometry->cells.empty()) throw MeshError("empty macro geometry");
  QuadMesh mesh;
  mesh.geometry_ = std::move(geometry);
  std::map<std::pair<long long, long long>, int> index;
  auto vertex_id = [&](Vec2 p) {
    const auto key = std::make_pair(std::llround(p.x * 1e10), std::llround(p.y * 1e10));
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(mesh.vertices_.size());
    mesh.vertices_.push_back(p);
    index.emplace(key, id);
    return id;
  };
  const auto& macros = mesh.geometry_->cells;
  for (std::size_t m = 0; m < macros.size(); ++m) {
    std::array<int, 4> cell{};
    for (int k = 0; k < 4; ++k) cell[k] = vertex_id(macros[m].corners[k]);
    const int c = static_cast<int>(mesh.cells_.size());
    mesh.cells_.push_back(cell);
    mesh.origins_.push_back({static_cast<int>(m), 0.0, 1.0, 0.0, 1.0});
    for (int e = 0; e < 4; ++e) {
      if (macros[m].edge_marker[e] != Marker::None)
        mesh.boundary_edges_.push_back({c, e, macros[m].edge_marker[e]});
      if (macros[m].interface_edge[e]) mesh.interface_edges_.push_back({c, e});
    }
  }
  mesh.finalize();
  return mesh;
}

void QuadMesh::finalize() {
  neighbors_.assign(4 * cells_.size(), CellEdge{});
  std::unordered_map<std::uint64_t, CellEdge> open;
  open.reserve(2 * cells_.size());
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c) {
    for (int e = 0; e < 4; ++e) {
      const auto [a, b] = edge_vertices(c, e);
      const auto key = edge_key(a, b);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, CellEdge{c, e});
      } else {
        const CellEdge other = it->second;
        if (neighbors_[4 * other.cell + other.local_edge].cell >= 0)
          throw MeshError("edge shared by more than two cells at cell " + std::to_string(c));
        neighbors_[4 * c + e] = other;
        neighbors_[4 * other.cell + other.local_edge] = {c, e};
      }
    }
  }

  std::vector<Marker> marker_of(4 * cells_.size(), Marker::None);
  for (const auto& be : boundary_edges_) {
    auto& slot = marker_of[4 * be.cell + be.local_edge];
    if (slot != Marker::None)
      throw MeshError("boundary edge with two markers at cell " + std::to_string(be.cell));
    if (be.marker == Marker::None)
      throw MeshError("boundary edge without marker at cell " + std::to_string(be.cell));
    slot = be.marker;
  }
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c) {
    for (int e = 0; e < 4; ++e) {
      const bool on_boundary = neighbors_[4 * c + e].cell < 0;
      const bool marked = marker_of[4 * c + e] != Marker::None;
      if (on_boundary != marked)
        throw MeshError((on_boundary ? "unmarked boundary edge at cell "
                                     : "marked interior edge at cell ") +
                        std::to_string(c) + " edge " + std::to_string(e));
    }
  }
  check_cells_positive(*this);
}

std::array<Vec2, 4> QuadMesh::cell_vertices(int cell) const {
  const auto& c = cells_[cell];
  return {vertices_[c[0]], vertices_[c[1]], vertices_[c[2]], vertices_[c[3]]};
}

std::array<int, 2> QuadMesh::edge_vertices(int cell, int local_edge) const {
  const auto& c = cells_[cell];
  return {c[kEdgeCorners[local_edge][0]], c[kEdgeCorners[local_edge][1]]};
}

Vec2 QuadMesh::cell_centroid(int cell) const {
  const auto v = cell_vertices(cell);
  return 0.25 * (v[0] + v[1] + v[2] + v[3]);
}

Vec2 QuadMesh::edge_normal(int cell, int local_edge) const {
  const auto [a, b] = edge_vertices(cell, local_edge);
  const Vec2 d = vertices_[b] - vertices_[a];
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

double QuadMesh::edge_length(int cell, int local_edge) const {
  const auto [a, b] = edge_vertices(cell, local_edge);
  return norm(vertices_[b] - vertices_[a]);
}

double QuadMesh::reference_area() const {
  double area = 0.0;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto v = cell_vertices(static_cast<int>(c));
    // Shoelace formula is exact for the bilinear quad.
    for (int k = 0; k < 4; ++k) {
      const Vec2& p = v[k];
      const Vec2& q = v[(k + 1) % 4];
      area += 0.5 * (p.x * q.y - q.x * p.y);
    }
  }
  return area;
}

QuadMesh QuadMesh::with_marker_replaced(Marker from, Marker to) const {
  QuadMesh copy = *this;
  for (auto& be : copy.boundary_edges_)
    if (be.marker == from) be.marker = to;
  return copy;
}

QuadMesh uniform_refine(const QuadMesh& mesh) {
  QuadMesh fine;
  fine.geometry_ = mesh.geometry_;
  fine.level_ = mesh.level_ + 1;
  fine.vertices_.assign(mesh.vertices_.begin(), mesh.vertices_.end());
  fine.vertices_.reserve(4 * mesh.vertices_.size());
  fine.cells_.reserve(4 * mesh.n_cells());
  fine.origins_.reserve(4 * mesh.n_cells());
  fine.patches_.reserve(mesh.n_cells());
  fine.patch_of_cell_.reserve(4 * mesh.n_cells());

  const auto& macros = mesh.geometry_->cells;
  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(2 * mesh.n_cells());

  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    const auto& v = mesh.cells_[c];
    const CellOrigin& o = mesh.origins_[c];
    const MacroCell& macro = macros[o.macro];
    const double xm = 0.5 * (o.xi0 + o.xi1);
    const double em = 0.5 * (o.eta0 + o.eta1);
    // Parameter of each corner and of each edge midpoint.
    const std::array<std::array<double, 2>, 4> edge_mid_param{
        {{xm, o.eta0}, {o.xi1, em}, {xm, o.eta1}, {o.xi0, em}}};

    std::array<int, 4> mid{};
    for (int e = 0; e < 4; ++e) {
      const int a = v[kEdgeCorners[e][0]];
      const int b = v[kEdgeCorners[e][1]];
      const auto key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) {
        mid[e] = it->second;
      } else {
        const int id = static_cast<int>(fine.vertices_.size());
        fine.vertices_.push_back(macro.map(edge_mid_param[e][0], edge_mid_param[e][1]));
        midpoint.emplace(key, id);
        mid[e] = id;
      }
    }
    const int center = static_cast<int>(fine.vertices_.size());
    fine.vertices_.push_back(macro.map(xm, em));

    const int first = static_cast<int>(fine.cells_.size());
    fine.cells_.push_back({v[0], mid[0], center, mid[3]});
    fine.cells_.push_back({mid[0], v[1], mid[1], center});
    fine.cells_.push_back({center, mid[1], v[2], mid[2]});
    fine.cells_.push_back({mid[3], center, mid[2], v[3]});
    fine.origins_.push_back({o.macro, o.xi0, xm, o.eta0, em});
    fine.origins_.push_back({o.macro, xm, o.xi1, o.eta0, em});
    fine.origins_.push_back({o.macro, xm, o.xi1, em, o.eta1});
    fine.origins_.push_back({o.macro, o.xi0, xm, em, o.eta1});

    Patch patch;
    patch.cells = {first, first + 1, first + 2, first + 3};
    patch.nodes = {v[0], mid[0], v[1], mid[3], center, mid[1], v[3], mid[2], v[2]};
    const int p = static_cast<int>(fine.patches_.size());
    fine.patches_.push_back(patch);
    for (int k = 0; k < 4; ++k) fine.patch_of_cell_.push_back(p);
  }

  // Parent edge e is covered by (child, child edge) pairs below.
  constexpr std::array<std::array<std::array<int, 2>, 2>, 4> kSplit{
      {{{{0, 0}, {1, 0}}}, {{{1, 1}, {2, 1}}}, {{{2, 2}, {3, 2}}}, {{{3, 3}, {0, 3}}}}};
  for (const auto& be : mesh.boundary_edges_) {
    for (const auto& [child, ce] : kSplit[be.local_edge])
      fine.boundary_edges_.push_back({4 * be.cell + child, ce, be.marker});
  }
  for (const auto& ie : mesh.interface_edges_) {
    for (const auto& [child, ce] : kSplit[ie.local_edge])
      fine.interface_edges_.push_back({4 * ie.cell + child, ce});
  }
  fine.finalize();
  return fine;
}

QuadMesh generate_half_lens_mesh(int levels) {
  if (levels < 1) throw std::invalid_argument("generate_half_lens_mesh: levels must be >= 1");
  using std::numbers::pi;
  const Vec2 center{0.5, 0.0};
  const double deg = pi / 180.0;
  auto on_circle = [&](double theta) {
    return center + Vec2{std::cos(theta), std::sin(theta)};
  };
  // Outer corners: the chord endpoints (0, +-sqrt(3)/2) at 240 and 120 degrees, and
  // two arc points at -40 and +40 degrees splitting the arc into three equal parts.
  const Vec2 A = on_circle(240.0 * deg);
  const Vec2 B = on_circle(-40.0 * deg);
  const Vec2 C = on_circle(40.0 * deg);
  const Vec2 D = on_circle(120.0 * deg);
  const Vec2 hub{0.55, 0.0};
  auto inner = [&](Vec2 p) { return hub + 0.45 * (p - hub); };
  const Vec2 a = inner(A), b = inner(B), c = inner(C), d = inner(D);

  auto geo = std::make_shared<MacroGeometry>();
  geo->shape = MacroGeometry::Shape::HalfLens;

  geo->cells.push_back(MacroCell::straight(a, b, c, d));

  MacroCell bottom = MacroCell::straight(A, B, b, a);
  bottom.sides[0] = EdgeCurve::arc(center, 1.0, 240.0 * deg, 320.0 * deg);
  bottom.edge_marker[0] = Marker::Wall;
  geo->cells.push_back(bottom);

  MacroCell right = MacroCell::straight(b, B, C, c);
  right.sides[1] = EdgeCurve::arc(center, 1.0, -40.0 * deg, 40.0 * deg);
  right.edge_marker[1] = Marker::Wall;
  geo->cells.push_back(right);

  MacroCell top = MacroCell::straight(d, c, C, D);
  top.sides[2] = EdgeCurve::arc(center, 1.0, 120.0 * deg, 40.0 * deg);
  top.edge_marker[2] = Marker::Wall;
  geo->cells.push_back(top);

  MacroCell left = MacroCell::straight(A, a, d, D);
  left.edge_marker[3] = Marker::Io;
  geo->cells.push_back(left);

  QuadMesh mesh = QuadMesh::from_macro(geo);
  for (int l = 0; l < levels; ++l) mesh = uniform_refine(mesh);
  return mesh;
}

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
  return out;
}

}  // namespace

namespace {

// Circular arc from a to b bulging by `sagitta` towards `outward`.
EdgeCurve bulged_arc(Vec2 a, Vec2 b, Vec2 outward, double sagitta) {
  const double chord = norm(b - a);
  const double r = (0.25 * chord * chord + sagitta * sagitta) / (2.0 * sagitta);
  const Vec2 center = 0.5 * (a + b) - (r - sagitta) * outward;
  const double ta = std::atan2(a.y - center.y, a.x - center.x);
  double tb = std::atan2(b.y - center.y, b.x - center.x);
  while (tb - ta > std::numbers::pi) tb -= 2.0 * std::numbers::pi;
  while (tb - ta < -std::numbers::pi) tb += 2.0 * std::numbers::pi;
  EdgeCurve c = EdgeCurve::arc(center, r, ta, tb);
  c.from = a;
  c.to = b;
  return c;
}

}  // namespace

MacroGeometry alveolar_sac_macro_geometry(const SacGeometrySpec& s) {
  if (s.n_alveoli != 5 || s.n_blood_channels != 6)
    throw MeshError("sac generator supports 5 alveoli with 6 blood channels only");
  if (!(s.duct_length > 0.0)) throw MeshError("duct_length must be positive");
  if (!(s.duct_cell_length > 0.0)) throw MeshError("duct_cell_length must be positive");
  if (!(s.channel_width > 0.0 && s.channel_length > 0.0 && s.alveolus_width > 0.0 &&
        s.alveolus_depth > 0.0 && s.trunk_length > 0.0 && s.trunk_height > 0.0))
    throw MeshError("sac dimensions must be positive");
  if (!(s.wall_bulge >= 0.0 && s.wall_bulge < 0.5 * s.alveolus_depth))
    throw MeshError("wall_bulge must lie in [0, alveolus_depth / 2)");
  if (s.channel_width >= 0.5 * s.alveolus_width)
    throw MeshError("blood channels do not fit on the alveoli (channel_width too large)");
  if (s.alveolus_width > s.trunk_height)
    throw MeshError("end alveolus is wider than the trunk");
  for (const auto& row : {s.top_alveoli_x, s.bottom_alveoli_x}) {
    if (row[0] < 0.0 || row[0] + s.alveolus_width > row[1] + 1e-12 ||
        row[1] + s.alveolus_width > s.trunk_length + 1e-12)
      throw MeshError("side alveoli overlap or leave the trunk");
  }

  const double l = s.duct_length;
  const double half = 0.5 * s.trunk_height;
  const double W = s.alveolus_width;
  const double Ad = s.alveolus_depth;
  const double wc = s.channel_width;
  const double lc = s.channel_length;
  const double x_end = s.trunk_length;
  const double x_apex = x_end + Ad;
  const std::array<double, 2> end_channel_y{-0.25 * W, 0.25 * W};

  std::vector<double> xs{0.0, x_end, x_apex, x_apex + lc};
  const int n_duct = std::max(1, static_cast<int>(std::lround(l / s.duct_cell_length)));
  for (int i = 0; i < n_duct; ++i) xs.push_back(-l + l * i / n_duct);
  for (const auto& row : {s.top_alveoli_x, s.bottom_alveoli_x}) {
    for (double x0 : row) {
      xs.insert(xs.end(), {x0, x0 + W, x0 + 0.5 * W - 0.5 * wc, x0 + 0.5 * W + 0.5 * wc});
    }
  }
  std::vector<double> ys{-half, half, -half - Ad, half + Ad, -half - Ad - lc, half + Ad + lc,
                         -0.5 * W, 0.5 * W};
  for (double yc : end_channel_y) ys.insert(ys.end(), {yc - 0.5 * wc, yc + 0.5 * wc});
  xs = sorted_unique(xs);
  ys = sorted_unique(ys);
  xs.front() = -l;

  enum class Region { Outside, Duct, Sac, TopChannel, BottomChannel, EndChannel };
  auto region = [&](double x, double y) {
    if (x < 0.0) return (x > -l && std::abs(y) < half) ? Region::Duct : Region::Outside;
    if (x < x_end && std::abs(y) < half) return Region::Sac;
    for (double x0 : s.top_alveoli_x) {
      if (x > x0 && x < x0 + W && y > half && y < half + Ad) return Region::Sac;
      const double xm = x0 + 0.5 * W;
      if (std::abs(x - xm) < 0.5 * wc && y > half + Ad && y < half + Ad + lc)
        return Region::TopChannel;
    }
    for (double x0 : s.bottom_alveoli_x) {
      if (x > x0 && x < x0 + W && y < -half && y > -half - Ad) return Region::Sac;
      const double xm = x0 + 0.5 * W;
      if (std::abs(x - xm) < 0.5 * wc && y < -half - Ad && y > -half - Ad - lc)
        return Region::BottomChannel;
    }
    if (x > x_end && x < x_apex && std::abs(y) < 0.5 * W) return Region::Sac;
    for (double yc : end_channel_y) {
      if (x > x_apex && x < x_apex + lc && std::abs(y - yc) < 0.5 * wc) return Region::EndChannel;
    }
    return Region::Outside;
  };

  MacroGeometry geo;
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  auto region_of = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return Region::Outside;
    return region(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
  };
  int channel_ends = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Region r = region_of(i, j);
      if (r == Region::Outside) continue;
      MacroCell cell = MacroCell::straight({xs[i], ys[j]}, {xs[i + 1], ys[j]},
                                           {xs[i + 1], ys[j + 1]}, {xs[i], ys[j + 1]});
      // Neighbour lattice cells across local edges 0 (below), 1 (right), 2 (above), 3 (left).
      const std::array<Region, 4> nb{region_of(i, j - 1), region_of(i + 1, j),
                                     region_of(i, j + 1), region_of(i - 1, j)};
      for (int e = 0; e < 4; ++e) {
        if (nb[e] != Region::Outside) {
          if (e == 3 && r != Region::Duct && nb[e] == Region::Duct) cell.interface_edge[e] = true;
          continue;
        }
        Marker m = Marker::Wall;
        if (e == 3 && r == Region::Duct && i == 0) m = Marker::Io;
        if ((e == 2 && r == Region::TopChannel) || (e == 0 && r == Region::BottomChannel) ||
            (e == 1 && r == Region::EndChannel))
          m = Marker::Blood;
        cell.edge_marker[e] = m;
        // Full-depth alveolus walls are rounded outwards.
        const Vec2 a = cell.corners[e], b = cell.corners[(e + 1) % 4];
        const bool outside_trunk = ys[j] >= half || ys[j + 1] <= -half || xs[i] >= x_end;
        if (m == Marker::Wall && r == Region::Sac && outside_trunk && s.wall_bulge > 0.0 &&
            std::abs(norm(b - a) - Ad) < 1e-12) {
          const Vec2 d = b - a;
          const Vec2 out = Vec2{d.y, -d.x} * (1.0 / norm(d));
          // sides run p0->p1, p1->p2, p3->p2, p0->p3
          cell.sides[e] = e < 2 ? bulged_arc(a, b, out, s.wall_bulge)
                                : bulged_arc(b, a, out, s.wall_bulge);
        }
      }
      geo.cells.push_back(cell);
    }
  }
  // Each channel end is one lattice cell wide.
  for (const auto& c : geo.cells)
    for (Marker m : c.edge_marker)
      if (m == Marker::Blood) ++channel_ends;
  if (channel_ends != s.n_blood_channels)
    throw MeshError("blood channels not placeable: found " + std::to_string(channel_ends) +
                    " channel ends");
  return geo;
}

QuadMesh generate_alveolar_sac_mesh(const SacGeometrySpec& spec, int level) {
  if (level < 0) throw std::invalid_argument("generate_alveolar_sac_mesh: level must be >= 0");
  auto geo = std::make_shared<MacroGeometry>(alveolar_sac_macro_geometry(spec));
  QuadMesh mesh = QuadMesh::from_macro(geo);
  for (int l = 0; l <= level; ++l) mesh = uniform_refine(mesh);
  return mesh;
}

std::vector<InteriorEdge> interior_patch_edges(const QuadMesh& mesh) {
  if (!mesh.has_patches()) throw MeshError("interior_patch_edges: mesh has no patch hierarchy");
  std::vector<InteriorEdge> edges;
  edges.reserve(mesh.patches().size() * 4);
  for (const Patch& patch : mesh.patches()) {
    for (int k = 0; k < 4; ++k) {
      const int c = patch.cells[k];
      for (int e = 0; e < 4; ++e) {
        const CellEdge nb = mesh.neighbor(c, e);
        // Keep each sibling pair once, seen from the lower cell index.
        if (nb.cell > c && mesh.patch_of_cell(nb.cell) == mesh.patch_of_cell(c))
          edges.push_back({{c, e}, nb});
      }
    }
  }
  return edges;
}

CellMetrics cell_metrics(const QuadMesh& mesh, int cell) {
  const auto v = mesh.cell_vertices(cell);
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const Vec2& p : v) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  CellMetrics m{xmax - xmin, ymax - ymin, true};
  const double tol = 1e-12 * std::max(m.h1_hat, m.h2_hat);
  for (int e = 0; e < 4; ++e) {
    const Vec2 d = v[(e + 1) % 4] - v[e];
    const bool axis = (e % 2 == 0) ? std::abs(d.y) <= tol : std::abs(d.x) <= tol;
    if (!axis) m.rectangular = false;
  }
  return m;
}

double normal_extent(const QuadMesh& mesh, int cell, int local_edge) {
  const Vec2 n = mesh.edge_normal(cell, local_edge);
  const auto v = mesh.cell_vertices(cell);
  double lo = dot(n, v[0]), hi = lo;
  for (const Vec2& p : v) {
    lo = std::min(lo, dot(n, p));
    hi = std::max(hi, dot(n, p));
  }
  return hi - lo;
}

void check_cells_positive(const QuadMesh& mesh) {
  const auto& rule = cell_rule();
  for (int c = 0; c < static_cast<int>(mesh.n_cells()); ++c) {
    const auto v = mesh.cell_vertices(c);
    for (const Vec2& q : rule.points) {
      if (!(bilinear_jacobian(v, q).det() > 0.0))
        throw MeshError("degenerate cell " + std::to_string(c) +
                        " (non-positive Jacobian near vertex " +
                        std::to_string(mesh.cells()[c][0]) + ")");
    }
  }
}

void write_vtk_mesh(std::ostream& os, const QuadMesh& mesh) {
  os << "# vtk DataFile Version 3.0\nsacflow mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_vertices() << " double\n";
  os.precision(17);
  for (const Vec2& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
  const std::size_t nq = mesh.n_cells();
  const std::size_t nb = mesh.boundary_edges().size();
  os << "CELLS " << nq + nb << ' ' << 5 * nq + 3 * nb << '\n';
  for (const auto& c : mesh.cells()) os << "4 " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  for (const auto& be : mesh.boundary_edges()) {
    const auto [a, b] = mesh.edge_vertices(be.cell, be.local_edge);
    os << "2 " << a << ' ' << b << '\n';
  }
  os << "CELL_TYPES " << nq + nb << '\n';
  for (std::size_t i = 0; i < nq; ++i) os << "9\n";
  for (std::size_t i = 0; i < nb; ++i) os << "3\n";
  os << "CELL_DATA " << nq + nb << "\nSCALARS marker int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < nq; ++i) os << "0\n";
  for (const auto& be : mesh.boundary_edges()) os << static_cast<int>(be.marker) << '\n';
}

}  // namespace sacflow
