#pragma once

// Matched triangulations of a free-flow region (conduit) and a dual-porosity
// region sharing an interface. Both constructors produce a conforming mesh on
// a tensor grid whose lines contain every geometric breakpoint, so subdomain
// boundaries and the interface are resolved exactly.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dpns {

using Point = Eigen::Vector2d;

enum class Subdomain : std::uint8_t { Conduit = 0, Dual = 1 };

enum class BoundaryLabel : std::uint8_t {
  Interior,        // both sides in the same subdomain
  Interface,       // conduit on one side, dual-porosity on the other
  ConduitWall,     // exterior conduit boundary carrying Dirichlet velocity
  ConduitInflow,   // exterior conduit boundary with prescribed inflow
  ConduitOutflow,  // do-nothing outflow
  DualExterior,    // exterior dual-porosity boundary (segment id names the piece)
  SharedWall,      // conduit/dual contact that is not part of the interface:
                   // a wall for the conduit and an exterior piece for the dual side
};

std::string to_string(BoundaryLabel label);

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triangle {
  std::array<int, 3> vertices{};  // counter-clockwise
  std::array<int, 3> edges{};     // edges[i] is opposite vertices[i]
  Subdomain subdomain = Subdomain::Conduit;
};

struct Edge {
  std::array<int, 2> vertices{};           // vertices[0] < vertices[1]
  std::array<int, 2> triangles{-1, -1};    // owning triangles, second may be -1
  BoundaryLabel label = BoundaryLabel::Interior;
  int segment = 0;
  Point normal = Point::Zero();  // unit, tangent (v1 - v0) rotated clockwise
  double length = 0.0;
};

struct InterfaceEdge {
  int edge = -1;
  int conduit_triangle = -1;
  int dual_triangle = -1;
  Point normal_d = Point::Zero();   // from the dual side into the conduit
  Point tangent = Point::Zero();    // normal_d rotated clockwise
};

// Barycentric location of a point inside a triangle.
struct Location {
  int element = -1;
  std::array<double, 3> bary{};
};

inline constexpr double kBaryTolerance = 1e-12;

class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<InterfaceEdge>& interface_edges() const { return interface_edges_; }

  const Point& vertex(int v) const { return vertices_[v]; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const Edge& edge(int e) const { return edges_[e]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  double area(int t) const;
  double diameter(int t) const;
  Point centroid(int t) const;
  double h_global() const { return h_global_; }
  double subdomain_area(Subdomain s) const;

  // Neighbor of t across its local edge i inside the same subdomain, or -1.
  int neighbor(int t, int i) const;
  std::span<const int> triangles_at_vertex(int v) const;
  std::span<const int> triangles_in(Subdomain s) const {
    return s == Subdomain::Conduit ? conduit_triangles_ : dual_triangles_;
  }

  std::array<double, 3> barycentric(int t, const Point& x) const;
  Point to_physical(int t, const std::array<double, 3>& bary) const;

  // Walks through same-subdomain edge adjacency from the hint, falls back to a
  // brute-force scan. Points on shared edges or vertices resolve to the lowest
  // containing element id.
  std::optional<Location> locate_point(Subdomain s, const Point& x,
                                       std::optional<int> hint = std::nullopt) const;
  std::optional<Location> locate_point_scan(Subdomain s, const Point& x) const;

  // Assigns a label and segment to every non-interior edge and rebuilds the
  // interface list. The callback receives the edge midpoint and the subdomains
  // on each side (second is nullopt on the exterior boundary).
  template <class Labeler>
  void label_edges(Labeler&& labeler);

  void write_vtk(const std::string& path) const;

 private:
  void build_edges();
  void build_interface_list();
  Location tie_break(Subdomain s, const Point& x, Location loc) const;

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<InterfaceEdge> interface_edges_;
  std::vector<int> vertex_tri_offsets_;
  std::vector<int> vertex_tris_;
  std::vector<int> conduit_triangles_;
  std::vector<int> dual_triangles_;
  std::vector<std::array<int, 3>> neighbors_;
  double h_global_ = 0.0;
};

struct EdgeSides {
  Subdomain first;
  std::optional<Subdomain> second;
};

struct EdgeTag {
  BoundaryLabel label;
  int segment = 0;
};

template <class Labeler>
void Mesh::label_edges(Labeler&& labeler) {
  for (auto& e : edges_) {
    const auto& t0 = triangles_[e.triangles[0]];
    std::optional<Subdomain> other;
    if (e.triangles[1] >= 0) other = triangles_[e.triangles[1]].subdomain;
    if (other && *other == t0.subdomain) {
      e.label = BoundaryLabel::Interior;
      e.segment = 0;
      continue;
    }
    const Point mid = 0.5 * (vertices_[e.vertices[0]] + vertices_[e.vertices[1]]);
    const EdgeTag tag = labeler(mid, EdgeSides{t0.subdomain, other});
    if (tag.label == BoundaryLabel::Interior)
      throw MeshError("labeler returned Interior for a boundary edge");
    if (!other && (tag.label == BoundaryLabel::Interface || tag.label == BoundaryLabel::SharedWall))
      throw MeshError("exterior edge labeled as interface or shared wall");
    if (other && tag.label != BoundaryLabel::Interface && tag.label != BoundaryLabel::SharedWall)
      throw MeshError("conduit/dual contact edge must be Interface or SharedWall");
    e.label = tag.label;
    e.segment = tag.segment;
  }
  build_interface_list();
}

// Stacked unit squares: conduit [x0,x1]x[y_mid,y1] on top of the dual-porosity
// block [x0,x1]x[y0,y_mid]. Interface at y = y_mid.
struct Example1Geometry {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y_mid = 1.0, y1 = 2.0;
};

// Injection well, horizontal open hole and production well embedded in a
// dual-porosity block. Defaults are the wellbore coordinates.
struct Example2Geometry {
  double width = 6.0;          // dual block spans [0,width] x [0,block_top]
  double block_top = 3.0;
  double well_top = 7.0;       // both vertical wells end here
  double well_width = 0.25;    // injection well [0,well_width], production well [width-well_width,width]
  double hole_x0 = 2.0;        // horizontal hole spans [hole_x0,width] x [hole_y0,hole_y1]
  double hole_y0 = 1.38;
  double hole_y1 = 1.63;
};

// n subdivisions per unit length, right-diagonal split of every square cell.
Mesh build_structured_rect_mesh(int n, const Example1Geometry& geometry = {});

// Quasi-uniform tensor mesh with target spacing h_target. Exterior dual
// segments are numbered 1..5 (bottom, right, production-well wall,
// top, left); the production-well wall is a SharedWall edge set.
Mesh build_wellbore_mesh(double h_target, const Example2Geometry& geometry = {});

}  // namespace dpns
