#include "dpns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/os.h>

namespace dpns {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

std::string to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::Interior: return "interior";
    case BoundaryLabel::Interface: return "interface";
    case BoundaryLabel::ConduitWall: return "conduit-wall";
    case BoundaryLabel::ConduitInflow: return "conduit-inflow";
    case BoundaryLabel::ConduitOutflow: return "conduit-outflow";
    case BoundaryLabel::DualExterior: return "dual-exterior";
    case BoundaryLabel::SharedWall: return "shared-wall";
  }
  return "unknown";
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (int t = 0; t < num_triangles(); ++t) {
    for (int v : triangles_[t].vertices)
      if (v < 0 || v >= num_vertices()) throw MeshError("triangle references missing vertex");
    if (area(t) <= 0.0) throw MeshError(fmt::format("triangle {} has non-positive area", t));
    (triangles_[t].subdomain == Subdomain::Conduit ? conduit_triangles_ : dual_triangles_)
        .push_back(t);
  }

  std::vector<int> count(num_vertices() + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri.vertices) ++count[v + 1];
  for (int v = 0; v < num_vertices(); ++v) count[v + 1] += count[v];
  vertex_tri_offsets_ = count;
  vertex_tris_.resize(count.back());
  for (int t = 0; t < num_triangles(); ++t)
    for (int v : triangles_[t].vertices) vertex_tris_[count[v]++] = t;

  build_edges();
  build_interface_list();

  for (int t = 0; t < num_triangles(); ++t) h_global_ = std::max(h_global_, diameter(t));
}

void Mesh::build_edges() {
  std::unordered_map<long long, int> lookup;
  lookup.reserve(3 * triangles_.size());
  const long long nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    auto& tri = triangles_[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri.vertices[(i + 1) % 3];
      int b = tri.vertices[(i + 2) % 3];
      if (a > b) std::swap(a, b);
      const long long key = a * nv + b;
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(edges_.size()));
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.triangles = {t, -1};
        const Point tvec = vertices_[b] - vertices_[a];
        e.length = tvec.norm();
        e.normal = Point(tvec.y(), -tvec.x()) / e.length;
        edges_.push_back(e);
      } else {
        auto& e = edges_[it->second];
        if (e.triangles[1] >= 0) throw MeshError("edge shared by more than two triangles");
        e.triangles[1] = t;
      }
      tri.edges[i] = it->second;
    }
  }

  neighbors_.assign(num_triangles(), {-1, -1, -1});
  for (int t = 0; t < num_triangles(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const auto& e = edges_[triangles_[t].edges[i]];
      const int other = e.triangles[0] == t ? e.triangles[1] : e.triangles[0];
      if (other >= 0 && triangles_[other].subdomain == triangles_[t].subdomain)
        neighbors_[t][i] = other;
    }
  }

  // Default labels: contacts between subdomains become interface edges, all
  // other boundary edges are walls or dual exterior.
  for (auto& e : edges_) {
    const auto s0 = triangles_[e.triangles[0]].subdomain;
    if (e.triangles[1] >= 0) {
      const auto s1 = triangles_[e.triangles[1]].subdomain;
      e.label = s0 == s1 ? BoundaryLabel::Interior : BoundaryLabel::Interface;
    } else {
      e.label = s0 == Subdomain::Conduit ? BoundaryLabel::ConduitWall : BoundaryLabel::DualExterior;
    }
  }
}

void Mesh::build_interface_list() {
  interface_edges_.clear();
  for (int ei = 0; ei < num_edges(); ++ei) {
    const auto& e = edges_[ei];
    if (e.label != BoundaryLabel::Interface) continue;
    InterfaceEdge ie;
    ie.edge = ei;
    for (int t : e.triangles) {
      if (t < 0) continue;
      (triangles_[t].subdomain == Subdomain::Conduit ? ie.conduit_triangle : ie.dual_triangle) = t;
    }
    if (ie.conduit_triangle < 0 || ie.dual_triangle < 0)
      throw MeshError("interface edge without a conduit and a dual triangle");
    const Point mid = 0.5 * (vertices_[e.vertices[0]] + vertices_[e.vertices[1]]);
    ie.normal_d = e.normal;
    if ((centroid(ie.conduit_triangle) - mid).dot(ie.normal_d) < 0.0) ie.normal_d = -ie.normal_d;
    ie.tangent = Point(ie.normal_d.y(), -ie.normal_d.x());
    interface_edges_.push_back(ie);
  }
}

double Mesh::area(int t) const {
  const auto& v = triangles_[t].vertices;
  return 0.5 * cross(vertices_[v[1]] - vertices_[v[0]], vertices_[v[2]] - vertices_[v[0]]);
}

double Mesh::diameter(int t) const {
  const auto& v = triangles_[t].vertices;
  return std::max({(vertices_[v[0]] - vertices_[v[1]]).norm(),
                   (vertices_[v[1]] - vertices_[v[2]]).norm(),
                   (vertices_[v[2]] - vertices_[v[0]]).norm()});
}

Point Mesh::centroid(int t) const {
  const auto& v = triangles_[t].vertices;
  return (vertices_[v[0]] + vertices_[v[1]] + vertices_[v[2]]) / 3.0;
}

double Mesh::subdomain_area(Subdomain s) const {
  double a = 0.0;
  for (int t : triangles_in(s)) a += area(t);
  return a;
}

int Mesh::neighbor(int t, int i) const { return neighbors_[t][i]; }

std::span<const int> Mesh::triangles_at_vertex(int v) const {
  return {vertex_tris_.data() + vertex_tri_offsets_[v],
          static_cast<std::size_t>(vertex_tri_offsets_[v + 1] - vertex_tri_offsets_[v])};
}

std::array<double, 3> Mesh::barycentric(int t, const Point& x) const {
  const auto& v = triangles_[t].vertices;
  const Point& p0 = vertices_[v[0]];
  const Point e1 = vertices_[v[1]] - p0;
  const Point e2 = vertices_[v[2]] - p0;
  const Point d = x - p0;
  const double det = cross(e1, e2);
  const double l1 = cross(d, e2) / det;
  const double l2 = cross(e1, d) / det;
  return {1.0 - l1 - l2, l1, l2};
}

Point Mesh::to_physical(int t, const std::array<double, 3>& b) const {
  const auto& v = triangles_[t].vertices;
  return b[0] * vertices_[v[0]] + b[1] * vertices_[v[1]] + b[2] * vertices_[v[2]];
}

Location Mesh::tie_break(Subdomain s, const Point& x, Location loc) const {
  if (*std::min_element(loc.bary.begin(), loc.bary.end()) > kBaryTolerance) return loc;
  for (int v : triangles_[loc.element].vertices) {
    for (int t : triangles_at_vertex(v)) {
      if (t >= loc.element || triangles_[t].subdomain != s) continue;
      const auto b = barycentric(t, x);
      if (*std::min_element(b.begin(), b.end()) >= -kBaryTolerance) loc = {t, b};
    }
  }
  return loc;
}

std::optional<Location> Mesh::locate_point(Subdomain s, const Point& x,
                                           std::optional<int> hint) const {
  const auto candidates = triangles_in(s);
  if (candidates.empty()) return std::nullopt;
  int cur = candidates.front();
  if (hint && *hint >= 0 && *hint < num_triangles() && triangles_[*hint].subdomain == s)
    cur = *hint;

  int prev = -1;
  const int max_steps = static_cast<int>(candidates.size()) + 16;
  for (int step = 0; step < max_steps; ++step) {
    const auto b = barycentric(cur, x);
    if (*std::min_element(b.begin(), b.end()) >= -kBaryTolerance)
      return tie_break(s, x, Location{cur, b});
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return b[i] < b[j]; });
    int next = -1;
    for (int i : order) {
      if (b[i] >= -kBaryTolerance) break;
      const int nb = neighbors_[cur][i];
      if (nb >= 0 && nb != prev) {
        next = nb;
        break;
      }
    }
    if (next < 0) break;
    prev = cur;
    cur = next;
  }
  return locate_point_scan(s, x);
}

std::optional<Location> Mesh::locate_point_scan(Subdomain s, const Point& x) const {
  for (int t : triangles_in(s)) {
    const auto b = barycentric(t, x);
    if (*std::min_element(b.begin(), b.end()) >= -kBaryTolerance) return Location{t, b};
  }
  return std::nullopt;
}

void Mesh::write_vtk(const std::string& path) const {
  auto out = fmt::output_file(path);
  out.print("# vtk DataFile Version 2.0\ndpns mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  out.print("POINTS {} double\n", num_vertices());
  for (const auto& p : vertices_) out.print("{:.17g} {:.17g} 0\n", p.x(), p.y());
  out.print("CELLS {} {}\n", num_triangles(), 4 * num_triangles());
  for (const auto& t : triangles_)
    out.print("3 {} {} {}\n", t.vertices[0], t.vertices[1], t.vertices[2]);
  out.print("CELL_TYPES {}\n", num_triangles());
  for (int t = 0; t < num_triangles(); ++t) out.print("5\n");
  out.print("CELL_DATA {}\nSCALARS subdomain int 1\nLOOKUP_TABLE default\n", num_triangles());
  for (const auto& t : triangles_) out.print("{}\n", static_cast<int>(t.subdomain));
}

namespace {

// Tensor grid through the given breakpoints; every interval is split into
// `subdivide(length)` equal pieces. Cells are split along the diagonal from
// their lower-left to upper-right corner.
Mesh build_tensor_mesh(const std::vector<double>& xb, const std::vector<double>& yb,
                       const std::function<int(double)>& subdivide,
                       const std::function<std::optional<Subdomain>(const Point&)>& classify) {
  auto expand = [&](const std::vector<double>& breaks) {
    std::vector<double> c{breaks.front()};
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double a = breaks[i], b = breaks[i + 1];
      const int n = subdivide(b - a);
      for (int k = 1; k < n; ++k) c.push_back(a + (b - a) * k / n);
      c.push_back(b);
    }
    return c;
  };
  const auto xs = expand(xb);
  const auto ys = expand(yb);
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;

  std::vector<int> grid_to_vertex((nx + 1) * (ny + 1), -1);
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  auto vid = [&](int i, int j) {
    int& slot = grid_to_vertex[j * (nx + 1) + i];
    if (slot < 0) {
      slot = static_cast<int>(vertices.size());
      vertices.emplace_back(xs[i], ys[j]);
    }
    return slot;
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point center(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
      const auto sub = classify(center);
      if (!sub) continue;
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      Triangle lower;
      lower.vertices = {v00, v10, v11};
      lower.subdomain = *sub;
      Triangle upper;
      upper.vertices = {v00, v11, v01};
      upper.subdomain = *sub;
      triangles.push_back(lower);
      triangles.push_back(upper);
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

Mesh build_structured_rect_mesh(int n, const Example1Geometry& g) {
  if (n < 2) throw MeshError("build_structured_rect_mesh: need n >= 2");
  if (!(g.x0 < g.x1 && g.y0 < g.y_mid && g.y_mid < g.y1))
    throw MeshError("build_structured_rect_mesh: degenerate geometry");
  auto subdivide = [n](double len) { return std::max(1, static_cast<int>(std::lround(len * n))); };
  auto classify = [&](const Point& c) -> std::optional<Subdomain> {
    return c.y() > g.y_mid ? Subdomain::Conduit : Subdomain::Dual;
  };
  Mesh mesh = build_tensor_mesh({g.x0, g.x1}, {g.y0, g.y_mid, g.y1}, subdivide, classify);
  mesh.label_edges([](const Point&, const EdgeSides& sides) -> EdgeTag {
    if (sides.second) return {BoundaryLabel::Interface, 0};
    return {sides.first == Subdomain::Conduit ? BoundaryLabel::ConduitWall
                                              : BoundaryLabel::DualExterior,
            0};
  });
  return mesh;
}

Mesh build_wellbore_mesh(double h_target, const Example2Geometry& g) {
  if (!(h_target > 0.0)) throw MeshError("build_wellbore_mesh: h_target must be positive");
  const double right_well_x0 = g.width - g.well_width;
  if (!(0.0 < g.well_width && g.well_width < g.hole_x0 && g.hole_x0 < right_well_x0 &&
        0.0 < g.hole_y0 && g.hole_y0 < g.hole_y1 && g.hole_y1 < g.block_top &&
        g.block_top < g.well_top))
    throw MeshError("build_wellbore_mesh: overlapping or degenerate wellbore segments");

  auto subdivide = [h_target](double len) {
    return std::max(1, static_cast<int>(std::ceil(len / h_target - 1e-9)));
  };
  auto is_conduit = [&](const Point& c) {
    return (c.x() < g.well_width && c.y() > g.block_top) ||
           (c.x() > right_well_x0 && c.y() > g.hole_y1) ||
           (c.x() > g.hole_x0 && c.y() > g.hole_y0 && c.y() < g.hole_y1);
  };
  auto classify = [&](const Point& c) -> std::optional<Subdomain> {
    if (is_conduit(c)) return Subdomain::Conduit;
    if (c.y() < g.block_top) return Subdomain::Dual;
    return std::nullopt;
  };
  Mesh mesh = build_tensor_mesh({0.0, g.well_width, g.hole_x0, right_well_x0, g.width},
                                {0.0, g.hole_y0, g.hole_y1, g.block_top, g.well_top},
                                subdivide, classify);

  mesh.label_edges([&](const Point& m, const EdgeSides& sides) -> EdgeTag {
    if (sides.second) {
      const bool on_interface =
          (near(m.y(), g.block_top) && m.x() < g.well_width) || near(m.y(), g.hole_y0) ||
          near(m.x(), g.hole_x0) || (near(m.y(), g.hole_y1) && m.x() < right_well_x0);
      if (on_interface) return {BoundaryLabel::Interface, 0};
      if (near(m.x(), right_well_x0)) return {BoundaryLabel::SharedWall, 3};
      throw MeshError("unexpected conduit/dual contact edge");
    }
    if (sides.first == Subdomain::Conduit) {
      if (near(m.y(), g.well_top))
        return {m.x() < g.well_width ? BoundaryLabel::ConduitInflow : BoundaryLabel::ConduitOutflow, 0};
      return {BoundaryLabel::ConduitWall, 0};
    }
    if (near(m.y(), 0.0)) return {BoundaryLabel::DualExterior, 1};
    if (near(m.x(), g.width)) return {BoundaryLabel::DualExterior, 2};
    if (near(m.x(), right_well_x0)) return {BoundaryLabel::DualExterior, 3};
    if (near(m.y(), g.block_top)) return {BoundaryLabel::DualExterior, 4};
    if (near(m.x(), 0.0)) return {BoundaryLabel::DualExterior, 5};
    throw MeshError("dual exterior edge outside the declared segments");
  });
  return mesh;
}

}  // namespace dpns
