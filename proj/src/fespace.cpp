#include "dpns/fespace.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include "dpns/quadrature.hpp"

namespace dpns {

std::string_view to_string(SpaceId id) {
  switch (id) {
    case SpaceId::ConduitVelocity: return "u_c";
    case SpaceId::ConduitPressure: return "p_c";
    case SpaceId::FractureVelocity: return "u_f";
    case SpaceId::FracturePressure: return "phi_f";
    case SpaceId::MatrixVelocity: return "u_m";
    case SpaceId::MatrixPressure: return "phi_m";
  }
  return "?";
}

Subdomain subdomain_of(SpaceId id) {
  return (id == SpaceId::ConduitVelocity || id == SpaceId::ConduitPressure) ? Subdomain::Conduit
                                                                            : Subdomain::Dual;
}

bool is_vector_space(SpaceId id) {
  return id == SpaceId::ConduitVelocity || id == SpaceId::FractureVelocity ||
         id == SpaceId::MatrixVelocity;
}

int DofMaps::count(SpaceId id) const {
  switch (id) {
    case SpaceId::ConduitVelocity: return 2 * mini_scalar_count();
    case SpaceId::ConduitPressure: return n_conduit_vertices;
    case SpaceId::FractureVelocity:
    case SpaceId::MatrixVelocity: return 2 * n_dual_edges;
    case SpaceId::FracturePressure:
    case SpaceId::MatrixPressure: return n_dual_elements;
  }
  return 0;
}

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

std::array<double, 6> monomials(const Point& xi) {
  return {1.0, xi.x(), xi.y(), 1.0, xi.x(), xi.y()};
}

}  // namespace

FeSpaces::FeSpaces(const Mesh& mesh) : mesh_(&mesh) {
  const int nt = mesh.num_triangles();
  dofs_.conduit_vertex.assign(mesh.num_vertices(), -1);
  dofs_.conduit_element.assign(nt, -1);
  dofs_.dual_edge.assign(mesh.num_edges(), -1);
  dofs_.dual_element.assign(nt, -1);
  dofs_.bdm_sign.assign(nt, {0, 0, 0});

  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    dofs_.conduit_element[t] = dofs_.n_conduit_elements++;
    for (int v : mesh.triangle(t).vertices)
      if (dofs_.conduit_vertex[v] < 0) dofs_.conduit_vertex[v] = dofs_.n_conduit_vertices++;
  }
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    dofs_.dual_element[t] = dofs_.n_dual_elements++;
    for (int e : mesh.triangle(t).edges)
      if (dofs_.dual_edge[e] < 0) dofs_.dual_edge[e] = dofs_.n_dual_edges++;
  }

  grad_lambda_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& v = mesh.triangle(t).vertices;
    const Point& p0 = mesh.vertex(v[0]);
    const Point e1 = mesh.vertex(v[1]) - p0;
    const Point e2 = mesh.vertex(v[2]) - p0;
    const double det = cross(e1, e2);
    const Point g1(e2.y() / det, -e2.x() / det);
    const Point g2(-e1.y() / det, e1.x() / det);
    grad_lambda_[t] = {-g1 - g2, g1, g2};
  }

  const auto& line = make_line_quadrature(3);
  bdm_local_.resize(nt);
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    auto& loc = bdm_local_[t];
    loc.center = mesh.centroid(t);
    loc.scale = mesh.diameter(t);
    Eigen::Matrix<double, 6, 6> F = Eigen::Matrix<double, 6, 6>::Zero();
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const auto& e = mesh.edge(tri.edges[i]);
      const Point& a = mesh.vertex(e.vertices[0]);
      const Point& b = mesh.vertex(e.vertices[1]);
      // Outward normal of local edge i points away from vertex i.
      const Point mid = 0.5 * (a + b);
      const double orient = (mid - mesh.vertex(tri.vertices[i])).dot(e.normal);
      dofs_.bdm_sign[t][i] = orient > 0.0 ? 1 : -1;
      for (std::size_t q = 0; q < line.size(); ++q) {
        const double s = line.points[q];
        const Point x = a + s * (b - a);
        const auto m = monomials((x - loc.center) / loc.scale);
        const double shat = 2.0 * s - 1.0;
        for (int k = 0; k < 6; ++k) {
          const double vn = k < 3 ? m[k] * e.normal.x() : m[k] * e.normal.y();
          F(2 * i, k) += line.weights[q] * vn;
          F(2 * i + 1, k) += line.weights[q] * vn * shat;
        }
      }
    }
    loc.coeff = F.inverse();
  }
}

void FeSpaces::check_subdomain(int tri, Subdomain s) const {
  if (tri < 0 || tri >= mesh_->num_triangles())
    throw FeError(fmt::format("triangle {} out of range", tri));
  if (mesh_->triangle(tri).subdomain != s)
    throw FeError(fmt::format("triangle {} is not in the requested subdomain", tri));
}

std::array<int, 4> FeSpaces::mini_scalar_dofs(int tri) const {
  const auto& v = mesh_->triangle(tri).vertices;
  return {dofs_.conduit_vertex[v[0]], dofs_.conduit_vertex[v[1]], dofs_.conduit_vertex[v[2]],
          dofs_.n_conduit_vertices + dofs_.conduit_element[tri]};
}

std::array<int, 3> FeSpaces::p1_dofs(int tri) const {
  const auto& v = mesh_->triangle(tri).vertices;
  return {dofs_.conduit_vertex[v[0]], dofs_.conduit_vertex[v[1]], dofs_.conduit_vertex[v[2]]};
}

std::array<int, 6> FeSpaces::bdm_dofs(int tri) const {
  const auto& e = mesh_->triangle(tri).edges;
  std::array<int, 6> d{};
  for (int i = 0; i < 3; ++i) {
    d[2 * i] = 2 * dofs_.dual_edge[e[i]];
    d[2 * i + 1] = 2 * dofs_.dual_edge[e[i]] + 1;
  }
  return d;
}

MiniBasis FeSpaces::eval_mini_basis(int tri, const std::array<double, 3>& b) const {
  check_subdomain(tri, Subdomain::Conduit);
  const auto& g = grad_lambda_[tri];
  MiniBasis out;
  for (int i = 0; i < 3; ++i) {
    out.velocity[i] = b[i];
    out.velocity_grad[i] = g[i];
    out.pressure[i] = b[i];
    out.pressure_grad[i] = g[i];
  }
  out.velocity[3] = 27.0 * b[0] * b[1] * b[2];
  out.velocity_grad[3] = 27.0 * (b[1] * b[2] * g[0] + b[0] * b[2] * g[1] + b[0] * b[1] * g[2]);
  return out;
}

BdmBasis FeSpaces::eval_bdm1_basis(int tri, const std::array<double, 3>& b) const {
  check_subdomain(tri, Subdomain::Dual);
  const auto& loc = bdm_local_[tri];
  const Point xi = (mesh_->to_physical(tri, b) - loc.center) / loc.scale;
  BdmBasis out;
  for (int k = 0; k < 6; ++k) {
    const auto& c = loc.coeff.col(k);
    out.value[k] = Point(c(0) + c(1) * xi.x() + c(2) * xi.y(), c(3) + c(4) * xi.x() + c(5) * xi.y());
    out.divergence[k] = (c(1) + c(5)) / loc.scale;
  }
  return out;
}

std::array<double, 2> FeSpaces::bdm_edge_moments(int edge, const VectorFunction& v) const {
  const auto& e = mesh_->edge(edge);
  const Point& a = mesh_->vertex(e.vertices[0]);
  const Point& b = mesh_->vertex(e.vertices[1]);
  const auto& line = make_line_quadrature(13);
  std::array<double, 2> m{0.0, 0.0};
  for (std::size_t q = 0; q < line.size(); ++q) {
    const double s = line.points[q];
    const double vn = v(a + s * (b - a)).dot(e.normal);
    m[0] += line.weights[q] * vn;
    m[1] += line.weights[q] * vn * (2.0 * s - 1.0);
  }
  return m;
}

FieldHandle FeSpaces::zero_field(SpaceId id, double time) const {
  return FieldHandle{id, Vector::Zero(count(id)), time};
}

Point eval_mini_vector(const FeSpaces& spaces, const Vector& c, int tri,
                       const std::array<double, 3>& b) {
  const auto d = spaces.mini_scalar_dofs(tri);
  const int off = spaces.dofs().mini_scalar_count();
  const double phi[4] = {b[0], b[1], b[2], 27.0 * b[0] * b[1] * b[2]};
  Point u = Point::Zero();
  for (int k = 0; k < 4; ++k) {
    u.x() += phi[k] * c[d[k]];
    u.y() += phi[k] * c[off + d[k]];
  }
  return u;
}

Eigen::Matrix2d eval_mini_gradient(const FeSpaces& spaces, const Vector& c, int tri,
                                   const std::array<double, 3>& b) {
  const auto d = spaces.mini_scalar_dofs(tri);
  const int off = spaces.dofs().mini_scalar_count();
  const auto& g = spaces.grad_lambda(tri);
  const Point gb = 27.0 * (b[1] * b[2] * g[0] + b[0] * b[2] * g[1] + b[0] * b[1] * g[2]);
  const Point grads[4] = {g[0], g[1], g[2], gb};
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 4; ++k) {
    G.row(0) += c[d[k]] * grads[k].transpose();
    G.row(1) += c[off + d[k]] * grads[k].transpose();
  }
  return G;
}

Point eval_bdm_vector(const FeSpaces& spaces, const Vector& c, int tri,
                      const std::array<double, 3>& b) {
  const auto basis = spaces.eval_bdm1_basis(tri, b);
  const auto d = spaces.bdm_dofs(tri);
  Point u = Point::Zero();
  for (int k = 0; k < 6; ++k) u += c[d[k]] * basis.value[k];
  return u;
}

PointValue evaluate_field(const FeSpaces& spaces, const FieldHandle& field, int tri,
                          const std::array<double, 3>& b) {
  if (field.coeffs.size() != spaces.count(field.space))
    throw FeError("evaluate_field: coefficient length does not match the space");
  const auto& mesh = spaces.mesh();
  if (tri < 0 || tri >= mesh.num_triangles() ||
      mesh.triangle(tri).subdomain != subdomain_of(field.space))
    throw FeError(fmt::format("evaluate_field: triangle {} is outside the subdomain of {}", tri,
                              to_string(field.space)));
  PointValue out;
  switch (field.space) {
    case SpaceId::ConduitVelocity:
      out.vector = eval_mini_vector(spaces, field.coeffs, tri, b);
      out.gradient = eval_mini_gradient(spaces, field.coeffs, tri, b);
      out.divergence = out.gradient.trace();
      break;
    case SpaceId::ConduitPressure: {
      const auto d = spaces.p1_dofs(tri);
      const auto& g = spaces.grad_lambda(tri);
      for (int k = 0; k < 3; ++k) {
        out.scalar += b[k] * field.coeffs[d[k]];
        out.gradient.row(0) += field.coeffs[d[k]] * g[k].transpose();
      }
      break;
    }
    case SpaceId::FractureVelocity:
    case SpaceId::MatrixVelocity: {
      const auto basis = spaces.eval_bdm1_basis(tri, b);
      const auto d = spaces.bdm_dofs(tri);
      for (int k = 0; k < 6; ++k) {
        out.vector += field.coeffs[d[k]] * basis.value[k];
        out.divergence += field.coeffs[d[k]] * basis.divergence[k];
      }
      break;
    }
    case SpaceId::FracturePressure:
    case SpaceId::MatrixPressure:
      out.scalar = field.coeffs[spaces.dofs().p0_dof(tri)];
      break;
  }
  return out;
}

namespace {

SparseMatrix mini_scalar_mass(const FeSpaces& spaces) {
  const auto& mesh = spaces.mesh();
  const auto& rule = make_quadrature(kAssemblyDegree);
  const int n = spaces.dofs().mini_scalar_count();
  TripletBuilder tb(n, n);
  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    const double jac = 2.0 * mesh.area(t);
    const auto d = spaces.mini_scalar_dofs(t);
    double local[4][4] = {};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      const double phi[4] = {b[0], b[1], b[2], 27.0 * b[0] * b[1] * b[2]};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) local[i][j] += rule.weights[q] * jac * phi[i] * phi[j];
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) tb.add(d[i], d[j], local[i][j]);
  }
  return compress(tb);
}

SparseMatrix p1_mass(const FeSpaces& spaces) {
  const auto& mesh = spaces.mesh();
  const int n = spaces.dofs().n_conduit_vertices;
  TripletBuilder tb(n, n);
  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    const double a = mesh.area(t);
    const auto d = spaces.p1_dofs(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tb.add(d[i], d[j], a * (i == j ? 2.0 : 1.0) / 12.0);
  }
  return compress(tb);
}

SparseMatrix bdm_mass(const FeSpaces& spaces) {
  const auto& mesh = spaces.mesh();
  const auto& rule = make_quadrature(kAssemblyDegree);
  const int n = 2 * spaces.dofs().n_dual_edges;
  TripletBuilder tb(n, n);
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    const double jac = 2.0 * mesh.area(t);
    const auto d = spaces.bdm_dofs(t);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto basis = spaces.eval_bdm1_basis(t, rule.points[q]);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          local(i, j) += rule.weights[q] * jac * basis.value[i].dot(basis.value[j]);
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) tb.add(d[i], d[j], local(i, j));
  }
  return compress(tb);
}

}  // namespace

SparseMatrix mass_matrix(const FeSpaces& spaces, SpaceId id) {
  switch (id) {
    case SpaceId::ConduitVelocity: {
      const auto m = mini_scalar_mass(spaces);
      const int n = m.rows();
      TripletBuilder tb(2 * n, 2 * n);
      for (int r = 0; r < n; ++r)
        for (int k = m.row_offsets()[r]; k < m.row_offsets()[r + 1]; ++k) {
          tb.add(r, m.col_indices()[k], m.values()[k]);
          tb.add(n + r, n + m.col_indices()[k], m.values()[k]);
        }
      return compress(tb);
    }
    case SpaceId::ConduitPressure: return p1_mass(spaces);
    case SpaceId::FractureVelocity:
    case SpaceId::MatrixVelocity: return bdm_mass(spaces);
    case SpaceId::FracturePressure:
    case SpaceId::MatrixPressure: {
      const auto& mesh = spaces.mesh();
      const int n = spaces.dofs().n_dual_elements;
      TripletBuilder tb(n, n);
      for (int t : mesh.triangles_in(Subdomain::Dual))
        tb.add(spaces.dofs().p0_dof(t), spaces.dofs().p0_dof(t), mesh.area(t));
      return compress(tb);
    }
  }
  throw FeError("mass_matrix: unknown space");
}

FieldHandle l2_project_scalar(const FeSpaces& spaces, SpaceId id, const ScalarFunction& f,
                              double time) {
  if (is_vector_space(id)) throw FeError("l2_project_scalar: vector space requested");
  const auto& mesh = spaces.mesh();
  const auto& rule = make_quadrature(kErrorDegree);
  FieldHandle out = spaces.zero_field(id, time);
  if (id == SpaceId::ConduitPressure) {
    Vector rhs = Vector::Zero(out.coeffs.size());
    for (int t : mesh.triangles_in(Subdomain::Conduit)) {
      const double jac = 2.0 * mesh.area(t);
      const auto d = spaces.p1_dofs(t);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& b = rule.points[q];
        const double fv = f(mesh.to_physical(t, b)) * rule.weights[q] * jac;
        for (int i = 0; i < 3; ++i) rhs[d[i]] += fv * b[i];
      }
    }
    out.coeffs = solve(p1_mass(spaces), rhs);
    return out;
  }
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      integral += rule.weights[q] * f(mesh.to_physical(t, rule.points[q]));
    out.coeffs[spaces.dofs().p0_dof(t)] = 2.0 * integral;  // mean value: 2 |T| sum / |T|
  }
  return out;
}

FieldHandle l2_project_vector(const FeSpaces& spaces, SpaceId id, const VectorFunction& f,
                              double time) {
  if (!is_vector_space(id)) throw FeError("l2_project_vector: scalar space requested");
  const auto& mesh = spaces.mesh();
  const auto& rule = make_quadrature(kErrorDegree);
  FieldHandle out = spaces.zero_field(id, time);
  if (id == SpaceId::ConduitVelocity) {
    const int n = spaces.dofs().mini_scalar_count();
    Vector rx = Vector::Zero(n), ry = Vector::Zero(n);
    for (int t : mesh.triangles_in(Subdomain::Conduit)) {
      const double jac = 2.0 * mesh.area(t);
      const auto d = spaces.mini_scalar_dofs(t);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& b = rule.points[q];
        const Point fv = f(mesh.to_physical(t, b)) * (rule.weights[q] * jac);
        const double phi[4] = {b[0], b[1], b[2], 27.0 * b[0] * b[1] * b[2]};
        for (int i = 0; i < 4; ++i) {
          rx[d[i]] += fv.x() * phi[i];
          ry[d[i]] += fv.y() * phi[i];
        }
      }
    }
    const LuSolver lu(mini_scalar_mass(spaces));
    out.coeffs.head(n) = lu.solve(rx);
    out.coeffs.tail(n) = lu.solve(ry);
    return out;
  }
  Vector rhs = Vector::Zero(out.coeffs.size());
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    const double jac = 2.0 * mesh.area(t);
    const auto d = spaces.bdm_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      const auto basis = spaces.eval_bdm1_basis(t, b);
      const Point fv = f(mesh.to_physical(t, b)) * (rule.weights[q] * jac);
      for (int i = 0; i < 6; ++i) rhs[d[i]] += fv.dot(basis.value[i]);
    }
  }
  out.coeffs = solve(bdm_mass(spaces), rhs);
  return out;
}

}  // namespace dpns
