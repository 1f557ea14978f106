#include "dpns/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dpns/characteristics.hpp"

namespace dpns {

DirichletEliminator::DirichletEliminator(const SparseMatrix& A, std::vector<int> dofs)
    : dofs_(std::move(dofs)) {
  const int n = A.rows();
  if (A.cols() != n) throw AssemblyError("Dirichlet elimination needs a square matrix");
  std::vector<int> slot(n, -1);
  for (std::size_t i = 0; i < dofs_.size(); ++i) {
    const int d = dofs_[i];
    if (d < 0 || d >= n) throw AssemblyError(fmt::format("constrained dof {} out of range", d));
    if (slot[d] >= 0) throw AssemblyError(fmt::format("dof {} constrained twice", d));
    slot[d] = static_cast<int>(i);
  }
  TripletBuilder coupling(n, static_cast<int>(dofs_.size()));
  TripletBuilder reduced(n, n);
  reduced.reserve(A.nnz());
  const auto offsets = A.row_offsets();
  const auto cols = A.col_indices();
  const auto vals = A.values();
  for (int r = 0; r < n; ++r) {
    for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
      const int c = cols[k];
      if (slot[c] >= 0) {
        if (slot[r] < 0) coupling.add(r, slot[c], vals[k]);
      } else if (slot[r] < 0) {
        reduced.add(r, c, vals[k]);
      }
    }
  }
  for (int d : dofs_) reduced.add(d, d, 1.0);
  coupling_ = compress(coupling);
  reduced_ = compress(reduced);
}

void DirichletEliminator::apply(Vector& rhs, const Vector& values) const {
  if (values.size() != static_cast<Eigen::Index>(dofs_.size()))
    throw AssemblyError("Dirichlet value count does not match the constrained dofs");
  if (!dofs_.empty()) rhs -= coupling_ * values;
  for (std::size_t i = 0; i < dofs_.size(); ++i) rhs[dofs_[i]] = values[i];
}

StepSystem apply_dirichlet(const StepSystem& system, const Constraints& constraints) {
  auto sorted = constraints;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> dofs;
  Vector values(static_cast<Eigen::Index>(sorted.size()));
  for (const auto& [dof, value] : sorted) {
    if (!dofs.empty() && dofs.back() == dof) {
      if (values[static_cast<Eigen::Index>(dofs.size()) - 1] != value)
        throw AssemblyError(fmt::format("conflicting constraints on dof {}", dof));
      continue;
    }
    values[static_cast<Eigen::Index>(dofs.size())] = value;
    dofs.push_back(dof);
  }
  values.conservativeResize(static_cast<Eigen::Index>(dofs.size()));
  if (dofs.empty()) return system;
  const DirichletEliminator elim(system.matrix, dofs);
  StepSystem out = system;
  out.matrix = elim.reduced();
  elim.apply(out.rhs, values);
  return out;
}

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

const LineRule& edge_rule() { return make_line_quadrature(kEdgeDegree); }
const LineRule& data_rule() { return make_line_quadrature(kErrorDegree); }

std::array<double, 4> mini_values(const std::array<double, 3>& b) {
  return {b[0], b[1], b[2], 27.0 * b[0] * b[1] * b[2]};
}

}  // namespace

// ---------------------------------------------------------------- Step 1

const QuadratureRule& NsAssembler::rule() { return make_quadrature(kAssemblyDegree); }

NsAssembler::NsAssembler(const FeSpaces& spaces, const PhysParams& params, double dt,
                         bool pin_pressure)
    : spaces_(&spaces), params_(params), dt_(dt), pin_pressure_(pin_pressure) {
  params_.validate();
  if (!(dt > 0.0)) throw AssemblyError("conduit time step must be positive");
  n_scalar_ = spaces.dofs().mini_scalar_count();
  n_pressure_ = spaces.dofs().n_conduit_vertices;

  const Mesh& mesh = spaces.mesh();
  std::vector<char> seen(mesh.num_vertices(), 0);
  for (const auto& e : mesh.edges()) {
    const bool wall = e.label == BoundaryLabel::ConduitWall ||
                      e.label == BoundaryLabel::ConduitInflow ||
                      e.label == BoundaryLabel::SharedWall;
    if (!wall) continue;
    for (int v : e.vertices) {
      if (seen[v]) continue;
      seen[v] = 1;
      dirichlet_points_.push_back({v, e.label, e.segment});
    }
  }
  for (int comp = 0; comp < 2; ++comp)
    for (const auto& p : dirichlet_points_)
      constrained_.push_back(comp * n_scalar_ + spaces.dofs().conduit_vertex[p.vertex]);
  if (pin_pressure_) constrained_.push_back(2 * n_scalar_);

  build_matrix();
}

void NsAssembler::build_matrix() {
  const FeSpaces& sp = *spaces_;
  const Mesh& mesh = sp.mesh();
  const auto& q = rule();
  const int ns = n_scalar_;
  const int poff = 2 * ns;
  TripletBuilder tb(size(), size());
  tb.reserve(mesh.triangles_in(Subdomain::Conduit).size() * (2 * 16 + 2 * 2 * 12));

  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    const double jac = 2.0 * mesh.area(t);
    const auto d = sp.mini_scalar_dofs(t);
    const auto pd = sp.p1_dofs(t);
    double vv[4][4] = {};
    double bp[2][4][3] = {};  // bp[c][i][j] = int psi_j d_c phi_i
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto basis = sp.eval_mini_basis(t, q.points[k]);
      const double w = q.weights[k] * jac;
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
          vv[i][j] += w * (basis.velocity[i] * basis.velocity[j] / dt_ +
                           params_.nu * basis.velocity_grad[i].dot(basis.velocity_grad[j]));
        for (int j = 0; j < 3; ++j)
          for (int c = 0; c < 2; ++c)
            bp[c][i][j] += w * basis.pressure[j] * basis.velocity_grad[i][c];
      }
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) tb.add(c * ns + d[i], c * ns + d[j], vv[i][j]);
        for (int j = 0; j < 3; ++j) {
          tb.add(c * ns + d[i], poff + pd[j], -bp[c][i][j]);
          tb.add(poff + pd[j], c * ns + d[i], bp[c][i][j]);
        }
      }
  }

  const double kappa = params_.bjs_coefficient();
  const auto& lr = edge_rule();
  for (const auto& ie : mesh.interface_edges()) {
    const auto& e = mesh.edge(ie.edge);
    const Point& a = mesh.vertex(e.vertices[0]);
    const Point& b = mesh.vertex(e.vertices[1]);
    const double g = params_.gamma / (params_.rho * e.length);
    const auto d = sp.mini_scalar_dofs(ie.conduit_triangle);
    // Tangential slip and normal penalty as a 2x2 tensor acting on (v_x, v_y).
    const Eigen::Matrix2d coef =
        kappa * ie.tangent * ie.tangent.transpose() + g * ie.normal_d * ie.normal_d.transpose();
    double pp[4][4] = {};
    for (std::size_t k = 0; k < lr.size(); ++k) {
      const Point x = a + lr.points[k] * (b - a);
      const auto phi = mini_values(mesh.barycentric(ie.conduit_triangle, x));
      const double w = lr.weights[k] * e.length;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) pp[i][j] += w * phi[i] * phi[j];
    }
    for (int c = 0; c < 2; ++c)
      for (int cc = 0; cc < 2; ++cc) {
        if (coef(c, cc) == 0.0) continue;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) tb.add(c * ns + d[i], cc * ns + d[j], coef(c, cc) * pp[i][j]);
      }
  }
  matrix_ = compress(tb);
}

Vector NsAssembler::constraint_values(const Problem& problem, double t) const {
  Vector v(static_cast<Eigen::Index>(constrained_.size()));
  const auto np = static_cast<Eigen::Index>(dirichlet_points_.size());
  const Mesh& mesh = spaces_->mesh();
  for (Eigen::Index i = 0; i < np; ++i) {
    const auto& p = dirichlet_points_[i];
    const Point u =
        problem.boundary_velocity(BoundaryField::Conduit, mesh.vertex(p.vertex), t, p.label, p.segment);
    v[i] = u.x();
    v[np + i] = u.y();
  }
  if (pin_pressure_) v[2 * np] = 0.0;
  return v;
}

std::vector<Point> NsAssembler::trace(const FieldHandle& u_old, TraceStats* stats) const {
  const Mesh& mesh = spaces_->mesh();
  const auto& q = rule();
  const auto tris = mesh.triangles_in(Subdomain::Conduit);
  std::vector<Point> out(tris.size() * q.size());
  long clamped = 0;
  std::size_t idx = 0;
  for (int t : tris)
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto tv = trace_evaluate(*spaces_, u_old, mesh.to_physical(t, q.points[k]), t, dt_);
      clamped += tv.clamped;
      out[idx++] = tv.value;
    }
  if (stats) {
    stats->traced += static_cast<long>(out.size());
    stats->clamped += clamped;
  }
  return out;
}

std::vector<Point> NsAssembler::sample(const FieldHandle& u_old) const {
  const Mesh& mesh = spaces_->mesh();
  const auto& q = rule();
  const auto tris = mesh.triangles_in(Subdomain::Conduit);
  std::vector<Point> out(tris.size() * q.size());
  std::size_t idx = 0;
  for (int t : tris)
    for (std::size_t k = 0; k < q.size(); ++k)
      out[idx++] = eval_mini_vector(*spaces_, u_old.coeffs, t, q.points[k]);
  return out;
}

Vector NsAssembler::rhs(std::span<const Point> transported, const FieldHandle& phi_f_lag,
                        const FieldHandle& u_f_lag, double t_next, const Problem& problem) const {
  const FeSpaces& sp = *spaces_;
  const Mesh& mesh = sp.mesh();
  const auto& q = rule();
  const auto tris = mesh.triangles_in(Subdomain::Conduit);
  if (transported.size() != tris.size() * q.size())
    throw AssemblyError("transported values do not match the quadrature layout");
  if (phi_f_lag.space != SpaceId::FracturePressure || u_f_lag.space != SpaceId::FractureVelocity)
    throw AssemblyError("Step 1 needs the lagged fracture fields");
  const int ns = n_scalar_;
  Vector r = Vector::Zero(size());

  std::size_t idx = 0;
  for (int t : tris) {
    const double jac = 2.0 * mesh.area(t);
    const auto d = sp.mini_scalar_dofs(t);
    for (std::size_t k = 0; k < q.size(); ++k, ++idx) {
      const auto& b = q.points[k];
      const Point load = (problem.f_c(mesh.to_physical(t, b), t_next) + transported[idx] / dt_) *
                         (q.weights[k] * jac);
      const auto phi = mini_values(b);
      for (int i = 0; i < 4; ++i) {
        r[d[i]] += load.x() * phi[i];
        r[ns + d[i]] += load.y() * phi[i];
      }
    }
  }

  const auto& lr = data_rule();
  for (const auto& ie : mesh.interface_edges()) {
    const auto& e = mesh.edge(ie.edge);
    const Point& a = mesh.vertex(e.vertices[0]);
    const Point& bv = mesh.vertex(e.vertices[1]);
    const double g = params_.gamma / (params_.rho * e.length);
    const auto d = sp.mini_scalar_dofs(ie.conduit_triangle);
    const double phi_f = phi_f_lag.coeffs[sp.dofs().p0_dof(ie.dual_triangle)];
    const Point& n = ie.normal_d;
    for (std::size_t k = 0; k < lr.size(); ++k) {
      const Point x = a + lr.points[k] * (bv - a);
      const Point uf =
          eval_bdm_vector(sp, u_f_lag.coeffs, ie.dual_triangle, mesh.barycentric(ie.dual_triangle, x));
      Point load = (phi_f / params_.rho + g * uf.dot(n)) * n;
      if (const auto extra = problem.interface_data(x, t_next, -n, ie.tangent))
        load += extra->tangential * ie.tangent - extra->normal * n;
      load *= lr.weights[k] * e.length;
      const auto phi = mini_values(mesh.barycentric(ie.conduit_triangle, x));
      for (int i = 0; i < 4; ++i) {
        r[d[i]] += load.x() * phi[i];
        r[ns + d[i]] += load.y() * phi[i];
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------- Steps 2 and 3

DarcyAssembler::DarcyAssembler(const FeSpaces& spaces, const PhysParams& params, double ds,
                               Continuum which)
    : spaces_(&spaces), params_(params), ds_(ds), which_(which) {
  params_.validate();
  if (!(ds > 0.0)) throw AssemblyError("porous time step must be positive");
  n_velocity_ = 2 * spaces.dofs().n_dual_edges;
  n_pressure_ = spaces.dofs().n_dual_elements;
  const Mesh& mesh = spaces.mesh();
  for (int ei = 0; ei < mesh.num_edges(); ++ei) {
    const int de = spaces.dofs().dual_edge[ei];
    const auto label = mesh.edge(ei).label;
    if (de < 0 || label == BoundaryLabel::Interior) continue;
    if (label == BoundaryLabel::Interface && which_ == Continuum::Fracture) continue;
    constrained_edges_.push_back(ei);
    constrained_.push_back(2 * de);
    constrained_.push_back(2 * de + 1);
  }
  build_matrix();
}

void DarcyAssembler::build_matrix() {
  const FeSpaces& sp = *spaces_;
  const Mesh& mesh = sp.mesh();
  const auto& q = make_quadrature(kAssemblyDegree);
  const bool fracture = which_ == Continuum::Fracture;
  const double k = fracture ? params_.k_f : params_.k_m;
  const double storage = (fracture ? params_.eta_f * params_.C_ft : params_.eta_m * params_.C_mt);
  const double drag = params_.mu / (params_.rho * k);
  const double reaction = storage / (params_.rho * ds_) + params_.exchange() / params_.rho;
  const double inv_rho = 1.0 / params_.rho;

  TripletBuilder tb(size(), size());
  tb.reserve(mesh.triangles_in(Subdomain::Dual).size() * 49);
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    const double area = mesh.area(t);
    const double jac = 2.0 * area;
    const auto d = sp.bdm_dofs(t);
    const int p = n_velocity_ + sp.dofs().p0_dof(t);
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    std::array<double, 6> div{};
    for (std::size_t kq = 0; kq < q.size(); ++kq) {
      const auto basis = sp.eval_bdm1_basis(t, q.points[kq]);
      const double w = q.weights[kq] * jac;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) += w * drag * basis.value[i].dot(basis.value[j]);
      if (kq == 0) div = basis.divergence;
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) tb.add(d[i], d[j], m(i, j));
      tb.add(d[i], p, -inv_rho * div[i] * area);
      tb.add(p, d[i], inv_rho * div[i] * area);
    }
    tb.add(p, p, reaction * area);
  }

  if (fracture) {
    const auto& lr = edge_rule();
    for (const auto& ie : mesh.interface_edges()) {
      const auto& e = mesh.edge(ie.edge);
      const Point& a = mesh.vertex(e.vertices[0]);
      const Point& b = mesh.vertex(e.vertices[1]);
      const double g = params_.gamma / (params_.rho * e.length);
      if (g == 0.0) continue;
      const auto d = sp.bdm_dofs(ie.dual_triangle);
      Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
      for (std::size_t kq = 0; kq < lr.size(); ++kq) {
        const Point x = a + lr.points[kq] * (b - a);
        const auto basis = sp.eval_bdm1_basis(ie.dual_triangle, mesh.barycentric(ie.dual_triangle, x));
        const double w = lr.weights[kq] * e.length * g;
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j)
            m(i, j) += w * basis.value[i].dot(ie.normal_d) * basis.value[j].dot(ie.normal_d);
      }
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) tb.add(d[i], d[j], m(i, j));
    }
  }
  matrix_ = compress(tb);
}

Vector DarcyAssembler::constraint_values(const Problem& problem, double t) const {
  const Mesh& mesh = spaces_->mesh();
  const auto field = which_ == Continuum::Fracture ? BoundaryField::Fracture : BoundaryField::Matrix;
  Vector v(static_cast<Eigen::Index>(constrained_.size()));
  for (std::size_t i = 0; i < constrained_edges_.size(); ++i) {
    const int ei = constrained_edges_[i];
    const auto& e = mesh.edge(ei);
    std::array<double, 2> m{0.0, 0.0};
    if (e.label != BoundaryLabel::Interface)
      m = spaces_->bdm_edge_moments(ei, [&](const Point& x) {
        return problem.boundary_velocity(field, x, t, e.label, e.segment);
      });
    v[2 * i] = m[0];
    v[2 * i + 1] = m[1];
  }
  return v;
}

Vector DarcyAssembler::rhs(const FieldHandle& phi_old, const FieldHandle& phi_other,
                           const FieldHandle* s_avg, double t_next,
                           const Problem& problem) const {
  const FeSpaces& sp = *spaces_;
  const Mesh& mesh = sp.mesh();
  const bool fracture = which_ == Continuum::Fracture;
  const SpaceId own = fracture ? SpaceId::FracturePressure : SpaceId::MatrixPressure;
  const SpaceId other = fracture ? SpaceId::MatrixPressure : SpaceId::FracturePressure;
  if (phi_old.space != own || phi_other.space != other)
    throw AssemblyError("Darcy step received pressures of the wrong continua");
  if (!same_time(phi_old.time + ds_, t_next) || !same_time(phi_other.time + ds_, t_next))
    throw AssemblyError(fmt::format("lagged pressures labelled {} / {} do not precede t = {}",
                                    phi_old.time, phi_other.time, t_next));
  if (fracture) {
    if (!s_avg || s_avg->space != SpaceId::ConduitVelocity)
      throw AssemblyError("fracture step needs the averaged conduit velocity");
    if (!same_time(s_avg->time, t_next))
      throw AssemblyError(fmt::format("interface average labelled {} used at t = {}", s_avg->time, t_next));
  }

  const double storage = (fracture ? params_.eta_f * params_.C_ft : params_.eta_m * params_.C_mt) /
                         (params_.rho * ds_);
  const double exchange = params_.exchange() / params_.rho;
  const double inv_rho = 1.0 / params_.rho;
  const auto& q = make_quadrature(kAssemblyDegree);

  Vector r = Vector::Zero(size());
  for (int t : mesh.triangles_in(Subdomain::Dual)) {
    const int pd = sp.dofs().p0_dof(t);
    const double area = mesh.area(t);
    double source = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Point x = mesh.to_physical(t, q.points[k]);
      source += q.weights[k] * (fracture ? problem.f_d(x, t_next) : problem.f_m(x, t_next));
    }
    r[n_velocity_ + pd] = storage * phi_old.coeffs[pd] * area +
                          exchange * phi_other.coeffs[pd] * area + inv_rho * source * 2.0 * area;
  }

  if (fracture) {
    const auto& lr = data_rule();
    for (const auto& ie : mesh.interface_edges()) {
      const auto& e = mesh.edge(ie.edge);
      const Point& a = mesh.vertex(e.vertices[0]);
      const Point& b = mesh.vertex(e.vertices[1]);
      const double g = params_.gamma / (params_.rho * e.length);
      const auto d = sp.bdm_dofs(ie.dual_triangle);
      const double phi = phi_old.coeffs[sp.dofs().p0_dof(ie.dual_triangle)];
      for (std::size_t k = 0; k < lr.size(); ++k) {
        const Point x = a + lr.points[k] * (b - a);
        const Point s = eval_mini_vector(sp, s_avg->coeffs, ie.conduit_triangle,
                                         mesh.barycentric(ie.conduit_triangle, x));
        const double load = (-phi * inv_rho + g * s.dot(ie.normal_d)) * lr.weights[k] * e.length;
        const auto basis = sp.eval_bdm1_basis(ie.dual_triangle, mesh.barycentric(ie.dual_triangle, x));
        for (int i = 0; i < 6; ++i) r[d[i]] += load * basis.value[i].dot(ie.normal_d);
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------- one-shot helpers

namespace {

StepSystem finish(const SparseMatrix& A, Vector rhs, const std::vector<int>& dofs,
                  const Vector& values, int velocity_dofs) {
  const DirichletEliminator elim(A, dofs);
  elim.apply(rhs, values);
  StepSystem s;
  s.matrix = elim.reduced();
  s.rhs = std::move(rhs);
  s.velocity_dofs = velocity_dofs;
  s.pressure_dofs = A.rows() - velocity_dofs;
  return s;
}

}  // namespace

StepSystem assemble_ns_step(const FeSpaces& spaces, const FieldHandle& u_c_old,
                            const FieldHandle& phi_f_lag, const FieldHandle& u_f_lag,
                            double t_next, double dt, const Problem& problem, TraceStats* stats) {
  const NsAssembler ns(spaces, problem.params(), dt);
  const auto traced = ns.trace(u_c_old, stats);
  return finish(ns.matrix(), ns.rhs(traced, phi_f_lag, u_f_lag, t_next, problem),
                ns.constrained_dofs(), ns.constraint_values(problem, t_next), ns.velocity_dofs());
}

StepSystem assemble_matrix_darcy_step(const FeSpaces& spaces, const FieldHandle& phi_m_old,
                                      const FieldHandle& phi_f_lag, double t_next, double ds,
                                      const Problem& problem) {
  const DarcyAssembler da(spaces, problem.params(), ds, Continuum::Matrix);
  return finish(da.matrix(), da.rhs(phi_m_old, phi_f_lag, nullptr, t_next, problem),
                da.constrained_dofs(), da.constraint_values(problem, t_next), da.velocity_dofs());
}

StepSystem assemble_fracture_darcy_step(const FeSpaces& spaces, const FieldHandle& phi_f_old,
                                        const FieldHandle& phi_m_lag, const FieldHandle& s_avg,
                                        double t_next, double ds, const Problem& problem) {
  const DarcyAssembler da(spaces, problem.params(), ds, Continuum::Fracture);
  return finish(da.matrix(), da.rhs(phi_f_old, phi_m_lag, &s_avg, t_next, problem),
                da.constrained_dofs(), da.constraint_values(problem, t_next), da.velocity_dofs());
}

}  // namespace dpns
