#include "dpns/postprocess.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "dpns/quadrature.hpp"

namespace dpns {

std::string_view to_string(ErrorField f) {
  switch (f) {
    case ErrorField::UcL2: return "u_c";
    case ErrorField::UcH1: return "grad_u_c";
    case ErrorField::PcL2: return "p_c";
    case ErrorField::UfL2: return "u_f";
    case ErrorField::UmL2: return "u_m";
    case ErrorField::PhiFL2: return "phi_f";
    case ErrorField::PhiML2: return "phi_m";
  }
  return "?";
}

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)); }

int idx(ErrorField f) { return static_cast<int>(f); }

}  // namespace

ErrorReport compute_errors(const FeSpaces& spaces, const State& state, const MmsProblem& problem,
                           double t) {
  for (const FieldHandle* f : {&state.u_c, &state.p_c, &state.u_f, &state.phi_f, &state.u_m, &state.phi_m})
    if (!same_time(f->time, t))
      throw PostprocessError(fmt::format("field {} is labelled t = {}, errors requested at t = {}",
                                         to_string(f->space), f->time, t));
  const Mesh& mesh = spaces.mesh();
  const auto& q = make_quadrature(kErrorDegree);
  std::array<double, 7> err{}, ref{};

  for (int tri : mesh.triangles_in(Subdomain::Conduit)) {
    const double jac = 2.0 * mesh.area(tri);
    const auto pd = spaces.p1_dofs(tri);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto& b = q.points[k];
      const double w = q.weights[k] * jac;
      const Point x = mesh.to_physical(tri, b);
      const Point u = problem.u_c(x, t);
      const Eigen::Matrix2d g = problem.grad_u_c(x, t);
      const double p = problem.p_c(x, t);
      const Point uh = eval_mini_vector(spaces, state.u_c.coeffs, tri, b);
      const Eigen::Matrix2d gh = eval_mini_gradient(spaces, state.u_c.coeffs, tri, b);
      double ph = 0.0;
      for (int i = 0; i < 3; ++i) ph += b[i] * state.p_c.coeffs[pd[i]];
      err[idx(ErrorField::UcL2)] += w * (u - uh).squaredNorm();
      ref[idx(ErrorField::UcL2)] += w * u.squaredNorm();
      err[idx(ErrorField::UcH1)] += w * (g - gh).squaredNorm();
      ref[idx(ErrorField::UcH1)] += w * g.squaredNorm();
      err[idx(ErrorField::PcL2)] += w * (p - ph) * (p - ph);
      ref[idx(ErrorField::PcL2)] += w * p * p;
    }
  }
  for (int tri : mesh.triangles_in(Subdomain::Dual)) {
    const double jac = 2.0 * mesh.area(tri);
    const int pd = spaces.dofs().p0_dof(tri);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto& b = q.points[k];
      const double w = q.weights[k] * jac;
      const Point x = mesh.to_physical(tri, b);
      const auto basis = spaces.eval_bdm1_basis(tri, b);
      const auto d = spaces.bdm_dofs(tri);
      Point uf = Point::Zero(), um = Point::Zero();
      for (int i = 0; i < 6; ++i) {
        uf += state.u_f.coeffs[d[i]] * basis.value[i];
        um += state.u_m.coeffs[d[i]] * basis.value[i];
      }
      const Point ef = problem.u_f(x, t), em = problem.u_m(x, t);
      const double pf = problem.phi_f(x, t), pm = problem.phi_m(x, t);
      err[idx(ErrorField::UfL2)] += w * (ef - uf).squaredNorm();
      ref[idx(ErrorField::UfL2)] += w * ef.squaredNorm();
      err[idx(ErrorField::UmL2)] += w * (em - um).squaredNorm();
      ref[idx(ErrorField::UmL2)] += w * em.squaredNorm();
      const double df = pf - state.phi_f.coeffs[pd], dm = pm - state.phi_m.coeffs[pd];
      err[idx(ErrorField::PhiFL2)] += w * df * df;
      ref[idx(ErrorField::PhiFL2)] += w * pf * pf;
      err[idx(ErrorField::PhiML2)] += w * dm * dm;
      ref[idx(ErrorField::PhiML2)] += w * pm * pm;
    }
  }

  ErrorReport rep;
  rep.h = mesh.h_global();
  rep.t = t;
  for (int i = 0; i < 7; ++i) {
    rep.absolute[i] = std::sqrt(err[i]);
    rep.relative[i] = ref[i] > 0.0 ? std::sqrt(err[i] / ref[i]) : rep.absolute[i];
  }
  return rep;
}

void accumulate_max(ErrorReport& into, const ErrorReport& sample) {
  for (int i = 0; i < 7; ++i) {
    into.absolute[i] = std::max(into.absolute[i], sample.absolute[i]);
    into.relative[i] = std::max(into.relative[i], sample.relative[i]);
  }
}

const std::vector<RateRow>& RateTable::column(ErrorField f) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i] == f) return rows[i];
  throw PostprocessError(fmt::format("rate table has no column {}", to_string(f)));
}

void RateTable::write_csv(std::ostream& os) const {
  os << "h,field,error,rate\n";
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (const auto& row : rows[i])
      os << fmt::format("{},{},{:.9e},{}\n", row.h, to_string(fields[i]), row.error,
                        row.rate ? fmt::format("{:.4f}", *row.rate) : std::string("--"));
}

RateTable make_rate_table(const std::vector<ErrorReport>& runs) {
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double ratio = runs[i - 1].h / runs[i].h;
    if (std::abs(ratio - 2.0) > 1e-9)
      throw PostprocessError(fmt::format("mesh sizes {} and {} are not a halving sequence",
                                         runs[i - 1].h, runs[i].h));
  }
  RateTable table;
  table.fields.assign(kErrorFields.begin(), kErrorFields.end());
  table.rows.resize(table.fields.size());
  for (std::size_t f = 0; f < table.fields.size(); ++f) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      RateRow row{runs[i].h, runs[i][table.fields[f]], std::nullopt};
      if (i > 0) row.rate = std::log2(runs[i - 1][table.fields[f]] / row.error);
      table.rows[f].push_back(row);
    }
  }
  return table;
}

void export_vtk(const FeSpaces& spaces, const State& state, const std::string& path) {
  const Mesh& mesh = spaces.mesh();
  const auto& dofs = spaces.dofs();
  const int ns = dofs.mini_scalar_count();
  auto out = fmt::output_file(path);
  out.print("# vtk DataFile Version 2.0\ndpns state t={:.17g}\nASCII\nDATASET UNSTRUCTURED_GRID\n",
            state.u_c.time);
  out.print("POINTS {} double\n", mesh.num_vertices());
  for (const auto& p : mesh.vertices()) out.print("{:.17g} {:.17g} 0\n", p.x(), p.y());
  out.print("CELLS {} {}\n", mesh.num_triangles(), 4 * mesh.num_triangles());
  for (const auto& t : mesh.triangles())
    out.print("3 {} {} {}\n", t.vertices[0], t.vertices[1], t.vertices[2]);
  out.print("CELL_TYPES {}\n", mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out.print("5\n");

  out.print("POINT_DATA {}\nVECTORS u_c double\n", mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int d = dofs.conduit_vertex[v];
    const double ux = d >= 0 ? state.u_c.coeffs[d] : 0.0;
    const double uy = d >= 0 ? state.u_c.coeffs[ns + d] : 0.0;
    out.print("{:.17g} {:.17g} 0\n", ux, uy);
  }
  out.print("SCALARS p_c double 1\nLOOKUP_TABLE default\n");
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int d = dofs.conduit_vertex[v];
    out.print("{:.17g}\n", d >= 0 ? state.p_c.coeffs[d] : 0.0);
  }

  out.print("CELL_DATA {}\nSCALARS subdomain int 1\nLOOKUP_TABLE default\n", mesh.num_triangles());
  for (const auto& t : mesh.triangles()) out.print("{}\n", static_cast<int>(t.subdomain));
  for (const FieldHandle* f : {&state.phi_f, &state.phi_m}) {
    out.print("SCALARS {} double 1\nLOOKUP_TABLE default\n", to_string(f->space));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const int d = dofs.dual_element[t];
      out.print("{:.17g}\n", d >= 0 ? f->coeffs[d] : 0.0);
    }
  }
  const std::array<double, 3> centroid{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  for (const FieldHandle* f : {&state.u_f, &state.u_m}) {
    out.print("VECTORS {} double\n", to_string(f->space));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      // Linear fields: the element average is the centroid value.
      const Point u = dofs.dual_element[t] >= 0 ? eval_bdm_vector(spaces, f->coeffs, t, centroid)
                                                : Point::Zero();
      out.print("{:.17g} {:.17g} 0\n", u.x(), u.y());
    }
  }
}

// ---------------------------------------------------------------- energy

double EnergyComponents::total() const {
  return conduit_kinetic + conduit_viscous + slip + penalty_jump + fracture_interface +
         matrix_darcy + fracture_darcy + matrix_storage + fracture_storage + exchange;
}

bool EnergyComponents::finite() const {
  for (double v : {conduit_kinetic, conduit_viscous, slip, penalty_jump, fracture_interface,
                   matrix_darcy, fracture_darcy, matrix_storage, fracture_storage, exchange})
    if (!std::isfinite(v)) return false;
  return true;
}

EnergyMonitor::EnergyMonitor(const FeSpaces& spaces, const PhysParams& params, double dt,
                             double ds, int r)
    : params_(params), dt_(dt), ds_(ds), r_(r) {
  const Mesh& mesh = spaces.mesh();
  const int ns = spaces.dofs().mini_scalar_count();
  const int nc = 2 * ns;
  const int nf = spaces.count(SpaceId::FractureVelocity);

  mass_c_ = mass_matrix(spaces, SpaceId::ConduitVelocity);
  mass_bdm_ = mass_matrix(spaces, SpaceId::FractureVelocity);
  mass_p0_ = mass_matrix(spaces, SpaceId::FracturePressure);

  TripletBuilder stiff(nc, nc);
  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    const auto d = spaces.mini_scalar_dofs(t);
    const auto& q = make_quadrature(kAssemblyDegree);
    const double jac = 2.0 * mesh.area(t);
    double a[4][4] = {};
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto basis = spaces.eval_mini_basis(t, q.points[k]);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          a[i][j] += q.weights[k] * jac * basis.velocity_grad[i].dot(basis.velocity_grad[j]);
    }
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) stiff.add(c * ns + d[i], c * ns + d[j], a[i][j]);
  }
  stiff_c_ = compress(stiff);

  TripletBuilder tan_c(nc, nc), nor_c(nc, nc), nor_f(nf, nf), cross(nc, nf);
  const auto& lr = make_line_quadrature(kEdgeDegree);
  for (const auto& ie : mesh.interface_edges()) {
    const auto& e = mesh.edge(ie.edge);
    const Point& a = mesh.vertex(e.vertices[0]);
    const Point& b = mesh.vertex(e.vertices[1]);
    const auto dc = spaces.mini_scalar_dofs(ie.conduit_triangle);
    const auto df = spaces.bdm_dofs(ie.dual_triangle);
    const Point& n = ie.normal_d;
    for (std::size_t k = 0; k < lr.size(); ++k) {
      const Point x = a + lr.points[k] * (b - a);
      const auto bc = mesh.barycentric(ie.conduit_triangle, x);
      const double phi[4] = {bc[0], bc[1], bc[2], 27.0 * bc[0] * bc[1] * bc[2]};
      const auto basis = spaces.eval_bdm1_basis(ie.dual_triangle, mesh.barycentric(ie.dual_triangle, x));
      const double w = lr.weights[k] * e.length;
      const double wh = w / e.length;
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 4; ++i) {
          for (int cc = 0; cc < 2; ++cc)
            for (int j = 0; j < 4; ++j) {
              tan_c.add(c * ns + dc[i], cc * ns + dc[j], w * phi[i] * phi[j] * ie.tangent[c] * ie.tangent[cc]);
              nor_c.add(c * ns + dc[i], cc * ns + dc[j], wh * phi[i] * phi[j] * n[c] * n[cc]);
            }
          for (int j = 0; j < 6; ++j)
            cross.add(c * ns + dc[i], df[j], wh * phi[i] * n[c] * basis.value[j].dot(n));
        }
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          nor_f.add(df[i], df[j], wh * basis.value[i].dot(n) * basis.value[j].dot(n));
    }
  }
  tangent_c_ = compress(tan_c);
  normal_c_ = compress(nor_c);
  normal_f_ = compress(nor_f);
  cross_cf_ = compress(cross);
}

double EnergyMonitor::quad(const SparseMatrix& m, const Vector& x) const {
  return x.dot(m * x);
}

void EnergyMonitor::add_substep(EnergySums& sums, const Vector& u_c) const {
  sums.viscous += dt_ * params_.nu * quad(stiff_c_, u_c);
  sums.slip += 2.0 * params_.bjs_coefficient() * dt_ * quad(tangent_c_, u_c);
  sums.pending_normal += quad(normal_c_, u_c);
}

void EnergyMonitor::add_macro_step(EnergySums& sums, const State& before, const State& after,
                                   const Vector& s_sum) const {
  const auto& p = params_;
  const Vector& uf = after.u_f.coeffs;
  const double jump = sums.pending_normal - 2.0 * s_sum.dot(cross_cf_ * uf) + r_ * quad(normal_f_, uf);
  sums.penalty += p.gamma * dt_ / (2.0 * p.rho) * jump;
  sums.pending_normal = 0.0;
  sums.matrix_darcy += 2.0 * p.mu * ds_ / (p.rho * p.k_m) * quad(mass_bdm_, after.u_m.coeffs);
  sums.fracture_darcy += 2.0 * p.mu * ds_ / (p.rho * p.k_f) * quad(mass_bdm_, uf);
  sums.storage_m += quad(mass_p0_, after.phi_m.coeffs - before.phi_m.coeffs);
  sums.storage_f += quad(mass_p0_, after.phi_f.coeffs - before.phi_f.coeffs);
  sums.exchange += quad(mass_p0_, after.phi_m.coeffs - before.phi_f.coeffs) +
                   quad(mass_p0_, after.phi_f.coeffs - before.phi_m.coeffs);
}

EnergyComponents EnergyMonitor::components(const State& s) const {
  const auto& p = params_;
  const auto& e = s.energy;
  EnergyComponents c;
  c.conduit_kinetic = quad(mass_c_, s.u_c.coeffs);
  c.conduit_viscous = e.viscous;
  c.slip = e.slip;
  c.penalty_jump = e.penalty;
  c.fracture_interface = p.gamma * ds_ / p.rho * quad(normal_f_, s.u_f.coeffs);
  c.matrix_darcy = e.matrix_darcy;
  c.fracture_darcy = e.fracture_darcy;
  const double pm = quad(mass_p0_, s.phi_m.coeffs), pf = quad(mass_p0_, s.phi_f.coeffs);
  c.matrix_storage = p.eta_m * p.C_mt / p.rho * (pm + e.storage_m);
  c.fracture_storage = p.eta_f * p.C_ft / p.rho * (pf + e.storage_f);
  c.exchange = p.exchange() * ds_ / p.rho * (pm + pf + e.exchange);
  return c;
}

EnergyComponents energy_monitor(const EnergyMonitor& monitor, const State& state) {
  const auto c = monitor.components(state);
  if (!c.finite())
    throw NumericalFailure(fmt::format("energy monitor is not finite at step n = {}, k = {}",
                                       state.n, state.k));
  return c;
}

}  // namespace dpns
