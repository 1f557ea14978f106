#include "dpns/newton.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace dpns {

void NewtonNsSolver::convection(const Vector& x, Vector& residual, TripletBuilder& jac) const {
  const FeSpaces& sp = ns_->spaces();
  const Mesh& mesh = sp.mesh();
  const auto& q = NsAssembler::rule();
  const int ns = sp.dofs().mini_scalar_count();
  for (int t : mesh.triangles_in(Subdomain::Conduit)) {
    const double area2 = 2.0 * mesh.area(t);
    const auto d = sp.mini_scalar_dofs(t);
    double local_j[2][2][4][4] = {};
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto basis = sp.eval_mini_basis(t, q.points[k]);
      Point u = Point::Zero();
      Eigen::Matrix2d g = Eigen::Matrix2d::Zero();  // g(a, b) = d u_a / d x_b
      for (int i = 0; i < 4; ++i) {
        const Point c(x[d[i]], x[ns + d[i]]);
        u += c * basis.velocity[i];
        g += c * basis.velocity_grad[i].transpose();
      }
      const double w = q.weights[k] * area2;
      const Point conv = g * u;
      std::array<double, 4> adv{};
      for (int j = 0; j < 4; ++j) adv[j] = u.dot(basis.velocity_grad[j]);
      for (int i = 0; i < 4; ++i) {
        const double wi = w * basis.velocity[i];
        residual[d[i]] += wi * conv.x();
        residual[ns + d[i]] += wi * conv.y();
        for (int j = 0; j < 4; ++j)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              local_j[a][b][i][j] +=
                  wi * (basis.velocity[j] * g(a, b) + (a == b ? adv[j] : 0.0));
      }
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) jac.add(a * ns + d[i], b * ns + d[j], local_j[a][b][i][j]);
  }
}

NewtonResult NewtonNsSolver::solve(const FieldHandle& u_old, const FieldHandle& p_old,
                                   const FieldHandle& phi_f_lag, const FieldHandle& u_f_lag,
                                   double t_next, const Problem& problem,
                                   const NewtonOptions& options) const {
  if (!(options.tolerance > 0.0) || options.max_iterations < 1)
    throw std::invalid_argument("Newton needs tolerance > 0 and at least one iteration");
  const int n = ns_->size();
  const int nu = ns_->velocity_dofs();
  const auto& dofs = ns_->constrained_dofs();

  const auto sampled = ns_->sample(u_old);
  Vector b = ns_->rhs(sampled, phi_f_lag, u_f_lag, t_next, problem);
  const Vector values = ns_->constraint_values(problem, t_next);

  Vector x(n);
  x.head(nu) = u_old.coeffs;
  x.tail(n - nu) = p_old.coeffs;
  for (std::size_t i = 0; i < dofs.size(); ++i) x[dofs[i]] = values[static_cast<Eigen::Index>(i)];
  for (int d : dofs) b[d] = 0.0;
  const double scale = std::max(1.0, b.norm());

  NewtonResult result;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector F = ns_->matrix() * x - b;
    TripletBuilder jb(n, n);
    convection(x, F, jb);
    for (int d : dofs) F[d] = 0.0;
    const double res = F.norm() / scale;
    result.residuals.push_back(res);
    if (!std::isfinite(res)) break;
    if (res <= options.tolerance) {
      result.solution = std::move(x);
      result.iterations = it;
      return result;
    }
    if (it == options.max_iterations) break;
    const SparseMatrix J(SparseMatrix::Storage(ns_->matrix().eigen() + compress(jb).eigen()));
    const DirichletEliminator elim(J, dofs);
    Vector rhs = -F;
    elim.apply(rhs, Vector::Zero(static_cast<Eigen::Index>(dofs.size())));
    x += LuSolver(elim.reduced()).solve(rhs);
  }
  throw NewtonDiverged(fmt::format("Newton did not reach {:.1e} in {} iterations (last {:.3e})",
                                   options.tolerance, options.max_iterations,
                                   result.residuals.empty() ? 0.0 : result.residuals.back()),
                       result.residuals);
}

NewtonResult newton_ns_baseline_step(const FeSpaces& spaces, const FieldHandle& u_old,
                                     const FieldHandle& p_old, const FieldHandle& phi_f_lag,
                                     const FieldHandle& u_f_lag, double t_next, double dt,
                                     const Problem& problem, const NewtonOptions& options) {
  const NsAssembler ns(spaces, problem.params(), dt);
  return NewtonNsSolver(ns).solve(u_old, p_old, phi_f_lag, u_f_lag, t_next, problem, options);
}

}  // namespace dpns
