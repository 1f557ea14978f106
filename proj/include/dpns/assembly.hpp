#pragma once

// Linear systems of the three decoupled subproblems.
//
//   Step 1, conduit (MINI, unknowns [u_x | u_y | p]):
//     (u/dt, v) + nu (grad u, grad v) + kappa <u.tau, v.tau> + g/h <u.n, v.n>
//       - (p, div v) + (q, div u)
//     = (f_c + u_hat/dt, v) + 1/rho <phi_f, v.n> + g/h <u_f.n, v.n>
//   Step 2/3, matrix and fracture (BDM1 x P0, unknowns [u | phi]):
//     mu/(rho k) (u, v) - 1/rho (phi, div v) + 1/rho (div u, psi)
//       + (eta C/(rho ds) + sigma k_m/(rho mu)) (phi, psi) = ...
//
// with kappa the slip coefficient, g = gamma/rho, h the interface edge length
// and n = n_d. Left-hand sides do not change in time, so each assembler builds
// its matrix once and produces right-hand sides and boundary values per step.

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpns/fespace.hpp"
#include "dpns/linalg.hpp"
#include "dpns/mms.hpp"
#include "dpns/quadrature.hpp"

namespace dpns {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepSystem {
  SparseMatrix matrix;
  Vector rhs;
  int velocity_dofs = 0;  // unknowns [0, velocity_dofs) are velocity, the rest pressure
  int pressure_dofs = 0;
};

using Constraints = std::vector<std::pair<int, double>>;

// Symmetric elimination of essential dofs: constrained rows and columns are
// replaced by the identity and the removed column contributions are moved to
// the right-hand side. The reduced matrix is built once and reused.
class DirichletEliminator {
 public:
  DirichletEliminator(const SparseMatrix& A, std::vector<int> dofs);

  const SparseMatrix& reduced() const { return reduced_; }
  const std::vector<int>& dofs() const { return dofs_; }
  // values[i] belongs to dofs()[i].
  void apply(Vector& rhs, const Vector& values) const;

 private:
  std::vector<int> dofs_;
  SparseMatrix coupling_;  // A restricted to the constrained columns
  SparseMatrix reduced_;
};

// Rejects out-of-range dofs and conflicting duplicates.
StepSystem apply_dirichlet(const StepSystem& system, const Constraints& constraints);

struct TraceStats {
  long traced = 0;
  long clamped = 0;
};

class NsAssembler {
 public:
  NsAssembler(const FeSpaces& spaces, const PhysParams& params, double dt,
              bool pin_pressure = false);

  const FeSpaces& spaces() const { return *spaces_; }
  const PhysParams& params() const { return params_; }
  double dt() const { return dt_; }
  int size() const { return 2 * n_scalar_ + n_pressure_; }
  int velocity_dofs() const { return 2 * n_scalar_; }

  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<int>& constrained_dofs() const { return constrained_; }
  Vector constraint_values(const Problem& problem, double t) const;

  // Values of u_old at the backtracked feet of all volume quadrature points
  // (conduit triangle order, then quadrature order).
  std::vector<Point> trace(const FieldHandle& u_old, TraceStats* stats = nullptr) const;
  // Same layout, without backtracking (implicit treatment of the convection).
  std::vector<Point> sample(const FieldHandle& u_old) const;

  // (f_c(t_next) + transported/dt, v) plus the lagged interface terms.
  Vector rhs(std::span<const Point> transported, const FieldHandle& phi_f_lag,
             const FieldHandle& u_f_lag, double t_next, const Problem& problem) const;

  // Volume rule used for trace()/sample() and all element integrals.
  static const QuadratureRule& rule();

 private:
  struct DirichletPoint {
    int vertex;
    BoundaryLabel label;
    int segment;
  };

  void build_matrix();

  const FeSpaces* spaces_;
  PhysParams params_;
  double dt_;
  int n_scalar_ = 0;
  int n_pressure_ = 0;
  SparseMatrix matrix_;
  std::vector<int> constrained_;  // x components, then y components, then the optional pin
  std::vector<DirichletPoint> dirichlet_points_;
  bool pin_pressure_;
};

enum class Continuum { Fracture, Matrix };

class DarcyAssembler {
 public:
  DarcyAssembler(const FeSpaces& spaces, const PhysParams& params, double ds, Continuum which);

  Continuum continuum() const { return which_; }
  int size() const { return n_velocity_ + n_pressure_; }
  int velocity_dofs() const { return n_velocity_; }

  const SparseMatrix& matrix() const { return matrix_; }
  const std::vector<int>& constrained_dofs() const { return constrained_; }
  Vector constraint_values(const Problem& problem, double t) const;

  // phi_old: this continuum's pressure at t_next - ds; phi_other: the other
  // continuum's pressure at the same time; s_avg: averaged conduit velocity
  // labelled t_next (fracture only, ignored for the matrix).
  Vector rhs(const FieldHandle& phi_old, const FieldHandle& phi_other, const FieldHandle* s_avg,
             double t_next, const Problem& problem) const;

 private:
  void build_matrix();

  const FeSpaces* spaces_;
  PhysParams params_;
  double ds_;
  Continuum which_;
  int n_velocity_ = 0;
  int n_pressure_ = 0;
  SparseMatrix matrix_;
  std::vector<int> constrained_;  // two moments per constrained edge
  std::vector<int> constrained_edges_;
};

// One-shot helpers returning the constrained system of a single step.
StepSystem assemble_ns_step(const FeSpaces& spaces, const FieldHandle& u_c_old,
                            const FieldHandle& phi_f_lag, const FieldHandle& u_f_lag,
                            double t_next, double dt, const Problem& problem,
                            TraceStats* stats = nullptr);
StepSystem assemble_matrix_darcy_step(const FeSpaces& spaces, const FieldHandle& phi_m_old,
                                      const FieldHandle& phi_f_lag, double t_next, double ds,
                                      const Problem& problem);
StepSystem assemble_fracture_darcy_step(const FeSpaces& spaces, const FieldHandle& phi_f_old,
                                        const FieldHandle& phi_m_lag, const FieldHandle& s_avg,
                                        double t_next, double ds, const Problem& problem);

}  // namespace dpns
