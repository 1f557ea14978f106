#pragma once

// Fully implicit conduit step with the convection term (u . grad) u treated by
// Newton's method. Used as the reference against the characteristic scheme.

#include <stdexcept>
#include <vector>

#include "dpns/assembly.hpp"

namespace dpns {

struct NewtonOptions {
  double tolerance = 1e-8;  // on |F| / max(1, |b|), constrained rows excluded
  int max_iterations = 25;
};

class NewtonDiverged : public std::runtime_error {
 public:
  NewtonDiverged(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct NewtonResult {
  Vector solution;  // [u_x | u_y | p]
  int iterations = 0;  // residual evaluations, 1 when the initial guess already converges
  std::vector<double> residuals;
};

class NewtonNsSolver {
 public:
  explicit NewtonNsSolver(const NsAssembler& assembler) : ns_(&assembler) {}

  // Initial guess: u_old with boundary values imposed, pressure p_old.
  NewtonResult solve(const FieldHandle& u_old, const FieldHandle& p_old,
                     const FieldHandle& phi_f_lag, const FieldHandle& u_f_lag, double t_next,
                     const Problem& problem, const NewtonOptions& options) const;

 private:
  // Convection residual and its Jacobian at the velocity part of x.
  void convection(const Vector& x, Vector& residual, TripletBuilder& jacobian) const;

  const NsAssembler* ns_;
};

NewtonResult newton_ns_baseline_step(const FeSpaces& spaces, const FieldHandle& u_old,
                                     const FieldHandle& p_old, const FieldHandle& phi_f_lag,
                                     const FieldHandle& u_f_lag, double t_next, double dt,
                                     const Problem& problem, const NewtonOptions& options = {});

}  // namespace dpns
