#pragma once

// Mutable solution state carried through the time loop.

#include "dpns/fespace.hpp"

namespace dpns {

// Accumulated pieces of the discrete energy bound; see EnergyMonitor.
struct EnergySums {
  double viscous = 0.0;         // dt nu sum |grad u_c|^2
  double slip = 0.0;            // 2 kappa dt sum |u_c . tau|^2 on the interface
  double pending_normal = 0.0;  // sum over the open macro step of |u_c . n|^2_{1/h}
  double penalty = 0.0;         // gamma dt/(2 rho) sum |(u_c - u_f) . n|^2_{1/h}
  double matrix_darcy = 0.0;    // 2 mu ds/(rho k_m) sum |u_m|^2
  double fracture_darcy = 0.0;  // 2 mu ds/(rho k_f) sum |u_f|^2
  double storage_m = 0.0;       // sum |phi_m^{k+1} - phi_m^k|^2
  double storage_f = 0.0;
  double exchange = 0.0;        // sum |phi_m^{k+1} - phi_f^k|^2 + |phi_f^{k+1} - phi_m^k|^2
};

struct PhaseTimes {
  double trace = 0.0;
  double assembly = 0.0;
  double solve = 0.0;
  double setup = 0.0;  // matrix assembly and factorization before the first step
  double total = 0.0;

  PhaseTimes& operator+=(const PhaseTimes& o) {
    trace += o.trace;
    assembly += o.assembly;
    solve += o.solve;
    setup += o.setup;
    total += o.total;
    return *this;
  }
};

struct State {
  FieldHandle u_c, p_c;             // conduit, time t_n
  FieldHandle u_f, phi_f, u_m, phi_m;  // dual porosity, time t_{n_k}
  Vector s_sum;                     // running sum of conduit velocities in the open macro step
  int s_count = 0;
  int n = 0;  // conduit step index
  int k = 0;  // porous step index
  long clamped_total = 0;
  EnergySums energy;
};

}  // namespace dpns
