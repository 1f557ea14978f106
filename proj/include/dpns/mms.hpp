#pragma once

// Problem data for the coupled solver: physical constants, forcing,
// initial values and boundary data. MmsProblem is the smooth manufactured
// solution on the stacked unit squares; WellboreScenario is the injection /
// production well configuration.

#include <optional>
#include <stdexcept>

#include "dpns/mesh.hpp"

namespace dpns {

class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhysParams {
  double nu = 1.0;     // kinematic viscosity
  double mu = 1.0;     // dynamic viscosity
  double rho = 1.0;
  double sigma = 1.0;  // shape factor of the exchange term
  double alpha = 1.0;  // Beavers-Joseph-Saffman constant
  double eta_f = 1.0, eta_m = 1.0;
  double C_ft = 1.0, C_mt = 1.0;
  double k_f = 1.0, k_m = 1.0;
  double gamma = 0.1;  // interface penalty, may be zero
  static constexpr int D = 2;

  void validate() const;

  // alpha nu sqrt(D) / sqrt(trace Pi) with Pi = k_f I.
  double bjs_coefficient() const;
  double exchange() const { return sigma * k_m / mu; }
};

enum class BoundaryField { Conduit, Fracture, Matrix };

// Extra interface data for configurations whose exact solution does not
// satisfy the homogeneous interface conditions. The conduit test function v
// receives  int_I g_tangential (v . tau) + g_normal (v . n_c).
struct InterfaceData {
  double tangential = 0.0;
  double normal = 0.0;
};

struct Forcing {
  Point f_c = Point::Zero();
  double f_d = 0.0;
  double f_m = 0.0;
};

class Problem {
 public:
  virtual ~Problem() = default;

  virtual const PhysParams& params() const = 0;

  virtual Point f_c(const Point&, double) const { return Point::Zero(); }
  virtual double f_d(const Point&, double) const { return 0.0; }
  virtual double f_m(const Point&, double) const { return 0.0; }

  virtual Point u_c_initial(const Point&) const { return Point::Zero(); }
  virtual double p_c_initial(const Point&) const { return 0.0; }
  virtual Point u_f_initial(const Point&) const { return Point::Zero(); }
  virtual double phi_f_initial(const Point&) const { return 0.0; }
  virtual Point u_m_initial(const Point&) const { return Point::Zero(); }
  virtual double phi_m_initial(const Point&) const { return 0.0; }

  // Dirichlet velocity on conduit boundary edges, or the velocity whose normal
  // moments are imposed on dual exterior edges. Interface and outflow labels
  // are never data boundaries and throw ProblemError.
  virtual Point boundary_velocity(BoundaryField field, const Point& x, double t,
                                  BoundaryLabel label, int segment) const;

  virtual std::optional<InterfaceData> interface_data(const Point&, double, const Point&,
                                                      const Point&) const {
    return std::nullopt;
  }
};

// Homogeneous data everywhere; the solution stays zero.
class ZeroProblem final : public Problem {
 public:
  explicit ZeroProblem(PhysParams p = {}) : params_(p) {}
  const PhysParams& params() const override { return params_; }

 private:
  PhysParams params_;
};

// Smooth exact solution on [0,1]x[0,2] with the interface at y = 1. All
// fields carry the time factor amplitude * cos(t).
class MmsProblem final : public Problem {
 public:
  explicit MmsProblem(PhysParams p = {}, double amplitude = 1.0);

  const PhysParams& params() const override { return params_; }
  double amplitude() const { return amplitude_; }

  Point u_c(const Point& x, double t) const;
  Eigen::Matrix2d grad_u_c(const Point& x, double t) const;  // (i, j) = d u_i / d x_j
  Point laplace_u_c(const Point& x, double t) const;
  double p_c(const Point& x, double t) const;
  Point grad_p_c(const Point& x, double t) const;
  double phi_f(const Point& x, double t) const;
  Point grad_phi_f(const Point& x, double t) const;
  double laplace_phi_f(const Point& x, double t) const;
  double phi_m(const Point& x, double t) const;
  Point grad_phi_m(const Point& x, double t) const;
  double laplace_phi_m(const Point& x, double t) const;
  Point u_f(const Point& x, double t) const;
  Point u_m(const Point& x, double t) const;

  Forcing forcing(const Point& x, double t) const;
  Point f_c(const Point& x, double t) const override;
  double f_d(const Point& x, double t) const override;
  double f_m(const Point& x, double t) const override;

  Point u_c_initial(const Point& x) const override { return u_c(x, 0.0); }
  double p_c_initial(const Point& x) const override { return p_c(x, 0.0); }
  Point u_f_initial(const Point& x) const override { return u_f(x, 0.0); }
  double phi_f_initial(const Point& x) const override { return phi_f(x, 0.0); }
  Point u_m_initial(const Point& x) const override { return u_m(x, 0.0); }
  double phi_m_initial(const Point& x) const override { return phi_m(x, 0.0); }

  Point boundary_velocity(BoundaryField field, const Point& x, double t, BoundaryLabel label,
                          int segment) const override;

  // The exact velocity slips along the interface with zero shear, so the
  // slip law needs a source term for the manufactured solution to be exact.
  std::optional<InterfaceData> interface_data(const Point& x, double t, const Point& n_c,
                                              const Point& tau) const override;

 private:
  double time_factor(double t) const;

  PhysParams params_;
  double amplitude_;
};

struct WellboreSettings {
  double theta = 0.001;       // matrix boundary velocity magnitude
  double fracture_speed = 0.5;
  double final_time = 5.0;
  double dt = 0.01;
  double h = 1.0 / 32.0;
  Example2Geometry geometry{};
};

PhysParams wellbore_params();

class WellboreScenario final : public Problem {
 public:
  explicit WellboreScenario(WellboreSettings s = {}, PhysParams p = wellbore_params());

  const PhysParams& params() const override { return params_; }
  const WellboreSettings& settings() const { return settings_; }

  // (0, -64 x (0.25 - x)) across the injection well mouth.
  Point inflow(const Point& x) const;

  Point boundary_velocity(BoundaryField field, const Point& x, double t, BoundaryLabel label,
                          int segment) const override;

 private:
  WellboreSettings settings_;
  PhysParams params_;
};

}  // namespace dpns
