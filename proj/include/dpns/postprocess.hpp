#pragma once

// Error norms, convergence tables, the discrete energy monitor and VTK output.

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpns/fespace.hpp"
#include "dpns/mms.hpp"
#include "dpns/state.hpp"

namespace dpns {

class PostprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a monitored quantity turns NaN or infinite.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ErrorField { UcL2, UcH1, PcL2, UfL2, UmL2, PhiFL2, PhiML2 };
inline constexpr std::array<ErrorField, 7> kErrorFields{
    ErrorField::UcL2, ErrorField::UcH1, ErrorField::PcL2, ErrorField::UfL2,
    ErrorField::UmL2, ErrorField::PhiFL2, ErrorField::PhiML2};
std::string_view to_string(ErrorField f);

struct ErrorReport {
  double h = 0.0;
  double dt = 0.0;
  int r = 1;
  double t = 0.0;
  std::array<double, 7> absolute{};  // indexed by ErrorField
  std::array<double, 7> relative{};  // divided by the norm of the exact field
  PhaseTimes phases;
  double wall_seconds = 0.0;

  double operator[](ErrorField f) const { return absolute[static_cast<int>(f)]; }
  double rel(ErrorField f) const { return relative[static_cast<int>(f)]; }
};

// Errors of all six fields against the manufactured solution at time t. The
// conduit fields must be labelled t and so must the porous fields.
ErrorReport compute_errors(const FeSpaces& spaces, const State& state, const MmsProblem& problem,
                           double t);

// Componentwise maximum (used for max-over-time tracking).
void accumulate_max(ErrorReport& into, const ErrorReport& sample);

struct RateRow {
  double h;
  double error;
  std::optional<double> rate;  // empty on the first row
};

struct RateTable {
  std::vector<ErrorField> fields;
  std::vector<std::vector<RateRow>> rows;  // rows[field index][h index]

  const std::vector<RateRow>& column(ErrorField f) const;
  void write_csv(std::ostream& os) const;
};

// Reports sorted by decreasing h, each h half of its predecessor.
RateTable make_rate_table(const std::vector<ErrorReport>& runs);

// Legacy ASCII VTK: conduit velocity/pressure at the vertices, porous fields
// per cell. Output bytes depend only on the state.
void export_vtk(const FeSpaces& spaces, const State& state, const std::string& path);

struct EnergyComponents {
  double conduit_kinetic = 0.0;
  double conduit_viscous = 0.0;
  double slip = 0.0;
  double penalty_jump = 0.0;
  double fracture_interface = 0.0;
  double matrix_darcy = 0.0;
  double fracture_darcy = 0.0;
  double matrix_storage = 0.0;
  double fracture_storage = 0.0;
  double exchange = 0.0;

  double total() const;
  bool finite() const;
};

// Quadratic forms of the stability estimate, evaluated through precomputed
// Gram matrices so that monitoring costs a few sparse products per step.
class EnergyMonitor {
 public:
  EnergyMonitor(const FeSpaces& spaces, const PhysParams& params, double dt, double ds, int r);

  void add_substep(EnergySums& sums, const Vector& u_c) const;
  // Closes a macro step: `before`/`after` are the porous fields at k and k+1,
  // s_sum the sum of the r conduit velocities of the step.
  void add_macro_step(EnergySums& sums, const State& before, const State& after,
                      const Vector& s_sum) const;
  EnergyComponents components(const State& state) const;

 private:
  double quad(const SparseMatrix& m, const Vector& x) const;

  PhysParams params_;
  double dt_, ds_;
  int r_;
  SparseMatrix mass_c_, stiff_c_, tangent_c_, normal_c_, normal_f_, cross_cf_, mass_bdm_, mass_p0_;
};

// Throws NumericalFailure if any component is NaN or infinite.
EnergyComponents energy_monitor(const EnergyMonitor& monitor, const State& state);

}  // namespace dpns
