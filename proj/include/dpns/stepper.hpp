#pragma once

// Multirate time loop. Each macro step k -> k+1 runs r conduit substeps of
// size dt and one matrix step of size ds = r dt (independent of each other,
// optionally on two workers), then the fracture step driven by the average
// of the r conduit velocities.

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "dpns/assembly.hpp"
#include "dpns/newton.hpp"
#include "dpns/postprocess.hpp"
#include "dpns/state.hpp"

namespace dpns {

class TimeGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nested grids: N = r M conduit steps, M porous steps. Times are computed
// from integer indices, so t_conduit(r k) == t_dual(k) exactly.
struct TimeGrid {
  double T = 0.5;
  int N = 1;
  int M = 1;
  int r = 1;

  // M = 0 is a valid empty run; the step sizes are then infinite.
  double dt() const { return T / N; }
  double ds() const { return T / M; }
  double t_conduit(int n) const { return T * n / N; }
  double t_dual(int k) const { return t_conduit(k * r); }

  void validate() const;

  // M = max(1, round(T / (r dt))), N = r M.
  static TimeGrid from_dt(double T, double dt, int r);
  // r = ds / dt, which must be an integer.
  static TimeGrid from_steps(double T, double dt, double ds);
};

enum class NsTreatment { Characteristic, Newton };

struct StepperOptions {
  int workers = 1;  // 2 runs the matrix step concurrently with the conduit substeps
  NsTreatment ns = NsTreatment::Characteristic;
  NewtonOptions newton{};
  bool monitor_energy = true;
  bool pin_pressure = false;
  int log_every = 0;  // progress line on stderr every this many macro steps, 0 = silent
};

struct MacroDiagnostics {
  int k = 0;
  double t = 0.0;
  PhaseTimes phases;
  EnergyComponents energy;
  long clamped = 0;
  int newton_iterations = 0;
};

struct RunResult {
  State state;
  std::vector<MacroDiagnostics> history;
  PhaseTimes phases;
  double wall_seconds = 0.0;  // setup plus all macro steps, callbacks excluded
};

using MacroCallback = std::function<void(const State&, const MacroDiagnostics&)>;

class Stepper {
 public:
  Stepper(const Problem& problem, const TimeGrid& grid, const FeSpaces& spaces,
          StepperOptions options = {});
  ~Stepper();

  const TimeGrid& grid() const { return grid_; }
  double setup_seconds() const { return setup_seconds_; }

  State initial_state() const;
  MacroDiagnostics advance(State& state) const;
  RunResult run(const MacroCallback& callback = {}) const;

 private:
  struct Solvers;

  const Problem* problem_;
  TimeGrid grid_;
  const FeSpaces* spaces_;
  StepperOptions options_;
  std::unique_ptr<Solvers> solvers_;
  double setup_seconds_ = 0.0;
};

State init_state(const Problem& problem, const FeSpaces& spaces);

// Convenience wrappers around a Stepper built for a single call.
RunResult run(const Problem& problem, const TimeGrid& grid, const FeSpaces& spaces,
              const StepperOptions& options = {}, const MacroCallback& callback = {});

}  // namespace dpns
