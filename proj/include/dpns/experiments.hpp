#pragma once

// Experiment drivers behind the command line subcommands. Each cmd_* writes
// its CSV/VTK output into config.out and returns a short text summary.

#include <string>
#include <vector>

#include "dpns/config.hpp"
#include "dpns/stepper.hpp"

namespace dpns {

inline constexpr double kMmsFinalTime = 0.5;

// One manufactured-solution run on the stacked unit squares.
struct CaseSpec {
  int n = 4;                 // h = 1/n
  int r = 1;
  double gamma = 0.1;
  double dt = 0.0;           // 0 = h^2
  double final_time = kMmsFinalTime;
  int workers = 1;
  NsTreatment ns = NsTreatment::Characteristic;
  NewtonOptions newton{};
  bool track_max = false;    // errors after every macro step (costs time)
  bool monitor_energy = false;
  bool pin_pressure = false;
  int log_every = 0;
};

struct CaseResult {
  ErrorReport final_errors;  // h is the nominal 1/n
  ErrorReport max_errors;    // max over macro steps when tracked, else final
  RunResult run;
  int newton_iterations = 0;
};

TimeGrid mms_time_grid(const CaseSpec& spec);
CaseResult run_mms_case(const CaseSpec& spec);

// Convergence tables over a halving h sequence at fixed r and gamma.
struct ConvergenceResult {
  std::vector<CaseResult> cases;
  RateTable final_table;
  RateTable max_table;
};
ConvergenceResult run_convergence(const std::vector<int>& ns, const CaseSpec& base);

// Wellbore flux through the well mouths; the sign uses the outward conduit
// normal, so injection is negative and production positive.
struct WellFlux {
  double t = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
};
WellFlux well_flux(const FeSpaces& spaces, const State& state);

struct WellboreResult {
  std::vector<WellFlux> flux;  // one entry per macro step
  std::vector<std::string> frames;
  RunResult run;
};
WellboreResult run_wellbore(const WellboreSettings& settings, int r, int workers,
                            const std::string& out_dir, int vtk_every, int log_every = 0);

std::string cmd_converge(const RunConfig& config);
std::string cmd_ratio_sweep(const RunConfig& config);
std::string cmd_penalty_sweep(const RunConfig& config);
std::string cmd_compare_newton(const RunConfig& config);
std::string cmd_wellbore(const RunConfig& config);

// Dispatches on config.experiment.
std::string run_experiment(const RunConfig& config);

}  // namespace dpns
