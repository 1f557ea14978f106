#pragma once

// Run configuration shared by the command line tool and the experiment
// drivers. Text form is INI with [run], [physics] and [solver] sections.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpns {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  // [run]
  std::string experiment = "converge";
  std::vector<int> h;            // mesh subdivisions n (h = 1/n); empty = experiment default
  int r = 1;
  std::vector<int> ratios;       // ratio-sweep; empty = 1,2,4,8
  int workers = 1;
  std::string out = "out";
  double final_time = 0.0;       // 0 = experiment default
  double dt = 0.0;               // 0 = experiment default (h^2 for the convergence runs)
  double ds = 0.0;               // > 0 fixes r = ds / dt, which must be an integer
  int repeats = 1;               // timing repetitions, the minimum is reported
  int vtk_every = 50;            // wellbore: macro steps between VTK frames

  // [physics]
  double gamma = 0.1;
  std::vector<double> gammas;    // penalty-sweep; empty = 0,1e-4,1e-3,1e-2,1
  double theta = 0.001;

  // [solver]
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  bool pin_pressure = false;
  bool monitor_energy = true;
  int log_every = 0;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

// Range and consistency checks; throws ConfigError.
void validate(const RunConfig& config);

// "4,8,16" -> {4, 8, 16}.
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

}  // namespace dpns
