// Command line front end: one subcommand per experiment.
//
//   dpns converge --h 4,8,16,32 --r 2
//   dpns ratio-sweep --h 8
//   dpns wellbore --theta 0.05 --out runs/theta05
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 1 other.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dpns/experiments.hpp"

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kNumerical = 3 };

struct Overrides {
  std::string h, ratios, gammas;
  std::optional<int> r, workers, repeats, vtk_every, log_every;
  std::optional<double> gamma, theta, final_time, dt, ds;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--h", o.h, "mesh subdivisions, comma separated (h = 1/n)");
  sub->add_option("--r", o.r, "time step ratio ds / dt");
  sub->add_option("--gamma", o.gamma, "interface penalty");
  sub->add_option("--workers", o.workers, "1 or 2");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--theta", o.theta, "wellbore matrix boundary speed");
  sub->add_option("--final-time", o.final_time, "final time");
  sub->add_option("--dt", o.dt, "conduit time step");
  sub->add_option("--ds", o.ds, "porous time step (must be an integer multiple of dt)");
  sub->add_option("--repeats", o.repeats, "timing repetitions");
  sub->add_option("--vtk-every", o.vtk_every, "macro steps between VTK frames");
  sub->add_option("--log-every", o.log_every, "progress line every n macro steps");
  sub->add_option("--ratios", o.ratios, "ratio-sweep values");
  sub->add_option("--gammas", o.gammas, "penalty-sweep values");
}

void apply(dpns::RunConfig& c, const Overrides& o) {
  if (!o.h.empty()) c.h = dpns::parse_int_list(o.h);
  if (!o.ratios.empty()) c.ratios = dpns::parse_int_list(o.ratios);
  if (!o.gammas.empty()) c.gammas = dpns::parse_double_list(o.gammas);
  if (o.r) c.r = *o.r;
  if (o.workers) c.workers = *o.workers;
  if (o.repeats) c.repeats = *o.repeats;
  if (o.vtk_every) c.vtk_every = *o.vtk_every;
  if (o.log_every) c.log_every = *o.log_every;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.theta) c.theta = *o.theta;
  if (o.final_time) c.final_time = *o.final_time;
  if (o.dt) c.dt = *o.dt;
  if (o.ds) c.ds = *o.ds;
  if (o.out) c.out = *o.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multirate dual-porosity / Navier-Stokes solver"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  std::string config_path;
  bool dump = false;
  app.add_option("--config", config_path, "INI file with [run], [physics], [solver] sections");
  app.add_flag("--print-config", dump, "print the effective configuration and exit");

  Overrides o;
  const char* names[] = {"converge", "ratio-sweep", "penalty-sweep", "compare-newton", "wellbore"};
  for (const char* name : names) add_common(app.add_subcommand(name), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    dpns::RunConfig config;
    if (!config_path.empty()) config = dpns::load_config(config_path);
    config.experiment = app.get_subcommands().front()->get_name();
    apply(config, o);
    if (const char* env = std::getenv("DPNS_OUT_DIR"); env && *env) config.out = env;
    dpns::validate(config);
    if (dump) {
      std::cout << dpns::serialize_config(config);
      return kOk;
    }
    std::cout << dpns::run_experiment(config) << std::flush;
    return kOk;
  } catch (const dpns::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfig;
  } catch (const dpns::TimeGridError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfig;
  } catch (const dpns::SolveFailed& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const dpns::NumericalFailure& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const dpns::NewtonDiverged& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kOther;
  }
}
