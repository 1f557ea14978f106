#include "dpns/experiments.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dpns/quadrature.hpp"

namespace dpns {

namespace fs = std::filesystem;

namespace {

const std::vector<int> kDefaultConvergeH = {4, 8, 16, 32};
const std::vector<int> kDefaultRatios = {1, 2, 4, 8};
const std::vector<double> kDefaultGammas = {0.0, 1e-4, 1e-3, 1e-2, 1.0};

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const auto path = fs::path(dir) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return f;
}

CaseSpec base_case(const RunConfig& c) {
  CaseSpec s;
  s.r = c.r;
  s.gamma = c.gamma;
  s.dt = c.dt;
  s.final_time = c.final_time > 0.0 ? c.final_time : kMmsFinalTime;
  s.workers = c.workers;
  s.newton = {c.newton_tol, c.newton_max_iter};
  s.monitor_energy = c.monitor_energy;
  s.pin_pressure = c.pin_pressure;
  s.log_every = c.log_every;
  return s;
}

// ds in the configuration overrides r; it must be an integer multiple of dt.
int resolve_ratio(const RunConfig& c, double dt) {
  if (c.ds <= 0.0) return c.r;
  const double T = c.final_time > 0.0 ? c.final_time : kMmsFinalTime;
  return TimeGrid::from_steps(T, dt, c.ds).r;
}

std::string fmt_errors(const ErrorReport& e) {
  std::string s;
  for (ErrorField f : kErrorFields) s += fmt::format(" {}={:.6e}", to_string(f), e[f]);
  return s;
}

}  // namespace

TimeGrid mms_time_grid(const CaseSpec& spec) {
  if (spec.n < 1) throw ConfigError(fmt::format("h = 1/{} is not a valid mesh size", spec.n));
  const double h = 1.0 / spec.n;
  const double dt = spec.dt > 0.0 ? spec.dt : h * h;
  return TimeGrid::from_dt(spec.final_time, dt, spec.r);
}

CaseResult run_mms_case(const CaseSpec& spec) {
  const TimeGrid grid = mms_time_grid(spec);
  PhysParams params;
  params.gamma = spec.gamma;
  const MmsProblem problem(params);
  const Mesh mesh = build_structured_rect_mesh(spec.n);
  const FeSpaces spaces(mesh);

  StepperOptions opt;
  opt.workers = spec.workers;
  opt.ns = spec.ns;
  opt.newton = spec.newton;
  opt.monitor_energy = spec.monitor_energy;
  opt.pin_pressure = spec.pin_pressure;
  opt.log_every = spec.log_every;

  CaseResult result;
  bool have_max = false;
  MacroCallback track;
  if (spec.track_max) {
    track = [&](const State& s, const MacroDiagnostics& d) {
      const ErrorReport e = compute_errors(spaces, s, problem, d.t);
      if (!have_max) {
        result.max_errors = e;
        have_max = true;
      } else {
        accumulate_max(result.max_errors, e);
      }
    };
  }
  const Stepper stepper(problem, grid, spaces, opt);
  result.run = stepper.run(track);
  for (const auto& d : result.run.history) result.newton_iterations += d.newton_iterations;

  auto& fe = result.final_errors;
  fe = compute_errors(spaces, result.run.state, problem, grid.T);
  fe.h = 1.0 / spec.n;
  fe.dt = grid.dt();
  fe.r = grid.r;
  fe.phases = result.run.phases;
  fe.wall_seconds = result.run.wall_seconds;
  if (!have_max) result.max_errors = fe;
  result.max_errors.h = fe.h;
  result.max_errors.dt = fe.dt;
  result.max_errors.r = fe.r;
  result.max_errors.t = fe.t;
  return result;
}

ConvergenceResult run_convergence(const std::vector<int>& ns, const CaseSpec& base) {
  ConvergenceResult out;
  std::vector<ErrorReport> finals, maxes;
  for (int n : ns) {
    CaseSpec spec = base;
    spec.n = n;
    out.cases.push_back(run_mms_case(spec));
    finals.push_back(out.cases.back().final_errors);
    maxes.push_back(out.cases.back().max_errors);
  }
  out.final_table = make_rate_table(finals);
  out.max_table = make_rate_table(maxes);
  return out;
}

WellFlux well_flux(const FeSpaces& spaces, const State& state) {
  const Mesh& mesh = spaces.mesh();
  const auto& q = make_line_quadrature(kEdgeDegree);
  WellFlux flux;
  flux.t = state.u_c.time;
  for (const auto& e : mesh.edges()) {
    if (e.label != BoundaryLabel::ConduitInflow && e.label != BoundaryLabel::ConduitOutflow) continue;
    const int t = e.triangles[0];
    const Point a = mesh.vertex(e.vertices[0]);
    const Point b = mesh.vertex(e.vertices[1]);
    Point n = e.normal;
    if (n.dot(0.5 * (a + b) - mesh.centroid(t)) < 0.0) n = -n;
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Point x = a + q.points[k] * (b - a);
      sum += q.weights[k] * eval_mini_vector(spaces, state.u_c.coeffs, t, mesh.barycentric(t, x)).dot(n);
    }
    (e.label == BoundaryLabel::ConduitInflow ? flux.inflow : flux.outflow) += sum * e.length;
  }
  return flux;
}

WellboreResult run_wellbore(const WellboreSettings& settings, int r, int workers,
                            const std::string& out_dir, int vtk_every, int log_every) {
  const WellboreScenario problem(settings);
  const Mesh mesh = build_wellbore_mesh(settings.h, settings.geometry);
  const FeSpaces spaces(mesh);
  const TimeGrid grid = TimeGrid::from_dt(settings.final_time, settings.dt, r);
  StepperOptions opt;
  opt.workers = workers;
  opt.log_every = log_every;
  opt.monitor_energy = true;

  fs::create_directories(out_dir);
  WellboreResult result;
  auto frame = [&](const State& s, int k) {
    const std::string name = fmt::format("wellbore_{:05d}.vtk", k);
    export_vtk(spaces, s, (fs::path(out_dir) / name).string());
    result.frames.push_back(name);
  };
  const Stepper stepper(problem, grid, spaces, opt);
  {
    const State s0 = stepper.initial_state();
    frame(s0, 0);
  }
  result.run = stepper.run([&](const State& s, const MacroDiagnostics& d) {
    result.flux.push_back(well_flux(spaces, s));
    if (d.k % vtk_every == 0 || d.k == grid.M) frame(s, d.k);
  });

  auto csv = open_output(out_dir, "wellbore_flux.csv");
  csv << "t,inflow,outflow\n";
  for (const auto& f : result.flux) csv << fmt::format("{:.6f},{:.9e},{:.9e}\n", f.t, f.inflow, f.outflow);
  return result;
}

std::string cmd_converge(const RunConfig& c) {
  const auto ns = c.h.empty() ? kDefaultConvergeH : c.h;
  CaseSpec base = base_case(c);
  base.track_max = true;
  base.r = resolve_ratio(c, c.dt > 0.0 ? c.dt : 1.0 / (ns.front() * ns.front()));
  const auto res = run_convergence(ns, base);
  const std::string stem = fmt::format("converge_r{}", base.r);
  {
    auto f = open_output(c.out, stem + ".csv");
    res.final_table.write_csv(f);
  }
  {
    auto f = open_output(c.out, stem + "_max.csv");
    res.max_table.write_csv(f);
  }
  std::string summary = fmt::format("converge r={} gamma={}\n", base.r, base.gamma);
  for (ErrorField fld : kErrorFields) {
    const auto& col = res.final_table.column(fld);
    summary += fmt::format("  {:<9}", to_string(fld));
    for (const auto& row : col)
      summary += row.rate ? fmt::format(" {:.3e} ({:.2f})", row.error, *row.rate)
                          : fmt::format(" {:.3e}", row.error);
    summary += '\n';
  }
  return summary;
}

std::string cmd_ratio_sweep(const RunConfig& c) {
  const std::vector<int> ns = c.h.empty() ? std::vector<int>{8, 16} : c.h;
  const auto ratios = c.ratios.empty() ? kDefaultRatios : c.ratios;
  auto f = open_output(c.out, "ratio_sweep.csv");
  f << "h,r,field,error,wall_seconds\n";
  std::string summary = "ratio-sweep\n";
  for (int n : ns) {
    for (int r : ratios) {
      CaseSpec spec = base_case(c);
      spec.n = n;
      spec.r = r;
      double best = std::numeric_limits<double>::infinity();
      CaseResult res;
      for (int rep = 0; rep < c.repeats; ++rep) {
        res = run_mms_case(spec);
        best = std::min(best, res.run.wall_seconds);
      }
      for (ErrorField fld : kErrorFields)
        f << fmt::format("{},{},{},{:.9e},{:.6f}\n", 1.0 / n, r, to_string(fld),
                         res.final_errors[fld], best);
      summary += fmt::format("  h=1/{} r={} wall={:.3f}s{}\n", n, r, best, fmt_errors(res.final_errors));
    }
  }
  return summary;
}

std::string cmd_penalty_sweep(const RunConfig& c) {
  const auto ns = c.h.empty() ? kDefaultConvergeH : c.h;
  const auto gammas = c.gammas.empty() ? kDefaultGammas : c.gammas;
  auto f = open_output(c.out, "penalty_sweep.csv");
  f << "gamma,h,field,error,rate\n";
  std::string summary = "penalty-sweep\n";
  for (double g : gammas) {
    CaseSpec base = base_case(c);
    base.gamma = g;
    const auto res = run_convergence(ns, base);
    for (ErrorField fld : kErrorFields)
      for (const auto& row : res.final_table.column(fld))
        f << fmt::format("{},{},{},{:.9e},{}\n", g, row.h, to_string(fld), row.error,
                         row.rate ? fmt::format("{:.4f}", *row.rate) : std::string("--"));
    summary += fmt::format("  gamma={}", g);
    for (ErrorField fld : kErrorFields) {
      const auto& last = res.final_table.column(fld).back();
      summary += fmt::format(" {}:{}", to_string(fld),
                             last.rate ? fmt::format("{:.2f}", *last.rate) : std::string("--"));
    }
    summary += '\n';
  }
  return summary;
}

std::string cmd_compare_newton(const RunConfig& c) {
  const std::vector<int> ns = c.h.empty() ? std::vector<int>{16} : c.h;
  auto f = open_output(c.out, "compare_newton.csv");
  f << "method,h,dt,field,error,relative_error,wall_seconds,newton_iterations\n";
  std::string summary = "compare-newton\n";
  for (int n : ns) {
    for (NsTreatment m : {NsTreatment::Characteristic, NsTreatment::Newton}) {
      CaseSpec spec = base_case(c);
      spec.n = n;
      spec.dt = c.dt > 0.0 ? c.dt : 0.001;
      spec.ns = m;
      const auto res = run_mms_case(spec);
      const char* name = m == NsTreatment::Newton ? "newton" : "characteristic";
      for (ErrorField fld : kErrorFields)
        f << fmt::format("{},{},{},{},{:.9e},{:.9e},{:.6f},{}\n", name, 1.0 / n, spec.dt,
                         to_string(fld), res.final_errors[fld], res.final_errors.rel(fld),
                         res.run.wall_seconds, res.newton_iterations);
      summary += fmt::format("  {:<14} h=1/{} wall={:.3f}s rel u_c={:.6f}\n", name, n,
                             res.run.wall_seconds, res.final_errors.rel(ErrorField::UcL2));
    }
  }
  return summary;
}

std::string cmd_wellbore(const RunConfig& c) {
  WellboreSettings s;
  s.theta = c.theta;
  if (!c.h.empty()) s.h = 1.0 / c.h.front();
  if (c.dt > 0.0) s.dt = c.dt;
  if (c.final_time > 0.0) s.final_time = c.final_time;
  int r = c.r;
  if (c.ds > 0.0) r = TimeGrid::from_steps(s.final_time, s.dt, c.ds).r;
  const auto res = run_wellbore(s, r, c.workers, c.out, c.vtk_every, c.log_every);
  const auto& last = res.flux.back();
  return fmt::format("wellbore theta={} h={} dt={} r={}: {} frames, final inflow flux {:.6e}, "
                     "outflow flux {:.6e}, wall {:.2f}s\n",
                     s.theta, s.h, s.dt, r, res.frames.size(), last.inflow, last.outflow,
                     res.run.wall_seconds);
}

std::string run_experiment(const RunConfig& c) {
  validate(c);
  if (c.experiment == "converge") return cmd_converge(c);
  if (c.experiment == "ratio-sweep") return cmd_ratio_sweep(c);
  if (c.experiment == "penalty-sweep") return cmd_penalty_sweep(c);
  if (c.experiment == "compare-newton") return cmd_compare_newton(c);
  if (c.experiment == "wellbore") return cmd_wellbore(c);
  throw ConfigError(fmt::format("unknown experiment '{}'", c.experiment));
}

}  // namespace dpns
