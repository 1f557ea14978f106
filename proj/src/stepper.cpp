#include "dpns/stepper.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <optional>

#include <fmt/format.h>

namespace dpns {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_finite(const Vector& v, const char* what, int k) {
  if (!v.allFinite())
    throw NumericalFailure(fmt::format("{} became non-finite in macro step {}", what, k));
}

}  // namespace

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw TimeGridError("final time must be positive");
  if (r < 1 || M < 0 || N != r * M)
    throw TimeGridError(fmt::format("time grids are not nested: N = {}, r = {}, M = {}", N, r, M));
}

TimeGrid TimeGrid::from_dt(double T, double dt, int r) {
  if (!(dt > 0.0)) throw TimeGridError("time step must be positive");
  if (r < 1) throw TimeGridError(fmt::format("time step ratio must be a positive integer, got {}", r));
  TimeGrid g;
  g.T = T;
  g.r = r;
  g.M = std::max(1, static_cast<int>(std::lround(T / (r * dt))));
  g.N = r * g.M;
  g.validate();
  return g;
}

TimeGrid TimeGrid::from_steps(double T, double dt, double ds) {
  if (!(dt > 0.0) || !(ds > 0.0)) throw TimeGridError("time steps must be positive");
  const double ratio = ds / dt;
  const long r = std::lround(ratio);
  if (r < 1 || std::abs(ratio - r) > 1e-9 * ratio)
    throw TimeGridError(fmt::format("ds / dt = {} is not a positive integer", ratio));
  return from_dt(T, dt, static_cast<int>(r));
}

State init_state(const Problem& problem, const FeSpaces& spaces) {
  State s;
  const ScalarFunction p0 = [&](const Point& x) { return problem.p_c_initial(x); };
  s.u_c = l2_project_vector(spaces, SpaceId::ConduitVelocity,
                            [&](const Point& x) { return problem.u_c_initial(x); });
  s.p_c = l2_project_scalar(spaces, SpaceId::ConduitPressure, p0);
  s.u_f = l2_project_vector(spaces, SpaceId::FractureVelocity,
                            [&](const Point& x) { return problem.u_f_initial(x); });
  s.phi_f = l2_project_scalar(spaces, SpaceId::FracturePressure,
                              [&](const Point& x) { return problem.phi_f_initial(x); });
  s.u_m = l2_project_vector(spaces, SpaceId::MatrixVelocity,
                            [&](const Point& x) { return problem.u_m_initial(x); });
  s.phi_m = l2_project_scalar(spaces, SpaceId::MatrixPressure,
                              [&](const Point& x) { return problem.phi_m_initial(x); });
  s.s_sum = Vector::Zero(spaces.count(SpaceId::ConduitVelocity));
  return s;
}

struct Stepper::Solvers {
  NsAssembler ns;
  DirichletEliminator ns_elim;
  std::optional<LuSolver> ns_lu;  // characteristic treatment only
  DarcyAssembler matrix;
  DirichletEliminator matrix_elim;
  LuSolver matrix_lu;
  DarcyAssembler fracture;
  DirichletEliminator fracture_elim;
  LuSolver fracture_lu;
  std::optional<EnergyMonitor> monitor;

  Solvers(const Problem& problem, const TimeGrid& grid, const FeSpaces& spaces,
          const StepperOptions& opt)
      : ns(spaces, problem.params(), grid.dt(), opt.pin_pressure),
        ns_elim(ns.matrix(), ns.constrained_dofs()),
        matrix(spaces, problem.params(), grid.ds(), Continuum::Matrix),
        matrix_elim(matrix.matrix(), matrix.constrained_dofs()),
        matrix_lu(matrix_elim.reduced()),
        fracture(spaces, problem.params(), grid.ds(), Continuum::Fracture),
        fracture_elim(fracture.matrix(), fracture.constrained_dofs()),
        fracture_lu(fracture_elim.reduced()) {
    if (opt.ns == NsTreatment::Characteristic) ns_lu.emplace(ns_elim.reduced());
    if (opt.monitor_energy) monitor.emplace(spaces, problem.params(), grid.dt(), grid.ds(), grid.r);
  }
};

Stepper::Stepper(const Problem& problem, const TimeGrid& grid, const FeSpaces& spaces,
                 StepperOptions options)
    : problem_(&problem), grid_(grid), spaces_(&spaces), options_(options) {
  grid_.validate();
  if (options_.workers < 1 || options_.workers > 2)
    throw TimeGridError(fmt::format("worker count must be 1 or 2, got {}", options_.workers));
  if (grid_.M == 0) return;  // nothing to advance, run() returns the initial state
  const auto start = Clock::now();
  solvers_ = std::make_unique<Solvers>(problem, grid_, spaces, options_);
  setup_seconds_ = seconds_since(start);
}

Stepper::~Stepper() = default;

State Stepper::initial_state() const { return init_state(*problem_, *spaces_); }

MacroDiagnostics Stepper::advance(State& s) const {
  const int k = s.k;
  if (s.n != grid_.r * k) throw TimeGridError("state is not at a macro step boundary");
  if (k >= grid_.M) throw TimeGridError(fmt::format("macro step {} is past the final time", k + 1));
  auto& sv = *solvers_;
  const Problem& problem = *problem_;
  const double t_next = grid_.t_dual(k + 1);
  const auto start = Clock::now();
  MacroDiagnostics diag;
  diag.k = k + 1;
  diag.t = t_next;

  // Step 2 reads only porous data at t_{n_k}, which the conduit loop never touches.
  struct DarcyOut {
    Vector x;
    double assembly = 0.0, solve = 0.0;
  };
  auto matrix_step = [&]() {
    DarcyOut out;
    auto t0 = Clock::now();
    Vector rhs = sv.matrix.rhs(s.phi_m, s.phi_f, nullptr, t_next, problem);
    sv.matrix_elim.apply(rhs, sv.matrix.constraint_values(problem, t_next));
    out.assembly = seconds_since(t0);
    t0 = Clock::now();
    out.x = sv.matrix_lu.solve(rhs);
    out.solve = seconds_since(t0);
    return out;
  };

  std::future<DarcyOut> pending;
  std::optional<DarcyOut> matrix_result;
  if (options_.workers >= 2)
    pending = std::async(std::launch::async, matrix_step);
  else
    matrix_result = matrix_step();

  const int nu = sv.ns.velocity_dofs();
  TraceStats stats;
  for (int sub = 0; sub < grid_.r; ++sub) {
    const double t_sub = grid_.t_conduit(s.n + 1);
    Vector x;
    if (options_.ns == NsTreatment::Characteristic) {
      auto t0 = Clock::now();
      const auto transported = sv.ns.trace(s.u_c, &stats);
      diag.phases.trace += seconds_since(t0);
      t0 = Clock::now();
      Vector rhs = sv.ns.rhs(transported, s.phi_f, s.u_f, t_sub, problem);
      sv.ns_elim.apply(rhs, sv.ns.constraint_values(problem, t_sub));
      diag.phases.assembly += seconds_since(t0);
      t0 = Clock::now();
      x = sv.ns_lu->solve(rhs);
      diag.phases.solve += seconds_since(t0);
    } else {
      const auto t0 = Clock::now();
      auto res = NewtonNsSolver(sv.ns).solve(s.u_c, s.p_c, s.phi_f, s.u_f, t_sub, problem,
                                             options_.newton);
      diag.newton_iterations += res.iterations;
      diag.phases.solve += seconds_since(t0);
      x = std::move(res.solution);
    }
    check_finite(x, "conduit solution", k);
    s.u_c.coeffs = x.head(nu);
    s.p_c.coeffs = x.tail(x.size() - nu);
    s.u_c.time = s.p_c.time = t_sub;
    ++s.n;
    s.s_sum += s.u_c.coeffs;
    ++s.s_count;
    if (sv.monitor) sv.monitor->add_substep(s.energy, s.u_c.coeffs);
  }

  if (pending.valid()) matrix_result = pending.get();
  diag.phases.assembly += matrix_result->assembly;
  diag.phases.solve += matrix_result->solve;
  check_finite(matrix_result->x, "matrix solution", k);

  // Step 3 with the completed interface average S = (1/r) sum u_c.
  const FieldHandle s_avg{SpaceId::ConduitVelocity, s.s_sum / static_cast<double>(grid_.r), t_next};
  auto t0 = Clock::now();
  Vector rhs = sv.fracture.rhs(s.phi_f, s.phi_m, &s_avg, t_next, problem);
  sv.fracture_elim.apply(rhs, sv.fracture.constraint_values(problem, t_next));
  diag.phases.assembly += seconds_since(t0);
  t0 = Clock::now();
  const Vector xf = sv.fracture_lu.solve(rhs);
  diag.phases.solve += seconds_since(t0);
  check_finite(xf, "fracture solution", k);

  State before;
  if (sv.monitor) {
    before.u_f = s.u_f;
    before.phi_f = s.phi_f;
    before.u_m = s.u_m;
    before.phi_m = s.phi_m;
  }
  const int nm = sv.matrix.velocity_dofs();
  s.u_m.coeffs = matrix_result->x.head(nm);
  s.phi_m.coeffs = matrix_result->x.tail(matrix_result->x.size() - nm);
  const int nf = sv.fracture.velocity_dofs();
  s.u_f.coeffs = xf.head(nf);
  s.phi_f.coeffs = xf.tail(xf.size() - nf);
  s.u_m.time = s.phi_m.time = s.u_f.time = s.phi_f.time = t_next;
  ++s.k;
  if (sv.monitor) {
    sv.monitor->add_macro_step(s.energy, before, s, s.s_sum);
    diag.energy = energy_monitor(*sv.monitor, s);
  }
  s.s_sum.setZero();
  s.s_count = 0;
  s.clamped_total += stats.clamped;
  diag.clamped = stats.clamped;
  diag.phases.total = seconds_since(start);

  if (options_.log_every > 0 && s.k % options_.log_every == 0)
    fmt::print(stderr, "k={} t={:.6g} wall={:.3f}s trace={:.3f}s solve={:.3f}s energy={:.6e} clamped={}\n",
               s.k, t_next, diag.phases.total, diag.phases.trace, diag.phases.solve,
               diag.energy.total(), diag.clamped);
  return diag;
}

RunResult Stepper::run(const MacroCallback& callback) const {
  RunResult result;
  const auto start = Clock::now();
  result.state = initial_state();
  double wall = seconds_since(start) + setup_seconds_;
  result.phases.setup = wall;
  for (int k = 0; k < grid_.M; ++k) {
    auto diag = advance(result.state);
    wall += diag.phases.total;
    result.phases += diag.phases;
    if (callback) callback(result.state, diag);
    result.history.push_back(std::move(diag));
  }
  result.phases.total = wall;
  result.wall_seconds = wall;
  return result;
}

RunResult run(const Problem& problem, const TimeGrid& grid, const FeSpaces& spaces,
              const StepperOptions& options, const MacroCallback& callback) {
  const Stepper stepper(problem, grid, spaces, options);
  return stepper.run(callback);
}

}  // namespace dpns
