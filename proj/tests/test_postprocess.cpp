#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "dpns/postprocess.hpp"
#include "dpns/stepper.hpp"

using namespace dpns;
namespace fs = std::filesystem;

namespace {

ErrorReport report(double h, double e) {
  ErrorReport r;
  r.h = h;
  r.absolute.fill(e);
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

State zero_state(const FeSpaces& sp) {
  State s;
  s.u_c = {SpaceId::ConduitVelocity, Vector::Zero(sp.count(SpaceId::ConduitVelocity)), 0.0};
  s.p_c = {SpaceId::ConduitPressure, Vector::Zero(sp.count(SpaceId::ConduitPressure)), 0.0};
  s.u_f = {SpaceId::FractureVelocity, Vector::Zero(sp.count(SpaceId::FractureVelocity)), 0.0};
  s.phi_f = {SpaceId::FracturePressure, Vector::Zero(sp.count(SpaceId::FracturePressure)), 0.0};
  s.u_m = {SpaceId::MatrixVelocity, Vector::Zero(sp.count(SpaceId::MatrixVelocity)), 0.0};
  s.phi_m = {SpaceId::MatrixPressure, Vector::Zero(sp.count(SpaceId::MatrixPressure)), 0.0};
  s.s_sum = Vector::Zero(sp.count(SpaceId::ConduitVelocity));
  return s;
}

}  // namespace

TEST(RateTable, KnownRates) {
  const auto t = make_rate_table({report(1.0 / 8, 0.029965), report(1.0 / 16, 0.007332)});
  EXPECT_NEAR(*t.column(ErrorField::UcL2)[1].rate, 2.03, 0.005);
  EXPECT_FALSE(t.column(ErrorField::UcL2)[0].rate.has_value());

  const auto first = make_rate_table({report(0.5, 0.1), report(0.25, 0.05)});
  EXPECT_NEAR(*first.column(ErrorField::PhiML2)[1].rate, 1.0, 1e-14);

  const double e = 0.37;
  const auto three = make_rate_table({report(0.5, e), report(0.25, e / 4), report(0.125, e / 16)});
  for (ErrorField f : kErrorFields) {
    EXPECT_NEAR(*three.column(f)[1].rate, 2.0, 1e-12);
    EXPECT_NEAR(*three.column(f)[2].rate, 2.0, 1e-12);
  }
}

TEST(RateTable, RejectsNonHalvingSequence) {
  EXPECT_THROW(make_rate_table({report(0.5, 1.0), report(0.2, 0.5)}), PostprocessError);
}

TEST(RateTable, CsvHasOneRowPerFieldAndMesh) {
  const auto t = make_rate_table({report(0.5, 1.0), report(0.25, 0.5)});
  std::ostringstream os;
  t.write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 2 * 7);
  EXPECT_NE(s.find("0.25,u_c,5.000000000e-01,1.0000"), std::string::npos);
}

TEST(Errors, ZeroStateMeasuresTheExactSolution) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem;
  const auto rep = compute_errors(sp, zero_state(sp), problem, 0.0);
  for (ErrorField f : kErrorFields) {
    EXPECT_GT(rep[f], 0.0) << to_string(f);
    EXPECT_NEAR(rep.rel(f), 1.0, 1e-14) << to_string(f);
  }
  // |phi_m(., 0)| on the unit square, independently by a fine midpoint rule
  double sum = 0.0;
  const int m = 400;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double v = problem.phi_m({(i + 0.5) / m, -1.0 + (j + 0.5) / m}, 0.0);
      sum += v * v / (m * m);
    }
  EXPECT_NEAR(rep[ErrorField::PhiML2], std::sqrt(sum), 1e-5);
}

TEST(Errors, ExactZeroSolutionGivesZeroError) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem({}, 0.0);
  const auto rep = compute_errors(sp, zero_state(sp), problem, 0.0);
  for (ErrorField f : kErrorFields) EXPECT_EQ(rep[f], 0.0);
}

TEST(Errors, ProjectionConvergesAtTheInterpolationOrder) {
  const MmsProblem problem;
  std::vector<ErrorReport> reps;
  for (int n : {8, 16}) {
    const Mesh mesh = build_structured_rect_mesh(n);
    const FeSpaces sp(mesh);
    reps.push_back(compute_errors(sp, init_state(problem, sp), problem, 0.0));
  }
  const auto t = make_rate_table(reps);
  EXPECT_NEAR(*t.column(ErrorField::UcL2)[1].rate, 2.0, 0.2);
  EXPECT_NEAR(*t.column(ErrorField::UcH1)[1].rate, 1.0, 0.2);
  EXPECT_NEAR(*t.column(ErrorField::UfL2)[1].rate, 2.0, 0.2);
  EXPECT_NEAR(*t.column(ErrorField::UmL2)[1].rate, 2.0, 0.2);
  EXPECT_NEAR(*t.column(ErrorField::PhiFL2)[1].rate, 1.0, 0.1);
  EXPECT_NEAR(*t.column(ErrorField::PhiML2)[1].rate, 1.0, 0.1);
  EXPECT_GE(*t.column(ErrorField::PcL2)[1].rate, 1.8);
}

TEST(Errors, TimeLabelMismatchThrows) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem;
  State s = zero_state(sp);
  s.phi_m.time = 0.25;
  EXPECT_THROW(compute_errors(sp, s, problem, 0.0), PostprocessError);
}

TEST(Vtk, ZeroStateAndReexportAreStable) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const auto dir = fs::temp_directory_path() / "dpns_vtk_test";
  fs::create_directories(dir);
  const auto a = (dir / "a.vtk").string(), b = (dir / "b.vtk").string();
  const MmsProblem problem;
  const State s = init_state(problem, sp);
  export_vtk(sp, s, a);
  export_vtk(sp, s, b);
  EXPECT_EQ(slurp(a), slurp(b));

  export_vtk(sp, zero_state(sp), a);
  const std::string z = slurp(a);
  EXPECT_NE(z.find(fmt::format("POINTS {} double", mesh.num_vertices())), std::string::npos);
  EXPECT_NE(z.find(fmt::format("CELLS {} {}", mesh.num_triangles(), 4 * mesh.num_triangles())),
            std::string::npos);
  EXPECT_EQ(z.find("nan"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Vtk, ReparsedVertexVelocityMatchesState) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem;
  const State s = init_state(problem, sp);
  const auto path = (fs::temp_directory_path() / "dpns_vtk_reparse.vtk").string();
  export_vtk(sp, s, path);
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && line.rfind("VECTORS u_c", 0) != 0) {}
  ASSERT_FALSE(in.eof());
  double l2 = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double ux, uy, uz;
    in >> ux >> uy >> uz;
    const int d = sp.dofs().conduit_vertex[v];
    if (d < 0) continue;
    const int ns = sp.dofs().mini_scalar_count();
    l2 += std::pow(ux - s.u_c.coeffs[d], 2) + std::pow(uy - s.u_c.coeffs[ns + d], 2);
  }
  EXPECT_EQ(l2, 0.0);  // 17 significant digits round-trip
  fs::remove(path);
}

TEST(Energy, QuadraticAndFinite) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem;
  const EnergyMonitor mon(sp, problem.params(), 0.01, 0.02, 2);
  EXPECT_EQ(energy_monitor(mon, zero_state(sp)).total(), 0.0);

  State s = init_state(problem, sp);
  State s2 = s;
  for (FieldHandle* f : {&s2.u_c, &s2.p_c, &s2.u_f, &s2.phi_f, &s2.u_m, &s2.phi_m}) f->coeffs *= 2.0;
  const auto e1 = energy_monitor(mon, s), e2 = energy_monitor(mon, s2);
  EXPECT_TRUE(e1.finite());
  EXPECT_GT(e1.total(), 0.0);
  EXPECT_NEAR(e2.total(), 4.0 * e1.total(), 1e-12 * e1.total());

  s.u_c.coeffs[0] = std::nan("");
  EXPECT_THROW(energy_monitor(mon, s), NumericalFailure);
}

TEST(Energy, SumsAreNonNegative) {
  const Mesh mesh = build_structured_rect_mesh(4);
  const FeSpaces sp(mesh);
  const MmsProblem problem;
  const EnergyMonitor mon(sp, problem.params(), 0.01, 0.02, 2);
  State before = init_state(problem, sp), after = before;
  after.phi_m.coeffs *= 0.5;
  after.u_f.coeffs *= -1.0;
  EnergySums sums;
  mon.add_substep(sums, before.u_c.coeffs);
  mon.add_substep(sums, 1.1 * before.u_c.coeffs);
  mon.add_macro_step(sums, before, after, 2.1 * before.u_c.coeffs);
  for (double v : {sums.viscous, sums.slip, sums.penalty, sums.matrix_darcy, sums.fracture_darcy,
                   sums.storage_m, sums.storage_f, sums.exchange})
    EXPECT_GE(v, 0.0);
  EXPECT_EQ(sums.pending_normal, 0.0);
}
