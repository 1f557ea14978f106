#include <cmath>
#include <numbers>
#include <random>
#include <type_traits>

#include <gtest/gtest.h>

#include "dpns/mms.hpp"

using namespace dpns;
using std::numbers::pi;

namespace {

constexpr double kH1 = 1e-5;  // first derivatives
constexpr double kH2 = 1e-3;  // second derivatives, fourth-order stencil

// Helpers return concrete values (not Eigen expressions over temporaries).
template <class F>
auto d_dx(F&& f, const Point& x, int c) -> std::decay_t<decltype(f(x))> {
  Point e = Point::Zero();
  e[c] = kH1;
  return (f(x + e) - f(x - e)) / (2 * kH1);
}

template <class F>
auto d2_dx2(F&& f, const Point& x, int c) -> std::decay_t<decltype(f(x))> {
  Point e = Point::Zero();
  e[c] = kH2;
  return (-f(x + 2 * e) + 16.0 * f(x + e) - 30.0 * f(x) + 16.0 * f(x - e) - f(x - 2 * e)) /
         (12.0 * kH2 * kH2);
}

template <class F>
auto laplace(F&& f, const Point& x) -> std::decay_t<decltype(f(x))> {
  return d2_dx2(f, x, 0) + d2_dx2(f, x, 1);
}

template <class F>
auto d_dt(F&& f, double t) -> std::decay_t<decltype(f(t))> {
  return (f(t + kH1) - f(t - kH1)) / (2 * kH1);
}

PhysParams odd_params() {
  PhysParams p;
  p.nu = 0.7;
  p.mu = 1.3;
  p.sigma = 0.4;
  p.eta_f = 2.0;
  p.eta_m = 0.5;
  p.C_ft = 0.8;
  p.C_mt = 1.7;
  p.k_f = 0.6;
  p.k_m = 0.2;
  return p;
}

}  // namespace

// Strong residual of every equation with finite-difference derivatives of the
// exact fields only; the closed-form forcing must cancel it.
TEST(Mms, StrongResidualVanishes) {
  for (const PhysParams& params : {PhysParams{}, odd_params()}) {
    const MmsProblem m(params);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> ux(0.0, 1.0), uc(1.0, 2.0), ud(0.0, 1.0), ut(0.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = ut(rng);
      const Point xc(ux(rng), uc(rng));
      const Point xd(ux(rng), ud(rng));

      const auto u = [&](const Point& p) { return m.u_c(p, t); };
      const auto pc = [&](const Point& p) { return m.p_c(p, t); };
      const Point u0 = u(xc);
      const Point dudt = d_dt([&](double s) { return m.u_c(xc, s); }, t);
      Eigen::Matrix2d g;
      g.col(0) = d_dx(u, xc, 0);
      g.col(1) = d_dx(u, xc, 1);
      const Point grad_p(d_dx(pc, xc, 0), d_dx(pc, xc, 1));
      const Point r_c = dudt + g * u0 - params.nu * laplace(u, xc) + grad_p - m.f_c(xc, t);
      worst = std::max(worst, r_c.lpNorm<Eigen::Infinity>());
      worst = std::max(worst, std::abs(g.trace()));  // incompressibility

      const auto pf = [&](const Point& p) { return m.phi_f(p, t); };
      const auto pm = [&](const Point& p) { return m.phi_m(p, t); };
      const double ex = params.sigma * params.k_m / params.mu * (pf(xd) - pm(xd));
      const double r_f = params.eta_f * params.C_ft * d_dt([&](double s) { return m.phi_f(xd, s); }, t) -
                         params.k_f / params.mu * laplace(pf, xd) + ex - m.f_d(xd, t);
      const double r_m = params.eta_m * params.C_mt * d_dt([&](double s) { return m.phi_m(xd, s); }, t) -
                         params.k_m / params.mu * laplace(pm, xd) - ex - m.f_m(xd, t);
      worst = std::max({worst, std::abs(r_f), std::abs(r_m)});
    }
    EXPECT_LE(worst, 1e-6);
  }
}

TEST(Mms, ClosedFormDerivativesMatchDifferences) {
  const MmsProblem m(odd_params());
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double t = 2 * u(rng);
    const Point x(u(rng), 2 * u(rng));
    const auto uc = [&](const Point& p) { return m.u_c(p, t); };
    Eigen::Matrix2d g;
    g.col(0) = d_dx(uc, x, 0);
    g.col(1) = d_dx(uc, x, 1);
    EXPECT_LT((g - m.grad_u_c(x, t)).lpNorm<Eigen::Infinity>(), 1e-7);
    EXPECT_LT((laplace(uc, x) - m.laplace_u_c(x, t)).lpNorm<Eigen::Infinity>(), 1e-6);
    const auto pf = [&](const Point& p) { return m.phi_f(p, t); };
    const auto pm = [&](const Point& p) { return m.phi_m(p, t); };
    const Point gf(d_dx(pf, x, 0), d_dx(pf, x, 1));
    const Point gm(d_dx(pm, x, 0), d_dx(pm, x, 1));
    EXPECT_LT((gf - m.grad_phi_f(x, t)).norm(), 1e-7);
    EXPECT_LT((gm - m.grad_phi_m(x, t)).norm(), 1e-7);
    // Darcy laws
    EXPECT_LT((m.u_f(x, t) + 0.6 / 1.3 * gf).norm(), 1e-7);
    EXPECT_LT((m.u_m(x, t) + 0.2 / 1.3 * gm).norm(), 1e-7);
    const auto pc = [&](const Point& p) { return m.p_c(p, t); };
    EXPECT_LT((Point(d_dx(pc, x, 0), d_dx(pc, x, 1)) - m.grad_p_c(x, t)).norm(), 1e-7);
  }
}

TEST(Mms, NormalVelocityMatchesAcrossInterface) {
  const MmsProblem m;
  for (double x : {0.0, 0.13, 0.5, 0.9}) {
    const Point p(x, 1.0);
    EXPECT_NEAR(m.u_c(p, 0.3).y(), m.u_f(p, 0.3).y(), 1e-12);
  }
}

TEST(Mms, PointValues) {
  const MmsProblem m;
  const Point u = m.u_c(Point(0.0, 2.0), 0.0);
  EXPECT_NEAR(u.x(), 2.0, 1e-15);
  EXPECT_NEAR(u.y(), 2.0, 1e-15);
  for (double x : {0.2, 0.5}) {
    const double A = 2.0 - pi * std::sin(pi * x);
    EXPECT_NEAR(m.phi_f(Point(x, 1.0), 0.0), A, 1e-14);
    EXPECT_NEAR(m.phi_f(Point(x, 1.0), 1.0), A * std::cos(1.0), 1e-14);
  }
}

TEST(Mms, ForcingAtQuarterPeriodIsPureTimeDerivative) {
  const MmsProblem m;
  const double t = pi / 2;
  for (const Point& x : {Point(0.3, 1.7), Point(0.9, 1.1)}) {
    EXPECT_LT((m.f_c(x, t) + m.u_c(x, 0.0)).norm(), 1e-12);
    EXPECT_NEAR(m.f_d(x - Point(0, 1), t), -m.phi_f(x - Point(0, 1), 0.0), 1e-12);
  }
}

TEST(Mms, InterfaceDataIsExactSlipResidual) {
  const MmsProblem m;
  const Point n_c(0.0, -1.0), tau(1.0, 0.0);
  const Point x(0.4, 1.0);
  const double t = 0.2;
  const auto d = m.interface_data(x, t, n_c, tau);
  ASSERT_TRUE(d);
  const Eigen::Matrix2d g = m.grad_u_c(x, t);
  // d.tangential = kappa u.tau + nu tau.(grad u) n_c
  EXPECT_NEAR(d->tangential,
              m.params().bjs_coefficient() * m.u_c(x, t).x() + g(0, 1) * -1.0, 1e-13);
  EXPECT_NEAR(d->normal, m.phi_f(x, t) - g(1, 1) - m.p_c(x, t), 1e-13);
  EXPECT_NEAR(m.params().bjs_coefficient(), 1.0, 1e-15);
}

TEST(Mms, BoundaryDataFollowsExactFields) {
  const MmsProblem m;
  const Point x(0.25, 0.0);
  EXPECT_EQ(m.boundary_velocity(BoundaryField::Fracture, x, 0.1, BoundaryLabel::DualExterior, 0),
            m.u_f(x, 0.1));
  EXPECT_THROW(m.boundary_velocity(BoundaryField::Conduit, x, 0.1, BoundaryLabel::Interface, 0),
               ProblemError);
}

TEST(Params, Validation) {
  PhysParams p;
  p.k_f = 0.0;
  EXPECT_THROW(p.validate(), ProblemError);
  PhysParams q;
  q.gamma = -1.0;
  EXPECT_THROW(q.validate(), ProblemError);
  PhysParams r;
  r.gamma = 0.0;
  EXPECT_NO_THROW(r.validate());
  EXPECT_NEAR(r.exchange(), 1.0, 1e-15);
}

TEST(Wellbore, InflowProfileAndSegments) {
  WellboreSettings s;
  s.theta = 0.05;
  const WellboreScenario w(s);
  EXPECT_NEAR(w.inflow(Point(0.125, 7.0)).y(), -64.0 * 0.125 * 0.125, 1e-14);
  EXPECT_EQ(w.inflow(Point(0.0, 7.0)).y(), 0.0);
  const auto bv = [&](BoundaryField f, int seg) {
    return w.boundary_velocity(f, Point(1.0, 1.0), 0.0, BoundaryLabel::DualExterior, seg);
  };
  EXPECT_EQ(bv(BoundaryField::Fracture, 1), Point(0.0, 0.5));
  EXPECT_EQ(bv(BoundaryField::Fracture, 2), Point(-0.5, 0.0));
  EXPECT_EQ(bv(BoundaryField::Fracture, 3), Point(-0.5, 0.0));
  EXPECT_EQ(bv(BoundaryField::Fracture, 4), Point(0.0, -0.5));
  EXPECT_EQ(bv(BoundaryField::Fracture, 5), Point(0.5, 0.0));
  EXPECT_EQ(bv(BoundaryField::Matrix, 4), Point(0.0, -0.05));
  EXPECT_EQ(w.boundary_velocity(BoundaryField::Conduit, Point(0.1, 5.0), 0.0, BoundaryLabel::ConduitWall, 0),
            Point::Zero());
  EXPECT_THROW(w.boundary_velocity(BoundaryField::Conduit, Point(5.9, 7.0), 0.0,
                                   BoundaryLabel::ConduitOutflow, 0),
               ProblemError);
  EXPECT_NEAR(w.params().k_m, 1e-8, 0.0);
  EXPECT_EQ(w.params().gamma, 10.0);
}
