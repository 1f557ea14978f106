#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpns/characteristics.hpp"

using namespace dpns;

namespace {

FieldHandle interpolate(const FeSpaces& sp, const VectorFunction& f) {
  FieldHandle h = sp.zero_field(SpaceId::ConduitVelocity);
  const int ns = sp.dofs().mini_scalar_count();
  for (int v = 0; v < sp.mesh().num_vertices(); ++v) {
    const int d = sp.dofs().conduit_vertex[v];
    if (d < 0) continue;
    const Point u = f(sp.mesh().vertex(v));
    h.coeffs[d] = u.x();
    h.coeffs[ns + d] = u.y();
  }
  return h;
}

Point scan_eval(const FeSpaces& sp, const FieldHandle& u, const Point& x) {
  const auto loc = sp.mesh().locate_point_scan(Subdomain::Conduit, x);
  return eval_mini_vector(sp, u.coeffs, loc->element, loc->bary);
}

class TraceTest : public ::testing::Test {
 protected:
  Mesh mesh = build_structured_rect_mesh(8);
  FeSpaces sp{mesh};
  int locate(const Point& x) const { return mesh.locate_point(Subdomain::Conduit, x)->element; }
};

}  // namespace

TEST_F(TraceTest, ZeroFieldIsIdentity) {
  const Point x(0.3, 1.4);
  const auto tv = trace_evaluate(sp, sp.zero_field(SpaceId::ConduitVelocity), x, locate(x), 0.1);
  EXPECT_EQ(tv.foot, x);
  EXPECT_EQ(tv.value, Point::Zero());
  EXPECT_FALSE(tv.clamped);
}

TEST_F(TraceTest, ConstantTransport) {
  const auto u = interpolate(sp, [](const Point&) { return Point(1.0, 0.0); });
  const Point x(0.5, 1.5);
  const auto tv = trace_evaluate(sp, u, x, locate(x), 0.1);
  EXPECT_NEAR((tv.foot - Point(0.4, 1.5)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((tv.value - Point(1.0, 0.0)).norm(), 0.0, 1e-14);
  EXPECT_FALSE(tv.clamped);
}

TEST_F(TraceTest, RandomPointsMatchScanEvaluation) {
  const auto f = [](const Point& x) {
    return Point(std::sin(2 * x.x()) * (x.y() - 1.0), std::cos(x.x() + x.y()));
  };
  const auto u = interpolate(sp, f);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ux(0.02, 0.98), uy(1.02, 1.98);
  int inside = 0;
  for (int i = 0; i < 100; ++i) {
    const Point x(ux(rng), uy(rng));
    const double dt = 0.05;
    const Point foot = x - dt * scan_eval(sp, u, x);
    const auto tv = trace_evaluate(sp, u, x, locate(x), dt);
    if (mesh.locate_point_scan(Subdomain::Conduit, foot)) {
      ++inside;
      EXPECT_FALSE(tv.clamped);
      EXPECT_NEAR((tv.foot - foot).norm(), 0.0, 1e-14);
      EXPECT_NEAR((tv.value - scan_eval(sp, u, foot)).norm(), 0.0, 1e-12);
    } else {
      EXPECT_TRUE(tv.clamped);
    }
  }
  EXPECT_GT(inside, 80);
}

TEST_F(TraceTest, FootsAcrossInterfaceClampAtInterface) {
  const auto u = interpolate(sp, [](const Point&) { return Point(0.0, 1.0); });
  const Point x(0.37, 1.2);
  const auto tv = trace_evaluate(sp, u, x, locate(x), 0.5);
  EXPECT_TRUE(tv.clamped);
  EXPECT_NEAR(tv.foot.y(), 1.0, 1e-12);
  EXPECT_NEAR(tv.foot.x(), 0.37, 1e-12);
  EXPECT_EQ(mesh.triangle(tv.element).subdomain, Subdomain::Conduit);
  EXPECT_NEAR((tv.value - Point(0.0, 1.0)).norm(), 0.0, 1e-13);
}

TEST_F(TraceTest, DiagonalExitThroughCorner) {
  const auto u = interpolate(sp, [](const Point&) { return Point(1.0, 1.0); });
  const Point x(0.25, 1.25);  // a mesh vertex, path along the diagonals
  const auto tv = trace_evaluate(sp, u, x, locate(x), 1.0);
  EXPECT_TRUE(tv.clamped);
  EXPECT_NEAR((tv.foot - Point(0.0, 1.0)).norm(), 0.0, 1e-12);
}

TEST_F(TraceTest, DeviationDecaysLinearlyInDt) {
  const auto f = [](const Point& x) { return Point(x.y() - 1.0, x.x() * x.x()); };
  const auto u = interpolate(sp, f);
  const Point x(0.41, 1.53);
  const Point u0 = scan_eval(sp, u, x);
  double prev = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double dt = 0.1 / (1 << k);
    const double dev = (trace_evaluate(sp, u, x, locate(x), dt).value - u0).norm();
    EXPECT_LE(dev, 4.0 * u0.norm() * dt);
    if (k > 0) {
      EXPECT_NEAR(dev / prev, 0.5, 0.1);
    }
    prev = dev;
  }
}

TEST_F(TraceTest, Deterministic) {
  const auto u = interpolate(sp, [](const Point& x) { return Point(std::exp(x.x()), -x.y()); });
  const Point x(0.77, 1.11);
  const auto a = trace_evaluate(sp, u, x, locate(x), 0.3);
  const auto b = trace_evaluate(sp, u, x, locate(x), 0.3);
  EXPECT_EQ(a.foot, b.foot);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.element, b.element);
}

TEST_F(TraceTest, WrongFieldRejected) {
  EXPECT_THROW(trace_evaluate(sp, sp.zero_field(SpaceId::FractureVelocity), Point(0.5, 1.5), -1, 0.1),
               CharacteristicError);
  EXPECT_THROW(trace_evaluate(sp, sp.zero_field(SpaceId::ConduitVelocity), Point(0.5, 1.5), -1, 0.0),
               CharacteristicError);
}
