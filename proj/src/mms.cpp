#include "dpns/mms.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace dpns {

using std::numbers::pi;

void PhysParams::validate() const {
  const double positive[] = {nu, mu, rho, sigma, alpha, eta_f, eta_m, C_ft, C_mt, k_f, k_m};
  for (double v : positive)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ProblemError("physical parameters must be positive and finite");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw ProblemError("penalty parameter must be non-negative");
}

double PhysParams::bjs_coefficient() const {
  return alpha * nu * std::sqrt(double(D)) / std::sqrt(D * k_f);
}

Point Problem::boundary_velocity(BoundaryField, const Point&, double, BoundaryLabel label,
                                 int) const {
  if (label == BoundaryLabel::Interface || label == BoundaryLabel::Interior ||
      label == BoundaryLabel::ConduitOutflow)
    throw ProblemError(fmt::format("no boundary data on {} edges", to_string(label)));
  return Point::Zero();
}

namespace {

struct Profile {
  double A, dA, ddA;
};

Profile profile(double x) {
  return {2.0 - pi * std::sin(pi * x), -pi * pi * std::cos(pi * x), pi * pi * pi * std::sin(pi * x)};
}

}  // namespace

MmsProblem::MmsProblem(PhysParams p, double amplitude) : params_(p), amplitude_(amplitude) {
  params_.validate();
}

double MmsProblem::time_factor(double t) const { return amplitude_ * std::cos(t); }

Point MmsProblem::u_c(const Point& p, double t) const {
  const double x = p.x(), y = p.y(), c = time_factor(t);
  const double ym = y - 1.0;
  return Point((x * x * ym * ym + y) * c, (-2.0 / 3.0 * x * ym * ym * ym + profile(x).A) * c);
}

Eigen::Matrix2d MmsProblem::grad_u_c(const Point& p, double t) const {
  const double x = p.x(), y = p.y(), c = time_factor(t);
  const double ym = y - 1.0;
  Eigen::Matrix2d g;
  g << 2.0 * x * ym * ym, 2.0 * x * x * ym + 1.0,
      -2.0 / 3.0 * ym * ym * ym + profile(x).dA, -2.0 * x * ym * ym;
  return g * c;
}

Point MmsProblem::laplace_u_c(const Point& p, double t) const {
  const double x = p.x(), y = p.y(), c = time_factor(t);
  const double ym = y - 1.0;
  return Point(2.0 * ym * ym + 2.0 * x * x, profile(x).ddA - 4.0 * x * ym) * c;
}

double MmsProblem::p_c(const Point& p, double t) const {
  return profile(p.x()).A * std::sin(pi * p.y() / 2.0) * time_factor(t);
}

Point MmsProblem::grad_p_c(const Point& p, double t) const {
  const auto a = profile(p.x());
  const double y = p.y();
  return Point(a.dA * std::sin(pi * y / 2.0), a.A * pi / 2.0 * std::cos(pi * y / 2.0)) *
         time_factor(t);
}

double MmsProblem::phi_f(const Point& p, double t) const {
  const double y = p.y();
  return profile(p.x()).A * (1.0 - y - std::cos(pi * y)) * time_factor(t);
}

Point MmsProblem::grad_phi_f(const Point& p, double t) const {
  const auto a = profile(p.x());
  const double y = p.y();
  return Point(a.dA * (1.0 - y - std::cos(pi * y)), a.A * (-1.0 + pi * std::sin(pi * y))) *
         time_factor(t);
}

double MmsProblem::laplace_phi_f(const Point& p, double t) const {
  const auto a = profile(p.x());
  const double y = p.y();
  return (a.ddA * (1.0 - y - std::cos(pi * y)) + a.A * pi * pi * std::cos(pi * y)) *
         time_factor(t);
}

// cos(pi (1 - y)) = -cos(pi y)
double MmsProblem::phi_m(const Point& p, double t) const {
  return -profile(p.x()).A * std::cos(pi * p.y()) * time_factor(t);
}

Point MmsProblem::grad_phi_m(const Point& p, double t) const {
  const auto a = profile(p.x());
  const double y = p.y();
  return Point(-a.dA * std::cos(pi * y), a.A * pi * std::sin(pi * y)) * time_factor(t);
}

double MmsProblem::laplace_phi_m(const Point& p, double t) const {
  const auto a = profile(p.x());
  const double y = p.y();
  return (-a.ddA + a.A * pi * pi) * std::cos(pi * y) * time_factor(t);
}

Point MmsProblem::u_f(const Point& p, double t) const {
  return -(params_.k_f / params_.mu) * grad_phi_f(p, t);
}

Point MmsProblem::u_m(const Point& p, double t) const {
  return -(params_.k_m / params_.mu) * grad_phi_m(p, t);
}

Forcing MmsProblem::forcing(const Point& p, double t) const {
  const auto& q = params_;
  Forcing f;
  // Every field is spatial(x) * amplitude * cos t, and the t = 0 value is
  // spatial(x) * amplitude.
  const double s = -std::sin(t);
  const Point du_dt = u_c(p, 0.0) * s;
  const double dphi_f_dt = phi_f(p, 0.0) * s;
  const double dphi_m_dt = phi_m(p, 0.0) * s;
  const Point u = u_c(p, t);
  f.f_c = du_dt - q.nu * laplace_u_c(p, t) + grad_p_c(p, t) + grad_u_c(p, t) * u;
  const double exchange = q.exchange() * (phi_f(p, t) - phi_m(p, t));
  f.f_d = q.eta_f * q.C_ft * dphi_f_dt - q.k_f / q.mu * laplace_phi_f(p, t) + exchange;
  f.f_m = q.eta_m * q.C_mt * dphi_m_dt - q.k_m / q.mu * laplace_phi_m(p, t) - exchange;
  return f;
}

Point MmsProblem::f_c(const Point& x, double t) const { return forcing(x, t).f_c; }
double MmsProblem::f_d(const Point& x, double t) const { return forcing(x, t).f_d; }
double MmsProblem::f_m(const Point& x, double t) const { return forcing(x, t).f_m; }

Point MmsProblem::boundary_velocity(BoundaryField field, const Point& x, double t,
                                    BoundaryLabel label, int segment) const {
  Problem::boundary_velocity(field, x, t, label, segment);  // rejects non-data labels
  switch (field) {
    case BoundaryField::Conduit: return u_c(x, t);
    case BoundaryField::Fracture: return u_f(x, t);
    case BoundaryField::Matrix: return u_m(x, t);
  }
  return Point::Zero();
}

std::optional<InterfaceData> MmsProblem::interface_data(const Point& x, double t,
                                                        const Point& n_c,
                                                        const Point& tau) const {
  const auto& q = params_;
  const Point u = u_c(x, t);
  const Point gn = grad_u_c(x, t) * n_c;  // (grad u) n_c
  InterfaceData d;
  d.tangential = q.bjs_coefficient() * u.dot(tau) + q.nu * tau.dot(gn);
  d.normal = phi_f(x, t) / q.rho + q.nu * n_c.dot(gn) - p_c(x, t);
  return d;
}

PhysParams wellbore_params() {
  PhysParams p;
  p.eta_f = 1e-4;
  p.eta_m = 1e-2;
  p.C_ft = 1e-5;
  p.C_mt = 1e-5;
  p.k_f = 1e-4;
  p.k_m = 1e-8;
  p.mu = 1e-2;
  p.nu = 1e-2;
  p.sigma = 0.9;
  p.alpha = 1.0;
  p.rho = 1.0;
  p.gamma = 10.0;
  return p;
}

WellboreScenario::WellboreScenario(WellboreSettings s, PhysParams p)
    : settings_(s), params_(p) {
  params_.validate();
  if (!(settings_.theta >= 0.0)) throw ProblemError("theta must be non-negative");
}

Point WellboreScenario::inflow(const Point& x) const {
  const double w = settings_.geometry.well_width;
  return Point(0.0, -64.0 * x.x() * (w - x.x()));
}

Point WellboreScenario::boundary_velocity(BoundaryField field, const Point& x, double t,
                                          BoundaryLabel label, int segment) const {
  Problem::boundary_velocity(field, x, t, label, segment);
  if (field == BoundaryField::Conduit)
    return label == BoundaryLabel::ConduitInflow ? inflow(x) : Point::Zero();
  const double v = field == BoundaryField::Fracture ? settings_.fracture_speed : settings_.theta;
  switch (segment) {
    case 1: return Point(0.0, v);
    case 2: return Point(-v, 0.0);
    case 3: return Point(-v, 0.0);
    case 4: return Point(0.0, -v);
    case 5: return Point(v, 0.0);
  }
  throw ProblemError(fmt::format("unknown dual boundary segment {}", segment));
}

}  // namespace dpns
