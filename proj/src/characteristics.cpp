#include "dpns/characteristics.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace dpns {

namespace {

std::array<double, 3> clip(std::array<double, 3> b) {
  double sum = 0.0;
  for (double& v : b) sum += (v = std::max(v, 0.0));
  for (double& v : b) v /= sum;
  return b;
}

}  // namespace

TracedValue trace_evaluate(const FeSpaces& spaces, const FieldHandle& u_old, const Point& x,
                           int hint, double dt) {
  if (u_old.space != SpaceId::ConduitVelocity)
    throw CharacteristicError("trace_evaluate needs a conduit velocity field");
  if (!(dt > 0.0)) throw CharacteristicError("trace_evaluate needs dt > 0");
  const Mesh& mesh = spaces.mesh();

  int start = hint;
  if (start < 0 || start >= mesh.num_triangles() ||
      mesh.triangle(start).subdomain != Subdomain::Conduit) {
    const auto loc = mesh.locate_point(Subdomain::Conduit, x);
    if (!loc) throw CharacteristicError(fmt::format("point ({}, {}) is outside the conduit", x.x(), x.y()));
    start = loc->element;
  }
  const Point u = eval_mini_vector(spaces, u_old.coeffs, start, mesh.barycentric(start, x));
  TracedValue out;
  out.foot = x - dt * u;
  out.element = start;
  if (u.x() == 0.0 && u.y() == 0.0) {
    out.value = u;
    return out;
  }

  // Walk along the segment x + s (foot - x), s in [0, 1], through conduit
  // triangles. Barycentric coordinates are affine, so the exit parameter of
  // each triangle follows from their values at both ends.
  const Point d = out.foot - x;
  int cur = start;
  int prev = -1;
  const int max_steps = static_cast<int>(mesh.triangles_in(Subdomain::Conduit).size()) + 16;
  for (int step = 0; step < max_steps; ++step) {
    const auto bf = mesh.barycentric(cur, out.foot);
    if (*std::min_element(bf.begin(), bf.end()) >= -kBaryTolerance) {
      out.element = cur;
      out.value = eval_mini_vector(spaces, u_old.coeffs, cur, bf);
      return out;
    }
    const auto bx = mesh.barycentric(cur, x);
    int exit_edge = -1;
    double s_exit = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (!(bf[i] < bx[i]) || bf[i] >= -kBaryTolerance) continue;
      const double s = bx[i] / (bx[i] - bf[i]);
      const int nb = mesh.neighbor(cur, i);
      // Prefer leaving through a fresh edge when two crossings coincide (vertex passage).
      const bool better = s < s_exit - 1e-14 ||
                          (s < s_exit + 1e-14 && exit_edge >= 0 && mesh.neighbor(cur, exit_edge) == prev &&
                           nb != prev);
      if (better) {
        s_exit = s;
        exit_edge = i;
      }
    }
    if (exit_edge < 0) break;
    const int next = mesh.neighbor(cur, exit_edge);
    if (next == prev) break;  // rounding at a vertex passage; resolved below
    if (next < 0) {
      const Point p = x + std::clamp(s_exit, 0.0, 1.0) * d;
      out.foot = p;
      out.clamped = true;
      out.element = cur;
      out.value = eval_mini_vector(spaces, u_old.coeffs, cur, clip(mesh.barycentric(cur, p)));
      return out;
    }
    prev = cur;
    cur = next;
  }

  if (const auto loc = mesh.locate_point(Subdomain::Conduit, out.foot, cur)) {
    out.element = loc->element;
    out.value = eval_mini_vector(spaces, u_old.coeffs, loc->element, loc->bary);
    return out;
  }
  // Foot outside and the walk got stuck on a vertex: clamp where the walk stands.
  const auto b = clip(mesh.barycentric(cur, out.foot));
  out.foot = mesh.to_physical(cur, b);
  out.clamped = true;
  out.element = cur;
  out.value = eval_mini_vector(spaces, u_old.coeffs, cur, b);
  return out;
}

}  // namespace dpns
