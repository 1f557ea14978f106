#pragma once

// Backtracking of the conduit velocity along its own characteristics:
//   u_hat(x) = u_old(x - u_old(x) dt).
// Feet leaving the conduit are clamped to the first boundary crossing of the
// segment [x, foot]; the conduit field is never read outside the conduit.

#include <stdexcept>

#include "dpns/fespace.hpp"

namespace dpns {

class CharacteristicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TracedValue {
  Point foot = Point::Zero();
  Point value = Point::Zero();
  bool clamped = false;
  int element = -1;  // conduit triangle containing the (possibly clamped) foot
};

// `x` must lie in conduit triangle `hint` (typically a quadrature point of it);
// a hint outside the conduit is replaced by point location.
TracedValue trace_evaluate(const FeSpaces& spaces, const FieldHandle& u_old, const Point& x,
                           int hint, double dt);

}  // namespace dpns
