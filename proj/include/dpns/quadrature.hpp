#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace dpns {

// Rule on the reference triangle {x, y >= 0, x + y <= 1}; weights sum to 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric (1 - x - y, x, y)
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return weights.size(); }
};

// Gauss rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return weights.size(); }
};

class QuadratureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Collapsed-coordinate product of Gauss-Jacobi(1,0) and Gauss-Legendre rules,
// exact for polynomials of total degree <= exact_degree (1..10). Rules are
// built once and shared.
const QuadratureRule& make_quadrature(int exact_degree);
const LineRule& make_line_quadrature(int exact_degree);

// Degrees used by the solver.
inline constexpr int kAssemblyDegree = 6;
inline constexpr int kEdgeDegree = 4;
inline constexpr int kErrorDegree = 8;

}  // namespace dpns
