#include "dpns/quadrature.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace dpns {

namespace {

struct GaussNodes {
  std::vector<double> x;
  std::vector<double> w;
};

// Golub-Welsch for the Jacobi weight (1 - t)^alpha on [-1, 1] (beta = 0).
GaussNodes gauss_jacobi(int n, double alpha) {
  const double beta = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + alpha + beta;
    J(k, k) = (k == 0 && s == 0.0) ? 0.0
                                   : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double sm = 2.0 * m + alpha + beta;
      const double num = 4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta);
      const double den = sm * sm * (sm + 1.0) * (sm - 1.0);
      J(k, k + 1) = J(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                     std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0);
  GaussNodes g;
  for (int k = 0; k < n; ++k) {
    g.x.push_back(eig.eigenvalues()(k));
    const double v0 = eig.eigenvectors()(0, k);
    g.w.push_back(mu0 * v0 * v0);
  }
  return g;
}

QuadratureRule build_triangle_rule(int degree) {
  const int n = (degree + 2) / 2;
  const auto gj = gauss_jacobi(n, 1.0);
  const auto gl = gauss_jacobi(n, 0.0);
  QuadratureRule rule;
  rule.exact_degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + gj.x[i]);
    const double wu = 0.25 * gj.w[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (1.0 + gl.x[j]);
      const double wv = 0.5 * gl.w[j];
      const double x = u;
      const double y = v * (1.0 - u);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(wu * wv);
    }
  }
  return rule;
}

LineRule build_line_rule(int degree) {
  const int n = (degree + 2) / 2;
  const auto gl = gauss_jacobi(n, 0.0);
  LineRule rule;
  rule.exact_degree = degree;
  for (int j = 0; j < n; ++j) {
    rule.points.push_back(0.5 * (1.0 + gl.x[j]));
    rule.weights.push_back(0.5 * gl.w[j]);
  }
  return rule;
}

constexpr int kMaxDegree = 10;

}  // namespace

const QuadratureRule& make_quadrature(int exact_degree) {
  if (exact_degree < 1 || exact_degree > kMaxDegree)
    throw QuadratureError(fmt::format("unsupported quadrature degree {}", exact_degree));
  static const std::array<QuadratureRule, kMaxDegree + 1> rules = [] {
    std::array<QuadratureRule, kMaxDegree + 1> r;
    for (int d = 1; d <= kMaxDegree; ++d) r[d] = build_triangle_rule(d);
    return r;
  }();
  return rules[exact_degree];
}

const LineRule& make_line_quadrature(int exact_degree) {
  if (exact_degree < 1 || exact_degree > 2 * kMaxDegree + 1)
    throw QuadratureError(fmt::format("unsupported line quadrature degree {}", exact_degree));
  static const std::array<LineRule, 2 * kMaxDegree + 2> rules = [] {
    std::array<LineRule, 2 * kMaxDegree + 2> r;
    for (int d = 1; d <= 2 * kMaxDegree + 1; ++d) r[d] = build_line_rule(d);
    return r;
  }();
  return rules[exact_degree];
}

}  // namespace dpns
