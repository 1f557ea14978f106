#pragma once

// Discrete spaces of the coupled problem:
//   conduit:  MINI velocity (P1 + cubic bubble per component), P1 pressure
//   dual:     BDM1 velocity (two normal moments per edge), P0 pressure,
//             one copy each for the microfracture and the matrix continua.
//
// BDM1 degrees of freedom are the edge functionals
//   N_{e,0}(v) = 1/|e| int_e v.n_e ds,   N_{e,1}(v) = 1/|e| int_e (v.n_e) s ds,
// with n_e the global edge normal and s in [-1, 1] running from the lower to
// the higher vertex index. Local shape functions are dual to these global
// functionals, so normal traces are single-valued without sign flips.

#include <array>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dpns/linalg.hpp"
#include "dpns/mesh.hpp"

namespace dpns {

enum class SpaceId {
  ConduitVelocity,
  ConduitPressure,
  FractureVelocity,
  FracturePressure,
  MatrixVelocity,
  MatrixPressure,
};

std::string_view to_string(SpaceId id);
Subdomain subdomain_of(SpaceId id);
bool is_vector_space(SpaceId id);

class FeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DofMaps {
  std::vector<int> conduit_vertex;   // mesh vertex -> P1 index, -1 outside the conduit
  std::vector<int> conduit_element;  // mesh triangle -> bubble index, -1 outside
  std::vector<int> dual_edge;        // mesh edge -> BDM1 edge index, -1 outside
  std::vector<int> dual_element;     // mesh triangle -> P0 index, -1 outside
  // Per mesh triangle: sign of (local outward normal . global edge normal).
  // Zero for conduit triangles.
  std::vector<std::array<int, 3>> bdm_sign;

  int n_conduit_vertices = 0;
  int n_conduit_elements = 0;
  int n_dual_edges = 0;
  int n_dual_elements = 0;

  // One MINI velocity component: vertex dofs followed by bubble dofs.
  int mini_scalar_count() const { return n_conduit_vertices + n_conduit_elements; }
  int count(SpaceId id) const;

  int p0_dof(int tri) const { return dual_element[tri]; }
};

struct MiniBasis {
  std::array<double, 4> velocity{};  // lambda_0..2, 27 lambda_0 lambda_1 lambda_2
  std::array<Point, 4> velocity_grad{};
  std::array<double, 3> pressure{};
  std::array<Point, 3> pressure_grad{};
};

struct BdmBasis {
  std::array<Point, 6> value{};  // local dof 2 i + j: moment j on local edge i
  std::array<double, 6> divergence{};
};

// Coefficient vector of one discrete field with its time label.
struct FieldHandle {
  SpaceId space = SpaceId::ConduitVelocity;
  Vector coeffs;
  double time = 0.0;
};

struct PointValue {
  double scalar = 0.0;
  Point vector = Point::Zero();
  double divergence = 0.0;
  Eigen::Matrix2d gradient = Eigen::Matrix2d::Zero();  // gradient(i, j) = d v_i / d x_j
};

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

class FeSpaces {
 public:
  explicit FeSpaces(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  const DofMaps& dofs() const { return dofs_; }
  int count(SpaceId id) const { return dofs_.count(id); }

  // Global dofs of one MINI velocity component on a conduit triangle.
  std::array<int, 4> mini_scalar_dofs(int tri) const;
  std::array<int, 3> p1_dofs(int tri) const;
  std::array<int, 6> bdm_dofs(int tri) const;

  const std::array<Point, 3>& grad_lambda(int tri) const { return grad_lambda_[tri]; }

  MiniBasis eval_mini_basis(int tri, const std::array<double, 3>& bary) const;
  BdmBasis eval_bdm1_basis(int tri, const std::array<double, 3>& bary) const;

  // Moments N_{e,0}, N_{e,1} of a vector field on a mesh edge.
  std::array<double, 2> bdm_edge_moments(int edge, const VectorFunction& v) const;

  FieldHandle zero_field(SpaceId id, double time = 0.0) const;

 private:
  void check_subdomain(int tri, Subdomain s) const;

  const Mesh* mesh_;
  DofMaps dofs_;
  std::vector<std::array<Point, 3>> grad_lambda_;
  // BDM1 shape coefficients on monomials {(1,0),(xi,0),(eta,0),(0,1),(0,xi),(0,eta)}
  // in scaled local coordinates xi = (x - center) / scale.
  struct BdmLocal {
    Point center = Point::Zero();
    double scale = 1.0;
    Eigen::Matrix<double, 6, 6> coeff = Eigen::Matrix<double, 6, 6>::Zero();
  };
  std::vector<BdmLocal> bdm_local_;
};

// Field evaluation at a barycentric point of a mesh triangle. Throws FeError
// when the triangle is not in the field's subdomain.
PointValue evaluate_field(const FeSpaces& spaces, const FieldHandle& field, int tri,
                          const std::array<double, 3>& bary);

// Fast paths used in the assembly loops.
Point eval_mini_vector(const FeSpaces& spaces, const Vector& coeffs, int tri,
                       const std::array<double, 3>& bary);
Eigen::Matrix2d eval_mini_gradient(const FeSpaces& spaces, const Vector& coeffs, int tri,
                                   const std::array<double, 3>& bary);
Point eval_bdm_vector(const FeSpaces& spaces, const Vector& coeffs, int tri,
                      const std::array<double, 3>& bary);

// L2-orthogonal projection onto a discrete space.
FieldHandle l2_project_scalar(const FeSpaces& spaces, SpaceId id, const ScalarFunction& f,
                              double time = 0.0);
FieldHandle l2_project_vector(const FeSpaces& spaces, SpaceId id, const VectorFunction& f,
                              double time = 0.0);

// Global mass matrix of a space (both MINI components for the conduit velocity).
SparseMatrix mass_matrix(const FeSpaces& spaces, SpaceId id);

}  // namespace dpns
