#include "dpns/linalg.hpp"

#include <limits>

#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace dpns {

void TripletBuilder::append(const TripletBuilder& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_)
    throw LinalgError("TripletBuilder::append: shape mismatch");
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

SparseMatrix::SparseMatrix(Storage m) : m_(std::move(m)) { m_.makeCompressed(); }

SparseMatrix compress(const TripletBuilder& builder) {
  for (const auto& t : builder.entries()) {
    if (t.row() < 0 || t.row() >= builder.rows() || t.col() < 0 || t.col() >= builder.cols())
      throw LinalgError(fmt::format("triplet ({}, {}) outside {}x{} matrix", t.row(), t.col(),
                                    builder.rows(), builder.cols()));
  }
  SparseMatrix::Storage m(builder.rows(), builder.cols());
  m.setFromTriplets(builder.entries().begin(), builder.entries().end());
  return SparseMatrix(std::move(m));
}

struct LuSolver::Impl {
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> A;
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::COLAMDOrdering<int>> lu;
  double tolerance = 1e-10;
};

LuSolver::LuSolver(const SparseMatrix& A, double tolerance) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw LinalgError("LuSolver: matrix is not square");
  impl_->A = A.eigen();
  impl_->tolerance = tolerance;
  impl_->lu.analyzePattern(impl_->A);
  impl_->lu.factorize(impl_->A);
  if (impl_->lu.info() != Eigen::Success)
    throw SolveFailed("sparse LU factorization failed: " + impl_->lu.lastErrorMessage(),
                      std::numeric_limits<double>::infinity());
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

int LuSolver::size() const { return static_cast<int>(impl_->A.rows()); }

Vector LuSolver::solve(const Vector& b) const {
  if (b.size() != impl_->A.rows()) throw LinalgError("LuSolver::solve: size mismatch");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x = impl_->lu.solve(b);
  Vector r = b - impl_->A * x;
  double rel = r.norm() / bnorm;
  for (int it = 0; it < 3 && rel > impl_->tolerance; ++it) {
    x += impl_->lu.solve(r);
    r = b - impl_->A * x;
    rel = r.norm() / bnorm;
  }
  if (!(rel <= impl_->tolerance))
    throw SolveFailed(fmt::format("linear solve residual {:.3e} above tolerance {:.1e}", rel,
                                  impl_->tolerance),
                      rel);
  return x;
}

Vector solve(const SparseMatrix& A, const Vector& b) { return LuSolver(A).solve(b); }

}  // namespace dpns
