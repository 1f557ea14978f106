#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dpns {

using Vector = Eigen::VectorXd;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolveFailed : public std::runtime_error {
 public:
  SolveFailed(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Unsorted (row, col, value) accumulation. Duplicates are summed on compression.
class TripletBuilder {
 public:
  TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int row, int col, double value) { entries_.emplace_back(row, col, value); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  // Merges a partial builder of the same shape (per-worker accumulation).
  void append(const TripletBuilder& other);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Eigen::Triplet<double>>& entries() const { return entries_; }

 private:
  int rows_;
  int cols_;
  std::vector<Eigen::Triplet<double>> entries_;
};

// Compressed-row storage; column indices sorted and unique within each row.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseMatrix() = default;
  explicit SparseMatrix(Storage m);

  int rows() const { return static_cast<int>(m_.rows()); }
  int cols() const { return static_cast<int>(m_.cols()); }
  int nnz() const { return static_cast<int>(m_.nonZeros()); }

  std::span<const int> row_offsets() const { return {m_.outerIndexPtr(), std::size_t(m_.outerSize()) + 1}; }
  std::span<const int> col_indices() const { return {m_.innerIndexPtr(), std::size_t(m_.nonZeros())}; }
  std::span<const double> values() const { return {m_.valuePtr(), std::size_t(m_.nonZeros())}; }

  double coeff(int row, int col) const { return m_.coeff(row, col); }
  Vector operator*(const Vector& x) const { return m_ * x; }

  const Storage& eigen() const { return m_; }
  Storage& eigen() { return m_; }

 private:
  Storage m_;
};

SparseMatrix compress(const TripletBuilder& builder);

// Sparse LU with partial pivoting, factored once and reused for many
// right-hand sides. Each solve is checked against the residual tolerance and
// polished with a few steps of iterative refinement when needed.
class LuSolver {
 public:
  explicit LuSolver(const SparseMatrix& A, double tolerance = 1e-10);
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  Vector solve(const Vector& b) const;
  int size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot factor-and-solve; relative residual <= 1e-10 or SolveFailed.
Vector solve(const SparseMatrix& A, const Vector& b);

}  // namespace dpns
