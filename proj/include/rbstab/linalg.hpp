#pragma once

#include "rbstab/types.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace rbstab
{

/// Inner product (x, y)_X = x^T X y on a subset of the dofs.
///
/// Entries outside the active set are ignored. X restricted to the active set
/// must be symmetric positive definite; it is factored once, P X P^T = L L^T.
class InnerProduct
{
public:
  InnerProduct() = default;
  /// Empty active list means all dofs.
  InnerProduct(const SpMat &x, std::vector<int> active = {});

  int dim() const { return n_full_; }
  int active_dim() const { return static_cast<int>(active_.size()); }
  const std::vector<int> &active() const { return active_; }
  const SpMat &matrix() const { return x_; } // restricted

  double dot(const Vec &a, const Vec &b) const;
  double norm(const Vec &a) const;
  Mat gram(const Mat &a, const Mat &b) const;

  /// L^T P S_active: Euclidean products of the result are X products of S.
  Mat whiten(const Mat &s) const;
  /// Inverse of whiten, scattered back to full length with zeros off the active set.
  Mat unwhiten(const Mat &w) const;

  /// Solves X_active y = r_active, zero outside the active set.
  Mat solve(const Mat &r) const;

  Mat restrict_rows(const Mat &s) const;
  Mat extend_rows(const Mat &s) const;

private:
  int n_full_ = 0;
  std::vector<int> active_;
  SpMat x_;
  std::shared_ptr<Eigen::SimplicialLLT<SpMat>> llt_;
};

/// Appends the columns of v to z after making them X-orthonormal to z and to
/// each other (two Gram-Schmidt passes). A column whose norm falls below
/// drop_tol times its original norm is dropped. Returns the number appended.
int gram_schmidt_append(Mat &z, const Mat &v, const InnerProduct &x, double drop_tol = 1e-12);

/// Extracts rows and columns of a sparse matrix.
SpMat submatrix(const SpMat &m, const std::vector<int> &rows, const std::vector<int> &cols);

} // namespace rbstab
