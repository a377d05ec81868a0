#include "rbstab/linalg.hpp"

#include <numeric>

namespace rbstab
{

SpMat submatrix(const SpMat &m, const std::vector<int> &rows, const std::vector<int> &cols)
{
  std::vector<int> rmap(m.rows(), -1), cmap(m.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    rmap[rows[i]] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j)
    cmap[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> trip;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      if (rmap[it.row()] >= 0 && cmap[it.col()] >= 0)
        trip.emplace_back(rmap[it.row()], cmap[it.col()], it.value());
  SpMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

InnerProduct::InnerProduct(const SpMat &x, std::vector<int> active) : n_full_(static_cast<int>(x.rows()))
{
  if (x.rows() != x.cols())
    throw UsageError("InnerProduct: matrix must be square");
  if (active.empty())
  {
    active.resize(n_full_);
    std::iota(active.begin(), active.end(), 0);
  }
  active_ = std::move(active);
  x_ = submatrix(x, active_, active_);
  llt_ = std::make_shared<Eigen::SimplicialLLT<SpMat>>(x_);
  if (llt_->info() != Eigen::Success)
    throw SolverError("InnerProduct: matrix is not positive definite on the active dofs");
}

Mat InnerProduct::restrict_rows(const Mat &s) const
{
  if (s.rows() != n_full_)
    throw UsageError("InnerProduct: vector length mismatch");
  return s(active_, Eigen::all);
}

Mat InnerProduct::extend_rows(const Mat &s) const
{
  Mat out = Mat::Zero(n_full_, s.cols());
  out(active_, Eigen::all) = s;
  return out;
}

double InnerProduct::dot(const Vec &a, const Vec &b) const
{
  const Vec ra = restrict_rows(a), rb = restrict_rows(b);
  return ra.dot(x_ * rb);
}

double InnerProduct::norm(const Vec &a) const
{
  return std::sqrt(std::max(0.0, dot(a, a)));
}

Mat InnerProduct::gram(const Mat &a, const Mat &b) const
{
  return restrict_rows(a).transpose() * (x_ * restrict_rows(b));
}

Mat InnerProduct::whiten(const Mat &s) const
{
  const Mat r = restrict_rows(s);
  return llt_->matrixU() * (llt_->permutationP() * r);
}

Mat InnerProduct::unwhiten(const Mat &w) const
{
  if (w.rows() != active_dim())
    throw UsageError("InnerProduct::unwhiten: row count mismatch");
  const Mat y = llt_->matrixU().solve(w);
  return extend_rows(llt_->permutationPinv() * y);
}

Mat InnerProduct::solve(const Mat &r) const
{
  return extend_rows(llt_->solve(restrict_rows(r)));
}

int gram_schmidt_append(Mat &z, const Mat &v, const InnerProduct &x, double drop_tol)
{
  if (z.cols() > 0 && z.rows() != v.rows())
    throw UsageError("gram_schmidt_append: row count mismatch");
  if (z.cols() == 0)
    z.resize(v.rows(), 0);
  int added = 0;
  for (int j = 0; j < v.cols(); ++j)
  {
    Vec w = v.col(j);
    const double n0 = x.norm(w);
    if (n0 == 0.0)
      continue;
    for (int pass = 0; pass < 2; ++pass)
      if (z.cols() > 0)
        w -= z * x.gram(z, w);
    const double n1 = x.norm(w);
    if (n1 <= drop_tol * n0)
      continue;
    z.conservativeResize(Eigen::NoChange, z.cols() + 1);
    z.col(z.cols() - 1) = w / n1;
    ++added;
  }
  return added;
}

} // namespace rbstab
