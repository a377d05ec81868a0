#include "rbstab/reduction.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace rbstab
{

namespace
{

// Thin left singular vectors of a Euclidean matrix, truncated at the numerical rank.
void thin_svd(const Mat &w, double rank_tol, Mat &u, Vec &sigma)
{
  if (w.cols() == 0 || w.rows() == 0)
  {
    u.resize(w.rows(), 0);
    sigma.resize(0);
    return;
  }
  Eigen::BDCSVD<Mat> svd(w, Eigen::ComputeThinU);
  const Vec s = svd.singularValues();
  int rank = 0;
  if (s.size() > 0 && s[0] > 0.0)
    while (rank < s.size() && s[rank] > rank_tol * s[0])
      ++rank;
  u = svd.matrixU().leftCols(rank);
  sigma = s.head(rank);
}

// Euclidean Gram-Schmidt with reorthogonalization; returns columns appended.
int append_orthonormal(Mat &z, const Mat &v, double drop_tol)
{
  int added = 0;
  for (int j = 0; j < v.cols(); ++j)
  {
    Vec w = v.col(j);
    const double n0 = w.norm();
    if (n0 == 0.0)
      continue;
    for (int pass = 0; pass < 2; ++pass)
      if (z.cols() > 0)
        w -= z * (z.transpose() * w);
    const double n1 = w.norm();
    if (n1 <= drop_tol * n0)
      continue;
    z.conservativeResize(Eigen::NoChange, z.cols() + 1);
    z.col(z.cols() - 1) = w / n1;
    ++added;
  }
  return added;
}

double mean_column_norm(const Mat &r)
{
  if (r.cols() == 0)
    return 0.0;
  return r.colwise().norm().sum() / static_cast<double>(r.cols());
}

} // namespace

PodResult pod(const Mat &snapshots, const InnerProduct &x, int max_modes, double energy_tol, double rank_tol)
{
  if (snapshots.cols() == 0)
    throw UsageError("pod: no snapshots");
  if (snapshots.rows() != x.dim())
    throw UsageError("pod: snapshot length does not match the inner product");
  Mat u;
  PodResult out;
  thin_svd(x.whiten(snapshots), rank_tol, u, out.singular_values);
  int n = static_cast<int>(out.singular_values.size());
  if (energy_tol > 0.0 && n > 0)
  {
    const double total = out.singular_values.squaredNorm();
    double tail = total;
    int keep = 0;
    while (keep < n && tail > energy_tol * total)
    {
      tail -= out.singular_values[keep] * out.singular_values[keep];
      ++keep;
    }
    n = keep;
  }
  if (max_modes >= 0)
  {
    if (max_modes > n)
      out.truncated = true;
    n = std::min(n, max_modes);
  }
  out.modes = x.unwhiten(u.leftCols(n));
  return out;
}

double projection_error(const Mat &trajectory, const Mat &basis, const InnerProduct &x)
{
  Mat r = x.whiten(trajectory);
  if (basis.cols() > 0)
  {
    const Mat zb = x.whiten(basis);
    r -= zb * (zb.transpose() * r);
  }
  return mean_column_norm(r);
}

GreedyResult pod_greedy(const std::vector<Mat> &trajectories, const InnerProduct &x, const GreedySettings &settings)
{
  if (trajectories.empty())
    throw UsageError("pod_greedy: empty training set");
  if (settings.modes_per_step < 1 || settings.max_basis < 0 || settings.max_iterations < 0)
    throw UsageError("pod_greedy: invalid settings");

  // Work in whitened coordinates, where the X product is Euclidean.
  std::vector<Mat> residual;
  residual.reserve(trajectories.size());
  for (const Mat &t : trajectories)
    residual.push_back(x.whiten(t));

  GreedyResult out;
  Mat z(x.active_dim(), 0);
  auto indicators = [&] {
    Vec ind(residual.size());
    for (std::size_t i = 0; i < residual.size(); ++i)
      ind[i] = mean_column_norm(residual[i]);
    return ind;
  };

  for (int iter = 0; iter < settings.max_iterations && z.cols() < settings.max_basis; ++iter)
  {
    const Vec ind = indicators();
    if (!ind.allFinite())
      throw SolverError("pod_greedy: indicator is not finite");
    Eigen::Index best = 0;
    const double worst = ind.maxCoeff(&best);
    out.indicator.push_back(worst);
    // Numerical rank exhausted: what is left is roundoff.
    if (worst <= settings.tolerance || worst <= 1e-12 * out.indicator.front())
      break;

    Mat u;
    Vec sigma;
    thin_svd(residual[best], 1e-12, u, sigma);
    const int want = std::min<int>({settings.modes_per_step, settings.max_basis - static_cast<int>(z.cols()),
                                    static_cast<int>(u.cols())});
    const int first = static_cast<int>(z.cols());
    const int added = append_orthonormal(z, u.leftCols(want), 1e-12);
    if (added == 0)
      break;
    out.selected.push_back(static_cast<int>(best));
    const Mat znew = z.middleCols(first, added);
    for (Mat &r : residual)
      r -= znew * (znew.transpose() * r);
  }
  out.final_indicator = indicators().maxCoeff();
  out.basis = x.unwhiten(z);
  return out;
}

Mat supremizer(const FullOrderModel &model, const Mat &q, const Vec2 &mu)
{
  if (q.rows() != model.pressure_space().dof_count())
    throw UsageError("supremizer: pressure vector has wrong length");
  const SpMat b = assemble_divergence(model.velocity_space(), model.pressure_space(), model.physical(mu));
  return model.velocity_product().solve(Mat(b.transpose() * q));
}

Mat ReducedBasis::zus() const
{
  Mat out(zu.rows(), zu.cols() + zs.cols());
  out << zu, zs;
  return out;
}

ReducedBasis build_reduced_basis(const FullOrderModel &model, const SnapshotSet &snapshots,
                                 const GreedySettings &settings)
{
  ReducedBasis basis;
  const GreedyResult gu = pod_greedy(snapshots.velocity, model.velocity_product(), settings);
  const GreedyResult gp = pod_greedy(snapshots.pressure, model.pressure_product(), settings);
  basis.zu = gu.basis;
  basis.zp = gp.basis;
  basis.zs.resize(basis.zu.rows(), 0);
  basis.selected_u = gu.selected;
  basis.selected_p = gp.selected;
  return basis;
}

int enrich_with_supremizers(ReducedBasis &basis, const FullOrderModel &model, const SnapshotSet &snapshots,
                            int n_s)
{
  basis.zs.resize(basis.zu.rows(), 0);
  if (n_s <= 0)
    return 0;
  std::set<int> chosen(basis.selected_p.begin(), basis.selected_p.end());
  if (chosen.empty())
    for (int i = 0; i < snapshots.size(); ++i)
      chosen.insert(i);
  Mat sup(basis.zu.rows(), 0);
  for (int i : chosen)
  {
    const Mat t = supremizer(model, snapshots.pressure[i], snapshots.mu[i]);
    sup.conservativeResize(Eigen::NoChange, sup.cols() + t.cols());
    sup.rightCols(t.cols()) = t;
  }
  const PodResult p = pod(sup, model.velocity_product(), n_s);
  if (p.truncated)
    std::cerr << "warning: only " << p.modes.cols() << " supremizer modes available\n";
  Mat z = basis.zu;
  const int added = gram_schmidt_append(z, p.modes, model.velocity_product());
  basis.zs = z.rightCols(added);
  return added;
}

} // namespace rbstab
