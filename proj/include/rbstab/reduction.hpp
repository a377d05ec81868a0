#pragma once

#include "rbstab/full_order.hpp"

#include <string>
#include <vector>

namespace rbstab
{

struct PodResult
{
  Mat modes;            // X-orthonormal columns
  Vec singular_values;  // all numerically nonzero values, descending
  bool truncated = false; // fewer modes than requested
};

/// POD of the columns of `snapshots` in the X inner product.
///
/// max_modes < 0 keeps every mode with sigma_i / sigma_1 > rank_tol. A
/// positive energy_tol keeps the fewest modes whose discarded squared
/// singular values sum to at most energy_tol times the total.
PodResult pod(const Mat &snapshots, const InnerProduct &x, int max_modes = -1, double energy_tol = 0.0,
              double rank_tol = 1e-12);

struct GreedySettings
{
  int max_basis = 30;
  int max_iterations = 25;
  int modes_per_step = 2;
  double tolerance = 0.0; // stop when the largest indicator drops to this value
};

struct GreedyResult
{
  Mat basis;                  // X-orthonormal
  std::vector<int> selected;  // training index chosen at each iteration
  std::vector<double> indicator; // largest indicator before each iteration
  double final_indicator = 0.0;
};

/// Time-averaged X-norm projection error of one trajectory onto an X-orthonormal basis.
double projection_error(const Mat &trajectory, const Mat &basis, const InnerProduct &x);

/// POD-Greedy over trajectories (one n x K matrix per training parameter).
GreedyResult pod_greedy(const std::vector<Mat> &trajectories, const InnerProduct &x, const GreedySettings &settings);

/// Solves X_u t = B(mu)^T q on the free velocity dofs, column by column.
Mat supremizer(const FullOrderModel &model, const Mat &q, const Vec2 &mu);

struct ReducedBasis
{
  Mat zu; // velocity modes, n_u x N_u
  Mat zs; // supremizer modes, n_u x N_s (X-orthogonal to zu)
  Mat zp; // pressure modes, n_p x N_p
  std::vector<int> selected_u, selected_p;

  int n_u() const { return static_cast<int>(zu.cols()); }
  int n_s() const { return static_cast<int>(zs.cols()); }
  int n_p() const { return static_cast<int>(zp.cols()); }
  Mat zus() const;
};

/// Separate POD-Greedy runs for velocity (H1 seminorm) and pressure (L2).
ReducedBasis build_reduced_basis(const FullOrderModel &model, const SnapshotSet &snapshots,
                                 const GreedySettings &settings);

/// Supremizers of the pressure trajectories at the parameters chosen by the
/// pressure greedy, compressed to n_s modes and orthonormalized against zu.
/// Returns the number of modes obtained (may be less than n_s).
int enrich_with_supremizers(ReducedBasis &basis, const FullOrderModel &model, const SnapshotSet &snapshots,
                            int n_s);

} // namespace rbstab
