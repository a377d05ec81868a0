#include "rbstab/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rbstab
{

double infsup_from_matrices(const Mat &b, const Mat &xu, const Mat &xp, const Mat &s)
{
  if (b.rows() != xp.rows() || b.cols() != xu.rows() || (s.size() > 0 && s.rows() != b.rows()))
    throw UsageError("infsup: matrix sizes do not match");
  if (b.rows() == 0)
    throw UsageError("infsup: empty pressure space");
  const Eigen::LLT<Mat> llt(xu);
  if (llt.info() != Eigen::Success)
    throw SolverError("infsup: velocity product is not positive definite");
  Mat k = b * llt.solve(b.transpose());
  if (s.size() > 0)
    k += s;
  k = 0.5 * (k + k.transpose());
  const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(k, xp, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw SolverError("infsup: eigensolver failed");
  return std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
}

InfSup infsup_constant(const FullOrderModel &model, const Vec2 &mu)
{
  const Physical phys = model.physical(mu);
  const LinearOperators ops = model.linear_operators(phys, true);
  const InnerProduct &xu = model.velocity_product();
  const Vec &m = model.pressure_mean();
  const int np = static_cast<int>(m.size());
  if (np < 2)
    throw UsageError("infsup: pressure space too small");

  // Zero-mean pressures: e_i - (m_i / m_last) e_last.
  Mat t = Mat::Zero(np, np - 1);
  for (int i = 0; i < np - 1; ++i)
  {
    t(i, i) = 1.0;
    t(np - 1, i) = -m[i] / m[np - 1];
  }
  std::vector<int> rows(np);
  for (int i = 0; i < np; ++i)
    rows[i] = i;
  const SpMat bfree = submatrix(ops.div, rows, xu.active());
  const Mat bt = (bfree.transpose() * t).transpose();
  const Mat xinv_bt = xu.restrict_rows(xu.solve(xu.extend_rows(bt.transpose())));
  Mat k = bt * xinv_bt;
  k = 0.5 * (k + k.transpose());
  const Mat xp = t.transpose() * (model.pressure_mass() * t);
  const Mat s = t.transpose() * (ops.s * t);

  auto smallest = [&](const Mat &a) {
    const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(a, xp, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw SolverError("infsup: eigensolver failed");
    return std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
  };
  InfSup out;
  out.beta = smallest(k);
  out.beta_stabilized = smallest(k + 0.5 * (s + s.transpose()));
  return out;
}

double reduced_infsup(const FullOrderModel &model, const Vec2 &mu, const Mat &zv, const Mat &zp)
{
  const SpMat b = assemble_divergence(model.velocity_space(), model.pressure_space(), model.physical(mu));
  const Mat bn = zp.transpose() * (b * zv);
  const Mat gu = model.velocity_product().gram(zv, zv);
  const Mat gp = zp.transpose() * (model.pressure_mass() * zp);
  return infsup_from_matrices(bn, gu, gp);
}

ErrorSeries l2_error_in_time(const std::vector<Vec> &reference, const std::vector<Vec> &approx, const SpMat &mass,
                             double scale)
{
  if (reference.size() != approx.size() || reference.empty())
    throw UsageError("l2_error_in_time: time grids do not match");
  ErrorSeries out;
  out.error.reserve(reference.size());
  for (std::size_t k = 0; k < reference.size(); ++k)
  {
    if (reference[k].size() != mass.rows() || approx[k].size() != mass.rows())
      throw UsageError("l2_error_in_time: vector length mismatch");
    const Vec e = reference[k] - approx[k];
    out.error.push_back(scale * std::sqrt(std::max(0.0, e.dot(mass * e))));
  }
  const std::size_t steps = reference.size() - 1;
  if (steps > 0)
  {
    for (std::size_t k = 1; k <= steps; ++k)
      out.average += out.error[k];
    out.average /= static_cast<double>(steps);
  }
  return out;
}

std::string to_string(Field f)
{
  return f == Field::Velocity ? "velocity" : "pressure";
}

namespace
{

std::vector<Vec> reconstructed(const RomSolution &rom, Field f)
{
  std::vector<Vec> out;
  for (int k = 0; k <= rom.steps(); ++k)
  {
    Fields x = reconstruct(rom, k);
    out.push_back(f == Field::Velocity ? std::move(x.velocity) : std::move(x.pressure));
  }
  return out;
}

} // namespace

ErrorSeries l2_error_in_time(const FullOrderModel &model, const FomSolution &fom, const RomSolution &rom, Field f)
{
  const double scale = std::sqrt(model.physical(fom.mu).length);
  const std::vector<Vec> &ref = f == Field::Velocity ? fom.velocity : fom.pressure;
  const SpMat &mass = f == Field::Velocity ? model.velocity_mass() : model.pressure_mass();
  return l2_error_in_time(ref, reconstructed(rom, f), mass, scale);
}

double reproduction_error(const FullOrderModel &model, const FomSolution &fom, const RomSolution &rom, Field f)
{
  const std::vector<Vec> &ref = f == Field::Velocity ? fom.velocity : fom.pressure;
  const std::vector<Vec> approx = reconstructed(rom, f);
  if (ref.size() != approx.size() || ref.size() < 2)
    throw UsageError("reproduction_error: time grids do not match");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k < ref.size(); ++k)
  {
    const Vec e = ref[k] - approx[k];
    if (f == Field::Velocity)
    {
      num += model.velocity_product().norm(e);
      den += model.velocity_product().norm(ref[k]);
    }
    else
    {
      num += std::sqrt(std::max(0.0, e.dot(model.pressure_mass() * e)));
      den += std::sqrt(std::max(0.0, ref[k].dot(model.pressure_mass() * ref[k])));
    }
  }
  return den > 0.0 ? num / den : num;
}

DtStability dt_stability_flag(double delta, double h, double dt)
{
  if (!(delta > 0.0) || !(h > 0.0) || !(dt > 0.0))
    throw DomainError("dt_stability_flag: inputs must be positive");
  DtStability out;
  out.threshold = delta * h * h;
  out.ratio = dt / out.threshold;
  out.ok = dt > out.threshold;
  out.ratio_at_least_delta = out.ratio >= delta;
  return out;
}

} // namespace rbstab
