#include "rbstab/rom_online.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace rbstab
{

std::string to_string(Strategy s)
{
  switch (s)
  {
    case Strategy::OfflineOnlineWithSup:
      return "offline-online-sup";
    case Strategy::OfflineOnlineNoSup:
      return "offline-online-nosup";
    case Strategy::OfflineOnlyWithSup:
      return "offline-only-sup";
  }
  return "?";
}

Strategy strategy_from_string(const std::string &name)
{
  for (Strategy s : {Strategy::OfflineOnlineWithSup, Strategy::OfflineOnlineNoSup, Strategy::OfflineOnlyWithSup})
    if (name == to_string(s))
      return s;
  throw UsageError("unknown strategy '" + name + "'");
}

bool uses_supremizers(Strategy s)
{
  return s != Strategy::OfflineOnlineNoSup;
}

bool stabilized_online(Strategy s)
{
  return s != Strategy::OfflineOnlyWithSup;
}

std::string to_string(TrilinearMode m)
{
  return m == TrilinearMode::Tensor ? "tensor" : "project-each-step";
}

TrilinearMode trilinear_mode_from_string(const std::string &name)
{
  if (name == "tensor")
    return TrilinearMode::Tensor;
  if (name == "project-each-step")
    return TrilinearMode::ProjectEachStep;
  throw UsageError("unknown trilinear mode '" + name + "'");
}

ReducedModel select_for_strategy(const ReducedModel &archive, const RomConfig &config)
{
  const int n = config.n;
  if (n < 1 || n > archive.n_u || n > archive.n_p)
    throw UsageError("N = " + std::to_string(n) + " exceeds the stored basis (" + std::to_string(archive.n_u) +
                     " velocity, " + std::to_string(archive.n_p) + " pressure modes)");
  int ns = 0;
  if (uses_supremizers(config.strategy))
  {
    if (archive.n_s == 0)
      throw UsageError("strategy " + to_string(config.strategy) + " needs supremizer modes in the archive");
    ns = std::min(config.n_s.value_or(n), archive.n_s);
    if (config.n_s && *config.n_s > archive.n_s)
      throw UsageError("requested supremizer count exceeds the stored one");
  }
  ReducedModel rm = restrict_model(archive, select_leading(archive, n, ns, n));
  if (!stabilized_online(config.strategy))
  {
    rm.mtilde = ReducedAffineMatrix{};
    rm.mtilde.add(Theta{}, Mat::Zero(rm.n_p, rm.velocity_dim()));
    rm.bsu = rm.mtilde;
    rm.s = ReducedAffineMatrix{};
    rm.s.add(Theta{}, Mat::Zero(rm.n_p, rm.n_p));
    rm.e1 = rm.e2 = rm.e3 = rm.e4 = rm.f3 = ReducedAffineMatrix{};
  }
  return rm;
}

namespace
{

// Jt(:, k) = Q(:, k-th block of n columns) * ub.
Mat contract_test(const Mat &q, const Vec &ub)
{
  const int n = static_cast<int>(ub.size());
  Mat jt(q.rows(), n);
  for (int k = 0; k < n; ++k)
    jt.col(k).noalias() = q.middleCols(k * n, n) * ub;
  return jt;
}

// Quadratic form ub^T C_k ub for every column k of c (C_k is that column as n x n).
void quadratic(const Mat &c, const Vec &ub, Vec &res, Mat *jac)
{
  const int n = static_cast<int>(ub.size());
  const Mat outer = ub * ub.transpose();
  res = c.transpose() * Eigen::Map<const Vec>(outer.data(), n * n);
  if (!jac)
    return;
  jac->resize(c.cols(), n);
  for (int k = 0; k < c.cols(); ++k)
  {
    const Eigen::Map<const Mat> ck(c.col(k).data(), n, n);
    jac->row(k) = (ck * ub + ck.transpose() * ub).transpose();
  }
}

struct OnlineOperators
{
  Mat mass, diffusion, div, mtilde, bsu, s;
  bool nonlinear = false, supg = false;
  Mat conv, e1, e2, e3, e4, f3;
};

struct Residual
{
  Vec r;
  Mat j;
};

class Stepper
{
public:
  virtual ~Stepper() = default;
  // x = (u_N, p_N) without the lifting entry.
  virtual void evaluate(const Vec &x, const Vec &ub_old, bool with_jacobian, Residual &out) const = 0;
};

class TensorStepper : public Stepper
{
public:
  TensorStepper(OnlineOperators ops, double dt) : ops_(std::move(ops)), dt_(dt) {}

  void evaluate(const Vec &x, const Vec &ub_old, bool with_jacobian, Residual &out) const override
  {
    const int nv = static_cast<int>(ops_.mass.rows());
    const int np = static_cast<int>(ops_.s.rows());
    const int n = nv - 1;
    Vec ub(nv);
    ub[0] = 1.0;
    ub.tail(n) = x.head(n);
    const Vec p = x.tail(np);
    const Vec d = (ub - ub_old) / dt_;

    Vec fu = ops_.mass * d + ops_.diffusion * ub + ops_.div.transpose() * p;
    Vec fp = ops_.div * ub - ops_.mtilde * d - ops_.bsu * ub - ops_.s * p;
    Mat juu, jup, jpu, jpp;
    if (with_jacobian)
    {
      juu = ops_.mass / dt_ + ops_.diffusion;
      jup = ops_.div.transpose();
      jpu = ops_.div - ops_.mtilde / dt_ - ops_.bsu;
      jpp = -ops_.s;
    }
    Vec tmp;
    Mat jtmp;
    Mat *jp = with_jacobian ? &jtmp : nullptr;
    if (ops_.nonlinear)
    {
      quadratic(ops_.conv, ub, tmp, jp);
      fu += tmp;
      if (with_jacobian)
        juu += jtmp;
    }
    if (ops_.supg)
    {
      const Mat jt1 = contract_test(ops_.e1, ub);
      const Mat jt2 = contract_test(ops_.e2, ub);
      const Mat jt4 = contract_test(ops_.e4, ub);
      fu += jt1.transpose() * d + jt2.transpose() * ub + jt4.transpose() * p;
      quadratic(contract_test(ops_.e3, ub), ub, tmp, jp);
      fu += tmp;
      if (with_jacobian)
      {
        juu += jtmp + jt1.transpose() / dt_ + jt2.transpose();
        jup += jt4.transpose();
      }
      quadratic(ops_.f3, ub, tmp, jp);
      fp += tmp;
      if (with_jacobian)
        jpu += jtmp;
    }
    out.r.resize(n + np);
    out.r << fu.tail(n), fp;
    if (with_jacobian)
    {
      out.j.resize(n + np, n + np);
      out.j << juu.bottomRightCorner(n, n), jup.bottomRows(n), jpu.rightCols(n), jpp;
    }
  }

private:
  OnlineOperators ops_;
  double dt_;
};

class ProjectingStepper : public Stepper
{
public:
  ProjectingStepper(const FullOrderModel &fom, const ReducedModel &rm, const Physical &phys, bool stabilized)
    : fom_(fom), phi_(rm.phi), zp_(rm.zp), phys_(phys), stabilized_(stabilized),
      ops_(fom.linear_operators(phys, stabilized))
  {}

  void evaluate(const Vec &x, const Vec &ub_old, bool with_jacobian, Residual &out) const override
  {
    const int nv = static_cast<int>(phi_.cols());
    const int np = static_cast<int>(zp_.cols());
    const int n = nv - 1;
    Vec ub(nv);
    ub[0] = 1.0;
    ub.tail(n) = x.head(n);
    const auto z = phi_.rightCols(n);
    const StepResidual r = fom_.step_residual(phys_, ops_, phi_ * ub, zp_ * x.tail(np), phi_ * ub_old,
                                              stabilized_, with_jacobian);
    out.r.resize(n + np);
    out.r << z.transpose() * r.ru, zp_.transpose() * r.rp;
    if (with_jacobian)
    {
      out.j.resize(n + np, n + np);
      out.j << z.transpose() * (r.juu * z), z.transpose() * (r.jup * zp_), zp_.transpose() * (r.jpu * z),
        zp_.transpose() * (r.jpp * zp_);
    }
  }

private:
  const FullOrderModel &fom_;
  Mat phi_, zp_;
  Physical phys_;
  bool stabilized_;
  LinearOperators ops_;
};

OnlineOperators online_operators(const ReducedModel &rm, const Physical &phys, bool nonlinear)
{
  OnlineOperators ops;
  ops.mass = rm.mass.assemble(phys);
  ops.diffusion = rm.diffusion.assemble(phys);
  ops.div = rm.div.assemble(phys);
  ops.mtilde = rm.mtilde.assemble(phys);
  ops.bsu = rm.bsu.assemble(phys);
  ops.s = rm.s.assemble(phys);
  ops.nonlinear = nonlinear;
  if (nonlinear)
  {
    if (!rm.has_trilinear)
      throw UsageError("archive has no trilinear tensors; use the project-each-step mode");
    ops.conv = rm.conv.assemble(phys);
    ops.supg = rm.e1.rows > 0;
    if (ops.supg)
    {
      ops.e1 = rm.e1.assemble(phys);
      ops.e2 = rm.e2.assemble(phys);
      ops.e3 = rm.e3.assemble(phys);
      ops.e4 = rm.e4.assemble(phys);
      ops.f3 = rm.f3.assemble(phys);
    }
  }
  return ops;
}

std::string label(const RomConfig &config)
{
  std::ostringstream os;
  os << "strategy " << to_string(config.strategy) << ", N = " << config.n;
  return os.str();
}

RomSolution start(const ReducedModel &archive, const RomConfig &config, ReducedModel &rm, Physical &phys)
{
  rm = select_for_strategy(archive, config);
  phys = physical_parameters(rm.problem, config.mu);
  if (rm.fixed_length && std::abs(*rm.fixed_length - phys.length) > 1e-12)
    throw UsageError("archive tensors were folded at a fixed length");
  RomSolution sol;
  sol.strategy = config.strategy;
  sol.mu = config.mu;
  sol.time = config.time.value_or(rm.time);
  if (!(sol.time.dt > 0.0) || sol.time.steps < 0)
    throw DomainError("invalid time grid");
  sol.velocity.push_back(Vec::Zero(rm.velocity_dim() - 1));
  sol.pressure.push_back(Vec::Zero(rm.n_p));
  sol.newton_iterations.push_back(0);
  sol.residuals.push_back(0.0);
  return sol;
}

Vec augmented(const Vec &u)
{
  Vec ub(u.size() + 1);
  ub[0] = 1.0;
  ub.tail(u.size()) = u;
  return ub;
}

} // namespace

RomSolution solve_rom_stokes(const ReducedModel &archive, const RomConfig &config)
{
  if (archive.problem != ProblemKind::Stokes)
    throw UsageError("solve_rom_stokes: archive is not a Stokes model");
  ReducedModel rm;
  Physical phys;
  RomSolution sol = start(archive, config, rm, phys);
  const TensorStepper stepper(online_operators(rm, phys, false), sol.time.dt);
  const int n = rm.velocity_dim() - 1, np = rm.n_p;

  Vec x = Vec::Zero(n + np);
  Residual res;
  stepper.evaluate(x, augmented(sol.velocity[0]), true, res);
  const Eigen::PartialPivLU<Mat> lu(res.j);
  if (!(lu.rcond() > 1e-15))
    throw SolverError("reduced Stokes matrix is singular (" + label(config) + ")");

  for (int k = 1; k <= sol.time.steps; ++k)
  {
    const Vec ub_old = augmented(sol.velocity.back());
    stepper.evaluate(x, ub_old, false, res);
    for (int pass = 0; pass < 2; ++pass)
    {
      x -= lu.solve(res.r);
      stepper.evaluate(x, ub_old, false, res);
    }
    const double rn = res.r.norm();
    if (!std::isfinite(rn))
      throw SolverError("reduced Stokes solve produced non-finite values (" + label(config) + ")", k, rn);
    sol.velocity.push_back(x.head(n));
    sol.pressure.push_back(x.tail(np));
    sol.newton_iterations.push_back(0);
    sol.residuals.push_back(rn);
  }
  sol.model = std::make_shared<const ReducedModel>(std::move(rm));
  return sol;
}

RomSolution solve_rom_navier_stokes(const ReducedModel &archive, const RomConfig &config, const FullOrderModel *fom)
{
  if (archive.problem != ProblemKind::NavierStokes)
    throw UsageError("solve_rom_navier_stokes: archive is not a Navier-Stokes model");
  ReducedModel rm;
  Physical phys;
  RomSolution sol = start(archive, config, rm, phys);
  std::unique_ptr<Stepper> stepper;
  if (config.trilinear == TrilinearMode::Tensor)
    stepper = std::make_unique<TensorStepper>(online_operators(rm, phys, true), sol.time.dt);
  else
  {
    if (!fom)
      throw UsageError("project-each-step needs the full-order model");
    if (fom->settings().time.dt != sol.time.dt || fom->settings().scheme != rm.scheme ||
        fom->velocity_space().dof_count() != rm.phi.rows())
      throw UsageError("full-order model does not match the archive");
    stepper = std::make_unique<ProjectingStepper>(*fom, rm, phys, stabilized_online(config.strategy));
  }

  const int n = rm.velocity_dim() - 1, np = rm.n_p;
  const NewtonSettings &nw = rm.newton;
  Vec x = Vec::Zero(n + np);
  Residual res, trial;
  for (int k = 1; k <= sol.time.steps; ++k)
  {
    const Vec ub_old = augmented(sol.velocity.back());
    int it = 0;
    double r0 = 0.0, rn = 0.0;
    while (true)
    {
      stepper->evaluate(x, ub_old, true, res);
      rn = res.r.norm();
      if (it == 0)
        r0 = rn;
      if (!std::isfinite(rn))
        throw SolverError("reduced Newton residual is not finite (" + label(config) + ")", k, rn);
      if (it > 0 && (rn <= nw.abs_tol || rn <= nw.rel_tol * r0))
        break;
      if (it == nw.max_iterations)
        throw SolverError("reduced Newton did not converge (" + label(config) + ")", k, rn);
      const Eigen::PartialPivLU<Mat> lu(res.j);
      const Vec dx = lu.solve(res.r);
      double alpha = 1.0;
      bool accepted = false;
      for (int halving = 0; halving <= 5 && !accepted; ++halving, alpha *= 0.5)
      {
        const Vec xt = x - alpha * dx;
        stepper->evaluate(xt, ub_old, false, trial);
        const double rt = trial.r.norm();
        if (std::isfinite(rt) && (rt < rn || rt <= nw.abs_tol))
        {
          x = xt;
          accepted = true;
        }
      }
      if (!accepted)
        throw SolverError("reduced Newton diverged after damping (" + label(config) + ")", k, rn);
      ++it;
    }
    sol.velocity.push_back(x.head(n));
    sol.pressure.push_back(x.tail(np));
    sol.newton_iterations.push_back(it);
    sol.residuals.push_back(rn);
  }
  sol.model = std::make_shared<const ReducedModel>(std::move(rm));
  return sol;
}

RomSolution solve_rom(const ReducedModel &archive, const RomConfig &config, const FullOrderModel *fom)
{
  return archive.problem == ProblemKind::Stokes ? solve_rom_stokes(archive, config)
                                                : solve_rom_navier_stokes(archive, config, fom);
}

Fields reconstruct(const RomSolution &sol, int k)
{
  if (!sol.model)
    throw UsageError("reconstruct: solution carries no basis");
  if (k < 0 || k > sol.steps())
    throw UsageError("reconstruct: time index out of range");
  return {sol.model->phi * augmented(sol.velocity[k]), sol.model->zp * sol.pressure[k]};
}

Vec project_velocity(const ReducedModel &rm, const Vec &homogenized, const InnerProduct &x)
{
  const Mat z = rm.phi.rightCols(rm.velocity_dim() - 1);
  return x.gram(z, z).ldlt().solve(x.gram(z, homogenized));
}

} // namespace rbstab
