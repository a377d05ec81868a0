#include "rbstab/full_order.hpp"

#include "rbstab/io.hpp"
#include "rbstab/nonlinear.hpp"

#include <Eigen/SparseLU>

#include <cctype>
#include <cmath>
#include <sstream>

namespace rbstab
{

std::string to_string(ProblemKind kind)
{
  return kind == ProblemKind::Stokes ? "stokes" : "navier-stokes";
}

std::string to_string(Scheme scheme)
{
  switch (scheme)
  {
    case Scheme::None:
      return "none";
    case Scheme::FrancaHughes:
      return "franca-hughes";
    case Scheme::PressureJump:
      return "pressure-jump";
    case Scheme::Supg:
      return "supg";
  }
  return "?";
}

std::string to_string(const FePair &pair)
{
  auto deg = [](SpaceKind k) {
    switch (k)
    {
      case SpaceKind::ScalarP0:
        return "P0";
      case SpaceKind::ScalarP1:
      case SpaceKind::VectorP1:
        return "P1";
      default:
        return "P2";
    }
  };
  return std::string(deg(pair.velocity)) + deg(pair.pressure);
}

namespace
{

// Case and separator insensitive: "FrancaHughes" == "franca-hughes".
std::string canonical(const std::string &name)
{
  std::string out;
  for (char c : name)
    if (c != '-' && c != '_' && c != ' ')
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

} // namespace

ProblemKind problem_from_string(const std::string &name)
{
  const std::string c = canonical(name);
  if (c == "stokes")
    return ProblemKind::Stokes;
  if (c == "navierstokes" || c == "ns")
    return ProblemKind::NavierStokes;
  throw UsageError("unknown problem: " + name);
}

Scheme scheme_from_string(const std::string &name)
{
  for (Scheme s : {Scheme::None, Scheme::FrancaHughes, Scheme::PressureJump, Scheme::Supg})
    if (canonical(to_string(s)) == canonical(name))
      return s;
  throw UsageError("unknown scheme: " + name);
}

FePair fe_pair_from_string(const std::string &name)
{
  if (name == "P2P1")
    return {SpaceKind::VectorP2, SpaceKind::ScalarP1};
  if (name == "P1P1")
    return {SpaceKind::VectorP1, SpaceKind::ScalarP1};
  if (name == "P2P2")
    return {SpaceKind::VectorP2, SpaceKind::ScalarP2};
  if (name == "P1P0")
    return {SpaceKind::VectorP1, SpaceKind::ScalarP0};
  throw UsageError("unknown FE pair: " + name);
}

TimeGrid TimeGrid::from_final_time(double final_time, double dt)
{
  if (!(dt > 0.0) || !(final_time > 0.0))
    throw DomainError("time grid: dt and T must be positive");
  const double k = final_time / dt;
  const long steps = std::lround(k);
  if (steps < 1 || std::abs(k - static_cast<double>(steps)) > 1e-9 * std::max(1.0, k))
    throw UsageError("time grid: T is not a whole number of steps");
  return {dt, static_cast<int>(steps)};
}

void validate(const FomSettings &s)
{
  const bool p0 = s.pair.pressure == SpaceKind::ScalarP0;
  if (s.pair.velocity != SpaceKind::VectorP1 && s.pair.velocity != SpaceKind::VectorP2)
    throw UsageError("velocity space must be VectorP1 or VectorP2");
  if (s.pair.pressure == SpaceKind::VectorP1 || s.pair.pressure == SpaceKind::VectorP2)
    throw UsageError("pressure space must be scalar");
  if (s.scheme == Scheme::PressureJump && !p0)
    throw UsageError("pressure-jump stabilization needs a P0 pressure");
  if (p0 && s.scheme != Scheme::PressureJump)
    throw UsageError("P1P0 needs the pressure-jump scheme");
  if (s.scheme == Scheme::Supg && s.problem != ProblemKind::NavierStokes)
    throw UsageError("SUPG applies to Navier-Stokes only");
  if (s.scheme == Scheme::FrancaHughes && s.problem != ProblemKind::Stokes)
    throw UsageError("Franca-Hughes applies to Stokes only");
  if (s.scheme != Scheme::None && !(s.delta > 0.0))
    throw DomainError("stabilization coefficient must be positive");
  if (!(s.time.dt > 0.0) || s.time.steps < 1)
    throw DomainError("time grid must have positive dt and at least one step");
  if (s.newton.max_iterations < 1)
    throw UsageError("Newton needs at least one iteration");
}

FullOrderModel::FullOrderModel(std::shared_ptr<const Mesh> mesh, const FomSettings &settings)
  : mesh_(std::move(mesh)), settings_(settings)
{
  validate(settings_);
  vel_ = std::make_unique<FeSpace>(mesh_, settings_.pair.velocity);
  pres_ = std::make_unique<FeSpace>(mesh_, settings_.pair.pressure);
  lifting_ = build_lifting(*vel_, settings_.lid);
  mean_ = pressure_mean_weights(*pres_);
  mass_u_ = assemble_mass(*vel_, Physical{1.0, 1.0});
  mass_p_ = assemble_pressure_mass(*pres_);
  xu_ = InnerProduct(velocity_inner_product(*vel_), vel_->free_dofs());
  xp_ = InnerProduct(mass_p_);
}

Physical physical_parameters(ProblemKind problem, const Vec2 &mu)
{
  if (!(mu[0] > 0.0) || !(mu[1] > 0.0))
    throw DomainError("parameters must be positive");
  if (problem == ProblemKind::Stokes)
    return {mu[0], mu[1]};
  return {1.0 / mu[0], mu[1]};
}

Physical FullOrderModel::physical(const Vec2 &mu) const
{
  return physical_parameters(settings_.problem, mu);
}

LinearOperators FullOrderModel::linear_operators(const Physical &phys, bool stabilized) const
{
  LinearOperators ops;
  ops.mass = assemble_mass(*vel_, phys);
  ops.diffusion = assemble_diffusion(*vel_, phys);
  ops.div = assemble_divergence(*vel_, *pres_, phys);
  const int nu = vel_->dof_count(), np = pres_->dof_count();
  ops.mtilde = SpMat(np, nu);
  ops.bsu = SpMat(np, nu);
  ops.s = SpMat(np, np);
  if (!stabilized)
    return ops;
  switch (settings_.scheme)
  {
    case Scheme::None:
      break;
    case Scheme::PressureJump:
      ops.s = assemble_pressure_jump(*pres_, settings_.delta);
      break;
    case Scheme::FrancaHughes:
    case Scheme::Supg:
    {
      FrancaHughesBlocks fh = assemble_franca_hughes(*vel_, *pres_, phys, settings_.delta);
      ops.mtilde = std::move(fh.mtilde);
      ops.bsu = std::move(fh.bsu);
      ops.s = std::move(fh.s);
      break;
    }
  }
  return ops;
}

StepResidual FullOrderModel::step_residual(const Physical &phys, const LinearOperators &ops, const Vec &u,
                                           const Vec &p, const Vec &u_old, bool stabilized,
                                           bool with_jacobian) const
{
  const double dt = settings_.time.dt;
  StepResidual r;
  const Vec du = (u - u_old) / dt;
  r.ru = ops.mass * du + ops.diffusion * u + ops.div.transpose() * p;
  r.rp = ops.div * u - ops.mtilde * du - ops.bsu * u - ops.s * p;
  if (with_jacobian)
  {
    r.juu = ops.mass / dt + ops.diffusion;
    r.jup = ops.div.transpose();
    r.jpu = ops.div - ops.mtilde / dt - ops.bsu;
    r.jpp = -ops.s;
  }
  if (settings_.problem == ProblemKind::NavierStokes)
  {
    const double delta = (stabilized && settings_.scheme == Scheme::Supg) ? settings_.delta : 0.0;
    NavierStokesTerms nl;
    navier_stokes_terms(*vel_, *pres_, phys, delta, dt, u, p, u_old, with_jacobian, nl);
    r.ru += nl.ru;
    r.rp += nl.rp;
    if (with_jacobian)
    {
      r.juu += nl.juu;
      r.jup += nl.jup;
      r.jpu += nl.jpu;
    }
  }
  return r;
}

namespace
{

// Full system [u, p, lambda]: Dirichlet velocity rows become identity rows, the
// continuity rows gain the mean-value multiplier, and the last row fixes the mean.
struct ConstrainedSystem
{
  const FeSpace &vel;
  const Vec &mean;
  std::vector<char> is_dirichlet;

  ConstrainedSystem(const FeSpace &v, const Vec &m) : vel(v), mean(m), is_dirichlet(v.dof_count(), 0)
  {
    for (int d : v.dirichlet_dofs())
      is_dirichlet[d] = 1;
  }

  int nu() const { return vel.dof_count(); }
  int np() const { return static_cast<int>(mean.size()); }
  int size() const { return nu() + np() + 1; }

  SpMat matrix(const StepResidual &r) const
  {
    std::vector<Triplet> trip;
    trip.reserve(r.juu.nonZeros() + r.jup.nonZeros() + r.jpu.nonZeros() + r.jpp.nonZeros() + 2 * np() + nu());
    auto add = [&](const SpMat &m, int r0, int c0, bool skip_dirichlet) {
      for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
          if (!skip_dirichlet || !is_dirichlet[it.row()])
            trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
    };
    add(r.juu, 0, 0, true);
    add(r.jup, 0, nu(), true);
    add(r.jpu, nu(), 0, false);
    add(r.jpp, nu(), nu(), false);
    for (int d = 0; d < nu(); ++d)
      if (is_dirichlet[d])
        trip.emplace_back(d, d, 1.0);
    for (int k = 0; k < np(); ++k)
    {
      trip.emplace_back(nu() + k, size() - 1, mean[k]);
      trip.emplace_back(size() - 1, nu() + k, mean[k]);
    }
    SpMat k(size(), size());
    k.setFromTriplets(trip.begin(), trip.end());
    k.makeCompressed();
    return k;
  }

  // Newton update; boundary values are reimposed exactly.
  void update(Vec &x, const Vec &dx, const Vec &boundary) const
  {
    x -= dx;
    for (int d : vel.dirichlet_dofs())
      x[d] = boundary[d];
  }

  Vec residual(const StepResidual &r, const Vec &x, const Vec &boundary) const
  {
    Vec out(size());
    const double lambda = x[size() - 1];
    for (int d = 0; d < nu(); ++d)
      out[d] = is_dirichlet[d] ? x[d] - boundary[d] : r.ru[d];
    out.segment(nu(), np()) = r.rp + lambda * mean;
    out[size() - 1] = mean.dot(x.segment(nu(), np()));
    return out;
  }
};

Vec pack(const Vec &u, const Vec &p, double lambda)
{
  Vec x(u.size() + p.size() + 1);
  x << u, p, lambda;
  return x;
}

} // namespace

FomSolution FullOrderModel::solve(const Vec2 &mu) const
{
  return settings_.problem == ProblemKind::Stokes ? solve_stokes(mu) : solve_navier_stokes(mu);
}

FomSolution FullOrderModel::solve_stokes(const Vec2 &mu) const
{
  if (settings_.problem != ProblemKind::Stokes)
    throw UsageError("solve_stokes called on a Navier-Stokes model");
  const Physical phys = physical(mu);
  const LinearOperators ops = linear_operators(phys);
  const ConstrainedSystem sys(*vel_, mean_);
  const int nu = sys.nu(), np = sys.np();
  const Vec &g = lifting_.coefficients;

  FomSolution sol;
  sol.mu = mu;
  sol.velocity.push_back(g);
  sol.pressure.push_back(Vec::Zero(np));
  sol.newton_iterations.push_back(0);
  sol.residuals.push_back(0.0);

  // The step is affine in the unknowns, so the Jacobian is factored once.
  StepResidual r = step_residual(phys, ops, g, Vec::Zero(np), g, true, true);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(sys.matrix(r));
  if (lu.info() != Eigen::Success)
    throw SolverError("Stokes system is singular", 0);

  Vec x = pack(g, Vec::Zero(np), 0.0);
  for (int k = 1; k <= settings_.time.steps; ++k)
  {
    const Vec u_old = sol.velocity.back();
    r = step_residual(phys, ops, x.head(nu), x.segment(nu, np), u_old, true, false);
    Vec res = sys.residual(r, x, g);
    const double r0 = res.norm();
    double rn = r0;
    for (int pass = 0; pass < 3 && rn > 1e-10 * r0 && rn > 0.0; ++pass)
    {
      sys.update(x, lu.solve(res), g);
      r = step_residual(phys, ops, x.head(nu), x.segment(nu, np), u_old, true, false);
      res = sys.residual(r, x, g);
      rn = res.norm();
    }
    if (!std::isfinite(rn) || rn > 1e-10 * r0)
      throw SolverError("Stokes linear solve did not reach its tolerance", k, rn);
    sol.velocity.push_back(x.head(nu));
    sol.pressure.push_back(x.segment(nu, np));
    sol.newton_iterations.push_back(0);
    sol.residuals.push_back(rn);
  }
  return sol;
}

FomSolution FullOrderModel::solve_navier_stokes(const Vec2 &mu) const
{
  if (settings_.problem != ProblemKind::NavierStokes)
    throw UsageError("solve_navier_stokes called on a Stokes model");
  const Physical phys = physical(mu);
  const LinearOperators ops = linear_operators(phys);
  const ConstrainedSystem sys(*vel_, mean_);
  const int nu = sys.nu(), np = sys.np();
  const Vec &g = lifting_.coefficients;
  const NewtonSettings &nw = settings_.newton;

  FomSolution sol;
  sol.mu = mu;
  sol.velocity.push_back(g);
  sol.pressure.push_back(Vec::Zero(np));
  sol.newton_iterations.push_back(0);
  sol.residuals.push_back(0.0);

  Vec x = pack(g, Vec::Zero(np), 0.0);
  Eigen::SparseLU<SpMat> lu;
  for (int k = 1; k <= settings_.time.steps; ++k)
  {
    const Vec u_old = sol.velocity.back();
    double r0 = 0.0, rn = 0.0;
    int it = 0;
    while (true)
    {
      const StepResidual r = step_residual(phys, ops, x.head(nu), x.segment(nu, np), u_old, true, true);
      const Vec res = sys.residual(r, x, g);
      rn = res.norm();
      if (it == 0)
        r0 = rn;
      if (!std::isfinite(rn))
        throw SolverError("Newton residual is not finite", k, rn);
      if (it > 0 && (rn <= nw.abs_tol || rn <= nw.rel_tol * r0))
        break;
      if (it == nw.max_iterations)
        throw SolverError("Newton did not converge", k, rn);
      lu.compute(sys.matrix(r));
      if (lu.info() != Eigen::Success)
        throw SolverError("singular Newton Jacobian", k, rn);
      sys.update(x, lu.solve(res), g);
      ++it;
    }
    sol.velocity.push_back(x.head(nu));
    sol.pressure.push_back(x.segment(nu, np));
    sol.newton_iterations.push_back(it);
    sol.residuals.push_back(rn);
  }
  return sol;
}

void homogenize(const FullOrderModel &model, const FomSolution &sol, Mat &velocity, Mat &pressure)
{
  const int steps = sol.steps();
  const Vec &g = model.lifting().coefficients;
  velocity.resize(g.size(), steps);
  pressure.resize(model.pressure_space().dof_count(), steps);
  for (int k = 1; k <= steps; ++k)
  {
    velocity.col(k - 1) = sol.velocity[k] - g;
    pressure.col(k - 1) = sol.pressure[k];
  }
}

SnapshotSet compute_snapshots(const FullOrderModel &model, const std::vector<Vec2> &training)
{
  if (training.empty())
    throw UsageError("compute_snapshots: empty training set");
  SnapshotSet set;
  set.time = model.settings().time;
  for (const Vec2 &mu : training)
  {
    FomSolution sol;
    try
    {
      sol = model.solve(mu);
    }
    catch (const SolverError &e)
    {
      std::ostringstream os;
      os << e.what() << " at mu = (" << mu[0] << ", " << mu[1] << ")";
      throw SolverError(os.str(), e.step(), e.residual());
    }
    Mat u, p;
    homogenize(model, sol, u, p);
    set.mu.push_back(mu);
    set.velocity.push_back(std::move(u));
    set.pressure.push_back(std::move(p));
  }
  return set;
}

void write_snapshots(const std::filesystem::path &dir, const SnapshotSet &set, const FullOrderModel &model)
{
  std::filesystem::create_directories(dir);
  KeyValues kv;
  kv["format"] = "rbstab-snapshots 1";
  kv["count"] = std::to_string(set.size());
  std::ostringstream dt;
  dt.precision(17);
  dt << set.time.dt;
  kv["dt"] = dt.str();
  kv["steps"] = std::to_string(set.time.steps);
  kv["velocity_space"] = to_string(model.velocity_space().kind());
  kv["pressure_space"] = to_string(model.pressure_space().kind());
  kv["n_u"] = std::to_string(model.velocity_space().dof_count());
  kv["n_p"] = std::to_string(model.pressure_space().dof_count());
  for (int i = 0; i < set.size(); ++i)
  {
    std::ostringstream m;
    m.precision(17);
    m << set.mu[i][0] << ' ' << set.mu[i][1];
    kv["mu_" + std::to_string(i)] = m.str();
    write_matrix(dir / ("velocity_" + std::to_string(i) + ".rba"), set.velocity[i]);
    write_matrix(dir / ("pressure_" + std::to_string(i) + ".rba"), set.pressure[i]);
  }
  write_key_values(dir / "manifest.txt", kv);
}

SnapshotSet read_snapshots(const std::filesystem::path &dir)
{
  const KeyValues kv = read_key_values(dir / "manifest.txt");
  auto get = [&](const std::string &key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw UsageError("snapshot manifest lacks " + key);
    return it->second;
  };
  if (get("format") != "rbstab-snapshots 1")
    throw UsageError("unsupported snapshot format");
  SnapshotSet set;
  set.time.dt = std::stod(get("dt"));
  set.time.steps = std::stoi(get("steps"));
  const int count = std::stoi(get("count"));
  for (int i = 0; i < count; ++i)
  {
    std::istringstream m(get("mu_" + std::to_string(i)));
    Vec2 mu;
    m >> mu[0] >> mu[1];
    set.mu.push_back(mu);
    set.velocity.push_back(read_matrix(dir / ("velocity_" + std::to_string(i) + ".rba")));
    set.pressure.push_back(read_matrix(dir / ("pressure_" + std::to_string(i) + ".rba")));
  }
  return set;
}

std::vector<Vec2> tensor_grid(const Vec2 &lo, const Vec2 &hi, int n1, int n2)
{
  if (n1 < 1 || n2 < 1)
    throw UsageError("tensor_grid: need at least one point per direction");
  auto pt = [](double a, double b, int n, int i) { return n == 1 ? 0.5 * (a + b) : a + (b - a) * i / (n - 1); };
  std::vector<Vec2> out;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i)
      out.emplace_back(pt(lo[0], hi[0], n1, i), pt(lo[1], hi[1], n2, j));
  return out;
}

} // namespace rbstab
