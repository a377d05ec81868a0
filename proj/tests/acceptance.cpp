// Acceptance checks: one PASS/FAIL line per criterion, tolerances fixed below.

#include "oracle.hpp"

#include "rbstab/experiment.hpp"
#include "rbstab/nonlinear.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace rbstab;

namespace
{

constexpr double kOracleTol = 1e-13;
constexpr double kAffineTol = 1e-12;
constexpr double kInfSupSpread = 0.5;
constexpr double kInfSupSlack = 1e-12;
constexpr double kStokesReproTol = 1e-8;
constexpr double kNsReproTol = 1e-6;
constexpr double kOracleSeconds = 5.0;
constexpr double kStokesReproSeconds = 600.0;
constexpr double kOrderingMargin = 2.0;
constexpr double kDtSlack = 0.10;
constexpr double kRateTol = 0.25;
constexpr int kNewtonMax = 25;
constexpr double kTrilinearTol = 1e-10;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<const Mesh> square(int n)
{
  return std::make_shared<const Mesh>(build_structured_mesh(n, n));
}

Vec random_vec(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01;
  Vec v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n01(rng);
  return v;
}

std::string fmt(double x)
{
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << x;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence()
{
  const auto t0 = Clock::now();
  auto mesh = square(4);
  double worst = 0.0;
  std::string worst_name;
  auto record = [&](const std::string &name, const Mat &a, const Mat &b) {
    const double d = oracle::rel_diff(a, b);
    if (d > worst || worst_name.empty())
    {
      worst = std::max(worst, d);
      worst_name = name;
    }
  };
  for (const char *pname : {"P1P1", "P2P1", "P2P2", "P1P0"})
  {
    const FePair pair = fe_pair_from_string(pname);
    const FeSpace v(mesh, pair.velocity), p(mesh, pair.pressure);
    const Physical phys{0.43, 1.37};
    const oracle::Assembler o(v, p, phys.nu, phys.length);
    const std::string tag = std::string(pname) + " ";
    record(tag + "mass", Mat(assemble_mass(v, phys)), o.mass());
    record(tag + "diffusion", Mat(assemble_diffusion(v, phys)), o.diffusion());
    record(tag + "divergence", Mat(assemble_divergence(v, p, phys)), o.divergence());
    const Vec w = random_vec(v.dof_count(), 3);
    record(tag + "convection", Mat(assemble_convection(v, phys, w)), o.convection(w));
    if (pair.pressure == SpaceKind::ScalarP0)
      continue;
    const FrancaHughesBlocks fh = assemble_franca_hughes(v, p, phys, 0.05);
    record(tag + "fh mtilde", Mat(fh.mtilde), o.fh_mtilde(0.05));
    record(tag + "fh s", Mat(fh.s), o.fh_s(0.05));
    if (v.degree() > 1)
      record(tag + "fh bsu", Mat(fh.bsu), o.fh_bsu(0.05));
    if (pair.velocity == SpaceKind::VectorP2 && pair.pressure == SpaceKind::ScalarP1)
      continue;
    const Physical ns{1.0 / 130.0, 1.37};
    const oracle::Assembler on(v, p, ns.nu, ns.length);
    const SupgBlocks sb = assemble_supg(v, p, ns, 0.05, w);
    const oracle::Assembler::Supg so = on.supg(0.05, w);
    record(tag + "supg uv_time", Mat(sb.uv_time), so.uv_time);
    record(tag + "supg uv_conv", Mat(sb.uv_conv), so.uv_conv);
    record(tag + "supg pv", Mat(sb.pv), so.pv);
    record(tag + "supg uq_time", Mat(sb.uq_time), so.uq_time);
    record(tag + "supg uq_conv", Mat(sb.uq_conv), so.uq_conv);
    record(tag + "supg pq", Mat(sb.pq), so.pq);
    if (v.degree() > 1)
    {
      record(tag + "supg uv_visc", Mat(sb.uv_visc), so.uv_visc);
      record(tag + "supg uq_visc", Mat(sb.uq_visc), so.uq_visc);
    }
    const Vec u = random_vec(v.dof_count(), 5), u_old = random_vec(v.dof_count(), 6);
    const Vec pr = random_vec(p.dof_count(), 7);
    NavierStokesTerms t;
    navier_stokes_terms(v, p, ns, 0.05, 0.02, u, pr, u_old, true, t);
    const oracle::Assembler::NsTerms r = on.navier_stokes(0.05, 0.02, u, pr, u_old);
    record(tag + "ns ru", t.ru, r.ru);
    record(tag + "ns rp", t.rp, r.rp);
    record(tag + "ns juu", Mat(t.juu), r.juu);
    record(tag + "ns jup", Mat(t.jup), r.jup);
    record(tag + "ns jpu", Mat(t.jpu), r.jpu);
  }
  const FeSpace p0(mesh, SpaceKind::ScalarP0);
  // Jump matrix against a direct edge sum.
  Mat jump = Mat::Zero(p0.dof_count(), p0.dof_count());
  for (const Edge &e : mesh->edges())
    if (!e.on_boundary())
    {
      const double h = (mesh->vertices()[e.vertices[0]] - mesh->vertices()[e.vertices[1]]).norm();
      const int a = e.triangles[0], b = e.triangles[1];
      const double c = 0.05 * h * h;
      jump(a, a) += c;
      jump(b, b) += c;
      jump(a, b) -= c;
      jump(b, a) -= c;
    }
  record("P1P0 jump", Mat(assemble_pressure_jump(p0, 0.05)), jump);
  const double secs = seconds_since(t0);
  return {worst <= kOracleTol && secs < kOracleSeconds,
          "max rel diff " + fmt(worst) + " (" + worst_name + "), " + fmt(secs) + " s"};
}

Outcome affine_exactness()
{
  auto mesh = square(4);
  const FeSpace v(mesh, SpaceKind::VectorP2), p(mesh, SpaceKind::ScalarP2);
  const AffineMatrix am = affine_mass(v), aa = affine_diffusion(v), ab = affine_divergence(v, p);
  const AffineFrancaHughes fh = affine_franca_hughes(v, p, 0.05);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u1(0.25, 0.75), u2(1.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
  {
    const Physical phys{u1(rng), u2(rng)};
    const FrancaHughesBlocks d = assemble_franca_hughes(v, p, phys, 0.05);
    worst = std::max({worst, oracle::rel_diff(Mat(am.assemble(phys)), Mat(assemble_mass(v, phys))),
                      oracle::rel_diff(Mat(aa.assemble(phys)), Mat(assemble_diffusion(v, phys))),
                      oracle::rel_diff(Mat(ab.assemble(phys)), Mat(assemble_divergence(v, p, phys))),
                      oracle::rel_diff(Mat(fh.mtilde.assemble(phys)), Mat(d.mtilde)),
                      oracle::rel_diff(Mat(fh.bsu.assemble(phys)), Mat(d.bsu)),
                      oracle::rel_diff(Mat(fh.s.assemble(phys)), Mat(d.s))});
  }
  return {worst <= kAffineTol, "max rel Frobenius gap " + fmt(worst)};
}

// Stokes P2P2 study shared by several criteria.
ExperimentConfig stokes_config()
{
  ExperimentConfig c;
  c.greedy.max_basis = 30;
  c.greedy.max_iterations = 25;
  c.greedy.modes_per_step = 2;
  c.n_s = 30;
  c.infsup = false;
  return c;
}

struct Study
{
  std::unique_ptr<FullOrderModel> model;
  OfflineResult offline;
};

const Study &stokes_study()
{
  static const Study s = [] {
    Study out;
    const ExperimentConfig c = stokes_config();
    out.model = std::make_unique<FullOrderModel>(square(c.nx), c.fom_settings(c.dt.front()));
    out.offline = run_offline(*out.model, c);
    return out;
  }();
  return s;
}

Outcome infsup_ordering()
{
  std::ostringstream os;
  bool pass = true;
  double lo = 1e300, hi = 0.0;
  FomSettings fs;
  fs.pair = fe_pair_from_string("P2P1");
  fs.scheme = Scheme::None;
  const Vec2 mu(0.5, 1.5);
  os << "beta(P2P1):";
  for (int n : {8, 16, 32})
  {
    const FullOrderModel model(square(n), fs);
    const double b = infsup_constant(model, mu).beta;
    os << " " << n << "x" << n << " " << fmt(b);
    pass = pass && b > 0.0;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  const double spread = (hi - lo) / hi;
  pass = pass && spread < kInfSupSpread;
  os << ", spread " << fmt(spread) << "; reduced:";

  const Study &st = stokes_study();
  const ReducedBasis &b = st.offline.basis;
  for (int n : {5, 10, 20})
  {
    const Mat zp = b.zp.leftCols(n);
    Mat zus(b.zu.rows(), 2 * n);
    zus << b.zu.leftCols(n), b.zs.leftCols(n);
    const double with = reduced_infsup(*st.model, mu, zus, zp);
    const double without = reduced_infsup(*st.model, mu, b.zu.leftCols(n), zp);
    os << " N=" << n << " " << fmt(with) << " vs " << fmt(without);
    pass = pass && with >= without - kInfSupSlack;
  }
  return {pass, os.str()};
}

Outcome snapshot_reproduction()
{
  std::ostringstream os;
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.pair = fe_pair_from_string("P1P1");
  c.scheme = Scheme::FrancaHughes;
  c.nx = c.ny = 16;
  c.train_n1 = c.train_n2 = 5;
  c.final_time = 0.2;
  c.dt = {0.02};
  c.greedy.max_basis = 250;
  c.greedy.max_iterations = 25;
  c.greedy.modes_per_step = 10;
  c.n_s = 30;
  c.strategies = {Strategy::OfflineOnlineWithSup};
  const FullOrderModel model(square(c.nx), c.fom_settings(0.02));
  const OfflineResult off = run_offline(model, c);
  const int n = std::min(off.model.n_u, off.model.n_p);
  double worst = 0.0;
  for (const Vec2 &mu : off.snapshots.mu)
  {
    const FomSolution fom = model.solve(mu);
    RomConfig rc;
    rc.strategy = Strategy::OfflineOnlineWithSup;
    rc.n = n;
    rc.mu = mu;
    const RomSolution rom = solve_rom(off.model, rc);
    worst = std::max({worst, reproduction_error(model, fom, rom, Field::Velocity),
                      reproduction_error(model, fom, rom, Field::Pressure)});
  }
  const double secs = seconds_since(t0);
  bool pass = worst <= kStokesReproTol && secs <= kStokesReproSeconds && off.model.n_u == off.model.n_p;
  os << "Stokes N_u " << off.model.n_u << " N_p " << off.model.n_p << " N_s " << off.model.n_s << ": max error "
     << fmt(worst) << " in " << fmt(secs) << " s";

  ExperimentConfig ns;
  ns.problem = ProblemKind::NavierStokes;
  ns.pair = fe_pair_from_string("P1P1");
  ns.scheme = Scheme::Supg;
  ns.nx = ns.ny = 8;
  ns.mu_min = Vec2(100.0, 1.0);
  ns.mu_max = Vec2(200.0, 1.0);
  ns.train_n1 = 3;
  ns.train_n2 = 1;
  ns.final_time = 0.1;
  ns.dt = {0.02};
  ns.greedy.max_basis = 15;
  ns.greedy.max_iterations = 5;
  ns.greedy.modes_per_step = 5;
  ns.n_s = 10;
  ns.strategies = {Strategy::OfflineOnlineWithSup};
  const FullOrderModel nmodel(square(ns.nx), ns.fom_settings(0.02));
  const OfflineResult noff = run_offline(nmodel, ns);
  const int nn = std::min(noff.model.n_u, noff.model.n_p);
  double nworst = 0.0;
  for (const Vec2 &mu : noff.snapshots.mu)
  {
    const FomSolution fom = nmodel.solve(mu);
    RomConfig rc;
    rc.strategy = Strategy::OfflineOnlineWithSup;
    rc.n = nn;
    rc.mu = mu;
    const RomSolution rom = solve_rom(noff.model, rc);
    nworst = std::max({nworst, reproduction_error(nmodel, fom, rom, Field::Velocity),
                       reproduction_error(nmodel, fom, rom, Field::Pressure)});
  }
  pass = pass && nworst <= kNsReproTol && noff.model.n_u == noff.model.n_p;
  os << "; NS N " << nn << ": max error " << fmt(nworst);
  return {pass, os.str()};
}

struct StudyErrors
{
  double u[3], p[3]; // indexed like the strategies below
};

const StudyErrors &stokes_errors()
{
  static const StudyErrors e = [] {
    const Study &st = stokes_study();
    const ExperimentConfig c = stokes_config();
    const Vec2 mu = c.online_mu.front();
    const FomSolution fom = st.model->solve(mu);
    StudyErrors out{};
    const Strategy ss[3] = {Strategy::OfflineOnlineWithSup, Strategy::OfflineOnlineNoSup,
                            Strategy::OfflineOnlyWithSup};
    for (int i = 0; i < 3; ++i)
    {
      RomConfig rc;
      rc.strategy = ss[i];
      rc.n = 30;
      rc.mu = mu;
      try
      {
        const RomSolution rom = solve_rom(st.offline.model, rc);
        out.u[i] = l2_error_in_time(*st.model, fom, rom, Field::Velocity).average;
        out.p[i] = l2_error_in_time(*st.model, fom, rom, Field::Pressure).average;
      }
      catch (const SolverError &)
      {
        out.u[i] = out.p[i] = std::numeric_limits<double>::infinity();
      }
    }
    return out;
  }();
  return e;
}

Outcome study_ordering()
{
  const StudyErrors &e = stokes_errors();
  const bool pass = e.u[2] > kOrderingMargin * e.u[0] && e.p[2] > kOrderingMargin * e.p[0];
  return {pass, "velocity: offline-only " + fmt(e.u[2]) + " vs offline-online " + fmt(e.u[0]) +
                  "; pressure: " + fmt(e.p[2]) + " vs " + fmt(e.p[0])};
}

Outcome supremizer_pressure()
{
  const StudyErrors &e = stokes_errors();
  const bool pass = e.p[0] <= e.p[1];
  return {pass, "pressure with supremizers " + fmt(e.p[0]) + ", without " + fmt(e.p[1]) + ", ratio " +
                  fmt(e.p[1] / e.p[0])};
}

Outcome dt_sweep()
{
  ExperimentConfig c = stokes_config();
  c.dt = {0.02, 0.002, 0.0002};
  c.n = {30};
  c.n_s = 0;
  c.strategies = {Strategy::OfflineOnlineNoSup};
  c.output = std::filesystem::temp_directory_path() / "rbstab_acceptance_dt";
  std::ostringstream log;
  const ErrorReport report = run_experiment(c, log);
  std::filesystem::remove_all(c.output);
  std::ostringstream os;
  bool pass = true;
  for (Field f : {Field::Velocity, Field::Pressure})
  {
    os << to_string(f) << ":";
    double prev = -1.0;
    for (double dt : c.dt)
    {
      const ErrorRecord *r = report.find(Strategy::OfflineOnlineNoSup, 30, dt, f);
      const double e = r && r->ok ? r->series.average : std::nan("");
      os << " " << fmt(e);
      if (!std::isfinite(e) || (prev >= 0.0 && e < (1.0 - kDtSlack) * prev))
        pass = false;
      prev = e;
    }
    os << "; ";
  }
  for (const std::string &m : report.failures)
    os << "[" << m << "] ";
  return {pass, os.str()};
}

Outcome time_accuracy()
{
  FomSettings fs;
  fs.pair = fe_pair_from_string("P2P1");
  fs.scheme = Scheme::None;
  auto mesh = square(8);
  const Vec2 mu(0.57, 1.78);
  auto final_state = [&](double dt) {
    fs.time = TimeGrid::from_final_time(0.2, dt);
    return FullOrderModel(mesh, fs).solve(mu).velocity.back();
  };
  const Vec ref = final_state(0.01 / 8.0);
  const FullOrderModel probe(mesh, fs);
  const SpMat &m = probe.velocity_mass();
  auto err = [&](const Vec &u) { return std::sqrt((u - ref).dot(m * (u - ref))); };
  const double e1 = err(final_state(0.02)), e2 = err(final_state(0.01));
  const double ratio = e1 / e2;
  return {std::abs(ratio - 2.0) <= kRateTol * 2.0,
          "errors " + fmt(e1) + " (dt 0.02), " + fmt(e2) + " (dt 0.01), ratio " + fmt(ratio)};
}

Outcome ns_robustness()
{
  FomSettings fs;
  fs.problem = ProblemKind::NavierStokes;
  fs.pair = fe_pair_from_string("P1P1");
  fs.scheme = Scheme::Supg;
  fs.time = TimeGrid::from_final_time(0.5, 0.02);
  const FullOrderModel model(square(16), fs);
  std::ostringstream os;
  bool pass = true;
  for (double re : {100.0, 130.0, 200.0})
  {
    try
    {
      const FomSolution sol = model.solve(Vec2(re, 1.0));
      int most = 0;
      double worst = 0.0;
      for (int k = 1; k <= sol.steps(); ++k)
      {
        most = std::max(most, sol.newton_iterations[k]);
        worst = std::max(worst, sol.residuals[k]);
      }
      pass = pass && most <= kNewtonMax && sol.steps() == fs.time.steps;
      os << "Re " << re << ": max " << most << " iterations, residual " << fmt(worst) << "; ";
    }
    catch (const SolverError &e)
    {
      pass = false;
      os << "Re " << re << ": " << e.what() << " at step " << e.step() << "; ";
    }
  }
  return {pass, os.str()};
}

Outcome trilinear_equivalence()
{
  ExperimentConfig c;
  c.problem = ProblemKind::NavierStokes;
  c.pair = fe_pair_from_string("P1P1");
  c.scheme = Scheme::Supg;
  c.nx = c.ny = 8;
  c.mu_min = Vec2(100.0, 1.5);
  c.mu_max = Vec2(200.0, 3.0);
  c.train_n1 = c.train_n2 = 2;
  c.final_time = 0.1;
  c.dt = {0.02};
  c.greedy.max_basis = 10;
  c.greedy.modes_per_step = 5;
  c.n_s = 5;
  const FullOrderModel model(square(c.nx), c.fom_settings(0.02));
  const OfflineResult off = run_offline(model, c);
  double worst = 0.0;
  std::ostringstream os;
  for (Strategy s : {Strategy::OfflineOnlineWithSup, Strategy::OfflineOnlineNoSup, Strategy::OfflineOnlyWithSup})
  {
    RomConfig rc;
    rc.strategy = s;
    rc.n = 10;
    rc.mu = Vec2(130.0, 2.0);
    const RomSolution a = solve_rom(off.model, rc);
    rc.trilinear = TrilinearMode::ProjectEachStep;
    const RomSolution b = solve_rom(off.model, rc, &model);
    for (int k = 0; k <= a.steps(); ++k)
    {
      const double su = std::max(1.0, a.velocity[k].cwiseAbs().maxCoeff());
      const double sp = std::max(1.0, a.pressure[k].cwiseAbs().maxCoeff());
      worst = std::max({worst, (a.velocity[k] - b.velocity[k]).cwiseAbs().maxCoeff() / su,
                        (a.pressure[k] - b.pressure[k]).cwiseAbs().maxCoeff() / sp});
    }
  }
  return {worst <= kTrilinearTol, "max coefficient gap " + fmt(worst) + " (N 10, K 5)"};
}

} // namespace

int main()
{
  struct Criterion
  {
    const char *name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
    {"assembly oracle equivalence", oracle_equivalence},
    {"affine exactness", affine_exactness},
    {"inf-sup ordering", infsup_ordering},
    {"snapshot reproduction", snapshot_reproduction},
    {"offline-only less accurate than offline-online", study_ordering},
    {"supremizer pressure effect", supremizer_pressure},
    {"dt sweep error growth", dt_sweep},
    {"first-order time accuracy", time_accuracy},
    {"Navier-Stokes Newton robustness", ns_robustness},
    {"trilinear pathway equivalence", trilinear_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i)
  {
    Outcome o;
    const auto t0 = Clock::now();
    try
    {
      o = criteria[i].run();
    }
    catch (const std::exception &e)
    {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass)
      ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].name << "): "
              << o.detail << " [" << std::fixed << std::setprecision(1) << seconds_since(t0) << " s]"
              << std::defaultfloat << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
