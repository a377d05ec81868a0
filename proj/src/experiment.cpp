#include "rbstab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rbstab
{

namespace
{

std::vector<std::string> split(const std::string &text, const std::string &seps)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : text)
  {
    if (seps.find(c) != std::string::npos)
    {
      if (!cur.empty())
        out.push_back(cur);
      cur.clear();
    }
    else
      cur += c;
  }
  if (!cur.empty())
    out.push_back(cur);
  return out;
}

double to_double(const std::string &key, const std::string &text)
{
  try
  {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return v;
  }
  catch (const std::exception &)
  {
    throw UsageError("config: '" + key + "' expects a number, got '" + text + "'");
  }
}

int to_int(const std::string &key, const std::string &text)
{
  const double v = to_double(key, text);
  if (v != std::floor(v))
    throw UsageError("config: '" + key + "' expects an integer");
  return static_cast<int>(v);
}

std::string num(double x)
{
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string join(const std::vector<std::string> &parts, const std::string &sep)
{
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    out += (i ? sep : "") + parts[i];
  return out;
}

} // namespace

ExperimentConfig ExperimentConfig::parse(const KeyValues &kv)
{
  ExperimentConfig c;
  for (const auto &[key, value] : kv)
  {
    const std::vector<std::string> items = split(value, " ,\t");
    auto one = [&]() -> const std::string & {
      if (items.size() != 1)
        throw UsageError("config: '" + key + "' expects a single value");
      return items[0];
    };
    if (key == "problem")
      c.problem = problem_from_string(one());
    else if (key == "pair")
      c.pair = fe_pair_from_string(one());
    else if (key == "scheme")
      c.scheme = scheme_from_string(one());
    else if (key == "delta")
      c.delta = to_double(key, one());
    else if (key == "nx")
      c.nx = to_int(key, one());
    else if (key == "ny")
      c.ny = to_int(key, one());
    else if (key == "mu1_min")
      c.mu_min[0] = to_double(key, one());
    else if (key == "mu1_max")
      c.mu_max[0] = to_double(key, one());
    else if (key == "mu2_min")
      c.mu_min[1] = to_double(key, one());
    else if (key == "mu2_max")
      c.mu_max[1] = to_double(key, one());
    else if (key == "train_n1")
      c.train_n1 = to_int(key, one());
    else if (key == "train_n2")
      c.train_n2 = to_int(key, one());
    else if (key == "online_mu")
    {
      c.online_mu.clear();
      for (const std::string &entry : split(value, ";"))
      {
        const std::vector<std::string> xy = split(entry, " ,\t");
        if (xy.size() != 2)
          throw UsageError("config: online_mu entries need two values");
        c.online_mu.emplace_back(to_double(key, xy[0]), to_double(key, xy[1]));
      }
    }
    else if (key == "dt")
    {
      c.dt.clear();
      for (const std::string &s : items)
        c.dt.push_back(to_double(key, s));
    }
    else if (key == "T")
      c.final_time = to_double(key, one());
    else if (key == "N")
    {
      c.n.clear();
      for (const std::string &s : items)
        c.n.push_back(to_int(key, s));
    }
    else if (key == "N_s")
      c.n_s = to_int(key, one());
    else if (key == "strategies")
    {
      c.strategies.clear();
      for (const std::string &s : items)
        c.strategies.push_back(strategy_from_string(s));
    }
    else if (key == "modes_per_step")
      c.greedy.modes_per_step = to_int(key, one());
    else if (key == "max_greedy_iterations")
      c.greedy.max_iterations = to_int(key, one());
    else if (key == "max_basis")
      c.greedy.max_basis = to_int(key, one());
    else if (key == "greedy_tolerance")
      c.greedy.tolerance = to_double(key, one());
    else if (key == "trilinear")
      c.trilinear = trilinear_mode_from_string(one());
    else if (key == "lid")
    {
      if (items.size() != 2)
        throw UsageError("config: lid expects two values");
      c.lid = Vec2(to_double(key, items[0]), to_double(key, items[1]));
    }
    else if (key == "infsup")
      c.infsup = one() == "1" || one() == "true" || one() == "yes";
    else if (key == "output")
      c.output = one();
    else
      throw UsageError("config: unknown key '" + key + "'");
  }

  if (c.nx < 1 || c.ny < 1)
    throw UsageError("config: nx and ny must be positive");
  if (c.train_n1 < 1 || c.train_n2 < 1)
    throw UsageError("config: training grid sizes must be positive");
  if ((c.mu_min.array() > c.mu_max.array()).any())
    throw UsageError("config: empty parameter box");
  if (c.dt.empty() || c.n.empty() || c.strategies.empty() || c.online_mu.empty())
    throw UsageError("config: dt, N, strategies and online_mu must be non-empty");
  for (int n : c.n)
    if (n < 1)
      throw UsageError("config: N values must be positive");
  for (double dt : c.dt)
    validate(c.fom_settings(dt));
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw UsageError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(parse_key_values(ss.str()));
}

KeyValues ExperimentConfig::to_key_values() const
{
  KeyValues kv;
  kv["problem"] = to_string(problem);
  kv["pair"] = to_string(pair);
  kv["scheme"] = to_string(scheme);
  kv["delta"] = num(delta);
  kv["nx"] = std::to_string(nx);
  kv["ny"] = std::to_string(ny);
  kv["mu1_min"] = num(mu_min[0]);
  kv["mu1_max"] = num(mu_max[0]);
  kv["mu2_min"] = num(mu_min[1]);
  kv["mu2_max"] = num(mu_max[1]);
  kv["train_n1"] = std::to_string(train_n1);
  kv["train_n2"] = std::to_string(train_n2);
  std::vector<std::string> parts;
  for (const Vec2 &mu : online_mu)
    parts.push_back(num(mu[0]) + " " + num(mu[1]));
  kv["online_mu"] = join(parts, "; ");
  parts.clear();
  for (double d : dt)
    parts.push_back(num(d));
  kv["dt"] = join(parts, " ");
  kv["T"] = num(final_time);
  parts.clear();
  for (int v : n)
    parts.push_back(std::to_string(v));
  kv["N"] = join(parts, " ");
  kv["N_s"] = std::to_string(supremizer_count());
  parts.clear();
  for (Strategy s : strategies)
    parts.push_back(to_string(s));
  kv["strategies"] = join(parts, " ");
  kv["modes_per_step"] = std::to_string(greedy.modes_per_step);
  kv["max_greedy_iterations"] = std::to_string(greedy.max_iterations);
  kv["max_basis"] = std::to_string(greedy.max_basis);
  kv["greedy_tolerance"] = num(greedy.tolerance);
  kv["trilinear"] = to_string(trilinear);
  kv["lid"] = num(lid[0]) + " " + num(lid[1]);
  kv["infsup"] = infsup ? "1" : "0";
  kv["output"] = output.string();
  return kv;
}

FomSettings ExperimentConfig::fom_settings(double step) const
{
  FomSettings s;
  s.problem = problem;
  s.pair = pair;
  s.scheme = scheme;
  s.delta = delta;
  s.time = TimeGrid::from_final_time(final_time, step);
  s.lid = lid;
  return s;
}

std::vector<Vec2> ExperimentConfig::training_grid() const
{
  return tensor_grid(mu_min, mu_max, train_n1, train_n2);
}

int ExperimentConfig::supremizer_count() const
{
  return n_s >= 0 ? n_s : *std::max_element(n.begin(), n.end());
}

OfflineResult run_offline(const FullOrderModel &model, const ExperimentConfig &config)
{
  OfflineResult out;
  out.snapshots = compute_snapshots(model, config.training_grid());
  out.basis = build_reduced_basis(model, out.snapshots, config.greedy);
  const bool wants_sup = std::any_of(config.strategies.begin(), config.strategies.end(), uses_supremizers);
  if (wants_sup)
    enrich_with_supremizers(out.basis, model, out.snapshots, config.supremizer_count());
  ProjectSettings ps;
  if (config.mu_min[1] == config.mu_max[1])
    ps.fixed_length = config.mu_min[1];
  out.model = project_operators(model, out.basis, ps);
  out.model.metadata = config.to_key_values();
  return out;
}

const ErrorRecord *ErrorReport::find(Strategy s, int n, double dt, Field f, std::size_t mu_index) const
{
  for (const ErrorRecord &r : errors)
    if (r.strategy == s && r.n == n && r.dt == dt && r.field == f && r.mu_index == mu_index)
      return &r;
  return nullptr;
}

ErrorReport run_experiment(const ExperimentConfig &config, std::ostream &log)
{
  ErrorReport report;
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(config.nx, config.ny));
  auto fail_all = [&](double dt, std::size_t mu_index, const std::string &why) {
    for (Strategy s : config.strategies)
      for (int n : config.n)
        for (Field f : {Field::Velocity, Field::Pressure})
        {
          ErrorRecord r;
          r.strategy = s;
          r.n = n;
          r.dt = dt;
          r.mu_index = mu_index;
          r.mu = config.online_mu[mu_index];
          r.field = f;
          r.message = why;
          report.errors.push_back(r);
        }
  };

  for (std::size_t di = 0; di < config.dt.size(); ++di)
  {
    const double dt = config.dt[di];
    const FullOrderModel model(mesh, config.fom_settings(dt));
    log << "dt = " << dt << ": offline stage (" << config.training_grid().size() << " training points)\n";
    OfflineResult off;
    try
    {
      off = run_offline(model, config);
      write_archive(config.output / ("archive_dt" + std::to_string(di)), off.model);
    }
    catch (const std::exception &e)
    {
      const std::string why = std::string("offline: ") + e.what();
      report.failures.push_back("dt " + num(dt) + ": " + why);
      for (std::size_t mi = 0; mi < config.online_mu.size(); ++mi)
        fail_all(dt, mi, why);
      continue;
    }
    log << "  bases: N_u = " << off.basis.n_u() << ", N_s = " << off.basis.n_s() << ", N_p = " << off.basis.n_p()
        << "\n";

    for (std::size_t mi = 0; mi < config.online_mu.size(); ++mi)
    {
      const Vec2 mu = config.online_mu[mi];
      FomSolution fom;
      try
      {
        fom = model.solve(mu);
      }
      catch (const std::exception &e)
      {
        const std::string why = std::string("full-order solve: ") + e.what();
        report.failures.push_back("dt " + num(dt) + ", mu (" + num(mu[0]) + ", " + num(mu[1]) + "): " + why);
        fail_all(dt, mi, why);
        continue;
      }
      for (Strategy s : config.strategies)
        for (int n : config.n)
        {
          RomConfig rc;
          rc.strategy = s;
          rc.n = n;
          rc.mu = mu;
          rc.trilinear = config.trilinear;
          if (uses_supremizers(s))
            rc.n_s = std::min(n, off.model.n_s);
          ErrorRecord rv, rp;
          rv.strategy = rp.strategy = s;
          rv.n = rp.n = n;
          rv.dt = rp.dt = dt;
          rv.mu_index = rp.mu_index = mi;
          rv.mu = rp.mu = mu;
          rv.field = Field::Velocity;
          rp.field = Field::Pressure;
          try
          {
            const RomSolution rom = solve_rom(off.model, rc, &model);
            rv.series = l2_error_in_time(model, fom, rom, Field::Velocity);
            rp.series = l2_error_in_time(model, fom, rom, Field::Pressure);
            rv.ok = rp.ok = true;
            log << "  " << to_string(s) << " N = " << n << " mu = (" << mu[0] << ", " << mu[1]
                << "): velocity " << rv.series.average << ", pressure " << rp.series.average << "\n";
          }
          catch (const std::exception &e)
          {
            rv.message = rp.message = e.what();
            report.failures.push_back("dt " + num(dt) + ", " + to_string(s) + ", N " + std::to_string(n) + ": " +
                                      e.what());
            log << "  " << to_string(s) << " N = " << n << " failed: " << e.what() << "\n";
          }
          report.errors.push_back(rv);
          report.errors.push_back(rp);
        }

      if (config.infsup)
      {
        try
        {
          const InfSup fe = infsup_constant(model, mu);
          report.infsup.push_back({"fe", 0, dt, mu, fe.beta});
          report.infsup.push_back({"fe-stabilized", 0, dt, mu, fe.beta_stabilized});
          for (int n : config.n)
          {
            if (n > off.basis.n_u() || n > off.basis.n_p())
              continue;
            const Mat zp = off.basis.zp.leftCols(n);
            const Mat zu = off.basis.zu.leftCols(n);
            report.infsup.push_back({"rb-nosup", n, dt, mu, reduced_infsup(model, mu, zu, zp)});
            if (off.basis.n_s() > 0)
            {
              const int ns = std::min(n, off.basis.n_s());
              Mat zus(zu.rows(), n + ns);
              zus << zu, off.basis.zs.leftCols(ns);
              report.infsup.push_back({"rb-sup", n, dt, mu, reduced_infsup(model, mu, zus, zp)});
            }
          }
        }
        catch (const std::exception &e)
        {
          report.failures.push_back(std::string("infsup: ") + e.what());
        }
      }
    }
  }

  std::filesystem::create_directories(config.output);
  write_errors_csv(config.output / "errors.csv", config, report);
  write_summary_csv(config.output / "summary.csv", config, report);
  write_infsup_csv(config.output / "infsup.csv", report);
  KeyValues manifest = config.to_key_values();
  manifest["combinations"] = std::to_string(report.errors.size());
  manifest["failures"] = std::to_string(report.failures.size());
  for (std::size_t i = 0; i < report.failures.size(); ++i)
    manifest["failure." + std::to_string(i)] = report.failures[i];
  write_key_values(config.output / "manifest.txt", manifest);
  return report;
}

void write_errors_csv(const std::filesystem::path &path, const ExperimentConfig &config, const ErrorReport &report)
{
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write " + path.string());
  out << std::setprecision(12);
  out << "problem,pair,strategy,N,dt,mu1,mu2,field,t,error\n";
  const std::string head = to_string(config.problem) + "," + to_string(config.pair) + ",";
  for (const ErrorRecord &r : report.errors)
  {
    if (!r.ok)
    {
      out << head << to_string(r.strategy) << "," << r.n << "," << r.dt << "," << r.mu[0] << "," << r.mu[1] << ","
          << to_string(r.field) << ",nan,nan\n";
      continue;
    }
    for (std::size_t k = 0; k < r.series.error.size(); ++k)
      out << head << to_string(r.strategy) << "," << r.n << "," << r.dt << "," << r.mu[0] << "," << r.mu[1] << ","
          << to_string(r.field) << "," << static_cast<double>(k) * r.dt << "," << r.series.error[k] << "\n";
  }
}

void write_summary_csv(const std::filesystem::path &path, const ExperimentConfig &config, const ErrorReport &report)
{
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write " + path.string());
  out << std::setprecision(12);
  out << "problem,pair,strategy,N,dt,mu1,mu2,field,mean_error,status\n";
  for (const ErrorRecord &r : report.errors)
  {
    out << to_string(config.problem) << "," << to_string(config.pair) << "," << to_string(r.strategy) << "," << r.n
        << "," << r.dt << "," << r.mu[0] << "," << r.mu[1] << "," << to_string(r.field) << ",";
    if (r.ok)
      out << r.series.average << ",ok\n";
    else
    {
      std::string msg = r.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << "nan,failed: " << msg << "\n";
    }
  }
}

void write_infsup_csv(const std::filesystem::path &path, const ErrorReport &report)
{
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write " + path.string());
  out << std::setprecision(12);
  out << "kind,N,dt,mu1,mu2,beta\n";
  for (const InfSupRecord &r : report.infsup)
    out << r.kind << "," << r.n << "," << r.dt << "," << r.mu[0] << "," << r.mu[1] << "," << r.beta << "\n";
}

void write_coefficients_csv(const std::filesystem::path &path, const RomSolution &sol)
{
  std::ofstream out(path);
  if (!out)
    throw UsageError("cannot write " + path.string());
  out << std::setprecision(17);
  const int nu = sol.velocity.empty() ? 0 : static_cast<int>(sol.velocity[0].size());
  const int np = sol.pressure.empty() ? 0 : static_cast<int>(sol.pressure[0].size());
  out << "k,t";
  for (int i = 1; i <= nu; ++i)
    out << ",u" << i;
  for (int i = 1; i <= np; ++i)
    out << ",p" << i;
  out << "\n";
  for (int k = 0; k <= sol.steps(); ++k)
  {
    out << k << "," << k * sol.time.dt;
    for (int i = 0; i < nu; ++i)
      out << "," << sol.velocity[k][i];
    for (int i = 0; i < np; ++i)
      out << "," << sol.pressure[k][i];
    out << "\n";
  }
}

} // namespace rbstab
