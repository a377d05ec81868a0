// rbstab: offline/online reduced basis runs for the parametrized cavity.

#include "rbstab/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace rbstab;

namespace
{

int report_status(const ErrorReport &report)
{
  for (const std::string &f : report.failures)
    std::cerr << "failed: " << f << "\n";
  return report.all_ok() ? 0 : 1;
}

int cmd_offline(const std::string &config_path)
{
  const ExperimentConfig config = ExperimentConfig::from_file(config_path);
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(config.nx, config.ny));
  for (std::size_t i = 0; i < config.dt.size(); ++i)
  {
    const FullOrderModel model(mesh, config.fom_settings(config.dt[i]));
    const OfflineResult off = run_offline(model, config);
    const auto dir = config.output / ("archive_dt" + std::to_string(i));
    write_archive(dir, off.model);
    std::cout << "dt " << config.dt[i] << ": N_u " << off.basis.n_u() << ", N_s " << off.basis.n_s() << ", N_p "
              << off.basis.n_p() << " -> " << dir.string() << "\n";
  }
  return 0;
}

int cmd_online(const std::string &archive_path, const std::string &config_path)
{
  const ExperimentConfig config = ExperimentConfig::from_file(config_path);
  const ReducedModel archive = read_archive(archive_path);
  std::unique_ptr<FullOrderModel> fom;
  if (archive.problem == ProblemKind::NavierStokes && config.trilinear == TrilinearMode::ProjectEachStep)
  {
    FomSettings fs = config.fom_settings(archive.time.dt);
    fs.time = archive.time;
    fom = std::make_unique<FullOrderModel>(std::make_shared<const Mesh>(build_structured_mesh(config.nx, config.ny)),
                                           fs);
  }
  const auto dir = config.output / "online";
  std::filesystem::create_directories(dir);
  int failures = 0;
  for (std::size_t mi = 0; mi < config.online_mu.size(); ++mi)
    for (Strategy s : config.strategies)
      for (int n : config.n)
      {
        RomConfig rc;
        rc.strategy = s;
        rc.n = n;
        rc.mu = config.online_mu[mi];
        rc.trilinear = config.trilinear;
        if (uses_supremizers(s))
          rc.n_s = std::min(n, archive.n_s);
        try
        {
          const RomSolution sol = solve_rom(archive, rc, fom.get());
          const auto file = dir / (to_string(s) + "_N" + std::to_string(n) + "_mu" + std::to_string(mi) + ".csv");
          write_coefficients_csv(file, sol);
          std::cout << file.string() << "\n";
        }
        catch (const std::exception &e)
        {
          std::cerr << "failed: " << to_string(s) << " N " << n << ": " << e.what() << "\n";
          ++failures;
        }
      }
  return failures == 0 ? 0 : 1;
}

int cmd_errors(const std::string &config_path)
{
  const ExperimentConfig config = ExperimentConfig::from_file(config_path);
  const ErrorReport report = run_experiment(config, std::cout);
  std::cout << "wrote " << (config.output / "errors.csv").string() << "\n";
  return report_status(report);
}

int cmd_infsup(const std::string &config_path)
{
  const ExperimentConfig config = ExperimentConfig::from_file(config_path);
  auto mesh = std::make_shared<const Mesh>(build_structured_mesh(config.nx, config.ny));
  const FullOrderModel model(mesh, config.fom_settings(config.dt.front()));
  ErrorReport report;
  for (const Vec2 &mu : config.online_mu)
  {
    const InfSup b = infsup_constant(model, mu);
    std::cout << "mu (" << mu[0] << ", " << mu[1] << "): beta " << b.beta << ", stabilized " << b.beta_stabilized
              << "\n";
    report.infsup.push_back({"fe", 0, config.dt.front(), mu, b.beta});
    report.infsup.push_back({"fe-stabilized", 0, config.dt.front(), mu, b.beta_stabilized});
  }
  std::filesystem::create_directories(config.output);
  write_infsup_csv(config.output / "infsup.csv", report);
  return 0;
}

int cmd_dt_sweep(const std::string &config_path)
{
  const ExperimentConfig config = ExperimentConfig::from_file(config_path);
  const double h = 1.0 / std::max(config.nx, config.ny);
  for (double dt : config.dt)
  {
    const DtStability f = dt_stability_flag(config.delta, h, dt);
    std::cout << "dt " << dt << ": delta h^2 = " << f.threshold << ", dt/(delta h^2) = " << f.ratio << " ("
              << (f.ok ? "ok" : "warn") << "; ratio >= delta: " << (f.ratio_at_least_delta ? "yes" : "no")
              << ")\n";
  }
  const ErrorReport report = run_experiment(config, std::cout);
  for (Strategy s : config.strategies)
    for (int n : config.n)
      for (Field field : {Field::Velocity, Field::Pressure})
      {
        std::cout << to_string(s) << " N " << n << " " << to_string(field) << ":";
        for (double dt : config.dt)
        {
          const ErrorRecord *r = report.find(s, n, dt, field);
          std::cout << " " << (r && r->ok ? r->series.average : std::nan(""));
        }
        std::cout << "\n";
      }
  return report_status(report);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Reduced basis solver for the stabilized parametrized cavity flow"};
  app.require_subcommand(1);
  std::string config, archive;

  auto *offline = app.add_subcommand("offline", "snapshots, POD-Greedy bases and reduced operators");
  offline->add_option("config", config, "experiment file")->required()->check(CLI::ExistingFile);
  auto *online = app.add_subcommand("online", "reduced solves from a stored archive");
  online->add_option("archive", archive, "archive directory")->required()->check(CLI::ExistingDirectory);
  online->add_option("config", config, "experiment file")->required()->check(CLI::ExistingFile);
  auto *errors = app.add_subcommand("errors", "full offline/online study with L2 errors in time");
  errors->add_option("config", config, "experiment file")->required()->check(CLI::ExistingFile);
  auto *infsup = app.add_subcommand("infsup", "discrete inf-sup constants at the online parameters");
  infsup->add_option("config", config, "experiment file")->required()->check(CLI::ExistingFile);
  auto *sweep = app.add_subcommand("dt-sweep", "errors for every time step in the config, with stability flags");
  sweep->add_option("config", config, "experiment file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try
  {
    if (*offline)
      return cmd_offline(config);
    if (*online)
      return cmd_online(archive, config);
    if (*errors)
      return cmd_errors(config);
    if (*infsup)
      return cmd_infsup(config);
    return cmd_dt_sweep(config);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
