#pragma once

#include "rbstab/diagnostics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rbstab
{

/// Plain-text experiment description (key = value, `#` comments).
///
/// Lists are separated by spaces or commas; online_mu entries by `;`.
struct ExperimentConfig
{
  ProblemKind problem = ProblemKind::Stokes;
  FePair pair = fe_pair_from_string("P2P2");
  Scheme scheme = Scheme::FrancaHughes;
  double delta = 0.05;
  int nx = 16, ny = 16;
  Vec2 mu_min{0.25, 1.0}, mu_max{0.75, 2.0};
  int train_n1 = 5, train_n2 = 5;
  std::vector<Vec2> online_mu{Vec2(0.57, 1.78)};
  std::vector<double> dt{0.02};
  double final_time = 0.2;
  std::vector<int> n{30};
  int n_s = -1; // supremizer modes stored offline, -1 means max(n)
  std::vector<Strategy> strategies{Strategy::OfflineOnlineWithSup, Strategy::OfflineOnlineNoSup,
                                   Strategy::OfflineOnlyWithSup};
  GreedySettings greedy;
  TrilinearMode trilinear = TrilinearMode::Tensor;
  Vec2 lid{1.0, 0.0};
  bool infsup = true;
  std::filesystem::path output = "rbstab-out";

  static ExperimentConfig parse(const KeyValues &kv);
  static ExperimentConfig from_file(const std::filesystem::path &path);
  KeyValues to_key_values() const;

  FomSettings fom_settings(double dt) const;
  std::vector<Vec2> training_grid() const;
  int supremizer_count() const;
};

struct OfflineResult
{
  SnapshotSet snapshots;
  ReducedBasis basis;
  ReducedModel model;
};

/// Snapshots over the training grid, POD-Greedy bases, supremizers and reduced operators.
OfflineResult run_offline(const FullOrderModel &model, const ExperimentConfig &config);

struct ErrorRecord
{
  Strategy strategy = Strategy::OfflineOnlineWithSup;
  int n = 0;
  double dt = 0.0;
  std::size_t mu_index = 0;
  Vec2 mu{0.0, 0.0};
  Field field = Field::Velocity;
  ErrorSeries series;
  bool ok = false;
  std::string message;
};

struct InfSupRecord
{
  std::string kind; // fe, fe-stabilized, rb-sup, rb-nosup
  int n = 0;
  double dt = 0.0;
  Vec2 mu{0.0, 0.0};
  double beta = 0.0;
};

struct ErrorReport
{
  std::vector<ErrorRecord> errors;
  std::vector<InfSupRecord> infsup;
  std::vector<std::string> failures;

  bool all_ok() const { return failures.empty(); }
  const ErrorRecord *find(Strategy s, int n, double dt, Field f, std::size_t mu_index = 0) const;
};

/// Offline then online for every (dt, mu, strategy, N); one failure does not stop the others.
ErrorReport run_experiment(const ExperimentConfig &config, std::ostream &log);

void write_errors_csv(const std::filesystem::path &path, const ExperimentConfig &config, const ErrorReport &report);
void write_summary_csv(const std::filesystem::path &path, const ExperimentConfig &config, const ErrorReport &report);
void write_infsup_csv(const std::filesystem::path &path, const ErrorReport &report);

/// Per-step reduced coefficients: k, t, u_1..u_N, p_1..p_N.
void write_coefficients_csv(const std::filesystem::path &path, const RomSolution &sol);

} // namespace rbstab
