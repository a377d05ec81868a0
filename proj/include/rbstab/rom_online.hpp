#pragma once

#include "rbstab/reduced_operators.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rbstab
{

enum class Strategy
{
  OfflineOnlineWithSup, // stabilized offline and online, supremizer-enriched velocity
  OfflineOnlineNoSup,   // stabilized offline and online, velocity modes only
  OfflineOnlyWithSup    // stabilized snapshots, plain Galerkin online
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string &name);
bool uses_supremizers(Strategy s);
bool stabilized_online(Strategy s);

enum class TrilinearMode
{
  Tensor,          // precomputed reduced tensors
  ProjectEachStep  // assemble the full-order residual at every Newton iteration and project it
};

std::string to_string(TrilinearMode m);
TrilinearMode trilinear_mode_from_string(const std::string &name);

struct RomConfig
{
  Strategy strategy = Strategy::OfflineOnlineWithSup;
  int n = 0;                   // velocity and pressure modes
  std::optional<int> n_s;      // supremizer modes, defaults to n (capped at the stored count)
  Vec2 mu{0.5, 1.0};
  std::optional<TimeGrid> time; // defaults to the archive grid
  TrilinearMode trilinear = TrilinearMode::Tensor;
};

/// Coefficients exclude the lifting entry; k = 0..K.
struct RomSolution
{
  Strategy strategy = Strategy::OfflineOnlineWithSup;
  Vec2 mu{0.0, 0.0};
  TimeGrid time;
  std::shared_ptr<const ReducedModel> model; // restricted to the basis in use
  std::vector<Vec> velocity;
  std::vector<Vec> pressure;
  std::vector<int> newton_iterations;
  std::vector<double> residuals;

  int steps() const { return static_cast<int>(velocity.size()) - 1; }
};

/// Restricts the archive to the blocks a strategy uses.
ReducedModel select_for_strategy(const ReducedModel &archive, const RomConfig &config);

RomSolution solve_rom_stokes(const ReducedModel &archive, const RomConfig &config);

/// `fom` is required for TrilinearMode::ProjectEachStep and ignored otherwise.
RomSolution solve_rom_navier_stokes(const ReducedModel &archive, const RomConfig &config,
                                    const FullOrderModel *fom = nullptr);

RomSolution solve_rom(const ReducedModel &archive, const RomConfig &config, const FullOrderModel *fom = nullptr);

struct Fields
{
  Vec velocity; // total velocity, lifting included
  Vec pressure;
};

Fields reconstruct(const RomSolution &sol, int k);

/// Velocity coefficients of the X_u-orthogonal projection of a homogenized field onto Z_us.
Vec project_velocity(const ReducedModel &rm, const Vec &homogenized, const InnerProduct &x);

} // namespace rbstab
