#pragma once

#include "rbstab/assembly.hpp"
#include "rbstab/linalg.hpp"
#include "rbstab/stabilization.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace rbstab
{

enum class ProblemKind
{
  Stokes,
  NavierStokes
};

enum class Scheme
{
  None,
  FrancaHughes,
  PressureJump,
  Supg
};

struct FePair
{
  SpaceKind velocity = SpaceKind::VectorP2;
  SpaceKind pressure = SpaceKind::ScalarP1;
};

std::string to_string(ProblemKind kind);
std::string to_string(Scheme scheme);
std::string to_string(const FePair &pair); // "P2P1", ...
ProblemKind problem_from_string(const std::string &name);
Scheme scheme_from_string(const std::string &name);
FePair fe_pair_from_string(const std::string &name);

/// Uniform grid t^k = k dt, k = 0..steps.
struct TimeGrid
{
  double dt = 0.02;
  int steps = 10;

  double final_time() const { return dt * steps; }
  /// steps = T / dt; rejects T that is not a whole number of steps.
  static TimeGrid from_final_time(double final_time, double dt);
};

struct NewtonSettings
{
  double abs_tol = 1e-8;
  double rel_tol = 1e-10;
  int max_iterations = 25;
};

struct FomSettings
{
  ProblemKind problem = ProblemKind::Stokes;
  FePair pair;
  Scheme scheme = Scheme::None;
  double delta = 0.05;
  TimeGrid time;
  Vec2 lid{1.0, 0.0};
  NewtonSettings newton;
};

/// Checks pair/scheme/problem compatibility; throws UsageError or DomainError.
void validate(const FomSettings &settings);

/// Trajectory of total (not homogenized) coefficients, k = 0..K.
struct FomSolution
{
  Vec2 mu{0.0, 0.0};
  std::vector<Vec> velocity;
  std::vector<Vec> pressure;
  std::vector<int> newton_iterations; // k = 0..K; 0 at k = 0 and for Stokes
  std::vector<double> residuals;      // final residual of each step, 0 at k = 0

  int steps() const { return static_cast<int>(velocity.size()) - 1; }
};

/// Parameter-dependent matrices of the discrete problem at one parameter value.
struct LinearOperators
{
  SpMat mass;      // n_u x n_u
  SpMat diffusion; // n_u x n_u
  SpMat div;       // n_p x n_u, b(phi_i, psi_k)
  SpMat mtilde;    // n_p x n_u, zero unless gradient-tested terms are active
  SpMat bsu;       // n_p x n_u
  SpMat s;         // n_p x n_p
};

/// Unconstrained residual of one implicit Euler step and its Jacobian blocks.
///
/// Momentum:   M (u - u_old)/dt + A u + B^T p [+ c(u,u,v) + SUPG]
/// Continuity: B u - Mt (u - u_old)/dt - Bsu u - S p [- convective SUPG part]
struct StepResidual
{
  Vec ru, rp;
  SpMat juu, jup, jpu, jpp;
};

/// Stokes: (nu, L) = (mu1, mu2). Navier-Stokes: mu1 is the Reynolds number, nu = 1/mu1.
Physical physical_parameters(ProblemKind problem, const Vec2 &mu);

class FullOrderModel
{
public:
  FullOrderModel(std::shared_ptr<const Mesh> mesh, const FomSettings &settings);

  const FomSettings &settings() const { return settings_; }
  const Mesh &mesh() const { return *mesh_; }
  const FeSpace &velocity_space() const { return *vel_; }
  const FeSpace &pressure_space() const { return *pres_; }
  const LiftingFunction &lifting() const { return lifting_; }
  const Vec &pressure_mean() const { return mean_; }

  /// H1 seminorm on free velocity dofs and L2 mass on pressure dofs.
  const InnerProduct &velocity_product() const { return xu_; }
  const InnerProduct &pressure_product() const { return xp_; }
  const SpMat &velocity_mass() const { return mass_u_; }   // reference L2, vector
  const SpMat &pressure_mass() const { return mass_p_; }   // reference L2

  /// Stokes: nu = mu1, length = mu2. Navier-Stokes: nu = 1/mu1 (Reynolds number), length = mu2.
  Physical physical(const Vec2 &mu) const;

  /// stabilized = false drops every stabilization term.
  LinearOperators linear_operators(const Physical &phys, bool stabilized = true) const;

  StepResidual step_residual(const Physical &phys, const LinearOperators &ops, const Vec &u, const Vec &p,
                             const Vec &u_old, bool stabilized, bool with_jacobian) const;

  FomSolution solve(const Vec2 &mu) const;
  FomSolution solve_stokes(const Vec2 &mu) const;
  FomSolution solve_navier_stokes(const Vec2 &mu) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  FomSettings settings_;
  std::unique_ptr<FeSpace> vel_, pres_;
  LiftingFunction lifting_;
  Vec mean_;
  SpMat mass_u_, mass_p_;
  InnerProduct xu_, xp_;
};

/// Homogenized trajectories u - l and p at t^1..t^K for a list of parameters.
struct SnapshotSet
{
  std::vector<Vec2> mu;
  std::vector<Mat> velocity; // per mu: n_u x K
  std::vector<Mat> pressure; // per mu: n_p x K
  TimeGrid time;

  int size() const { return static_cast<int>(mu.size()); }
};

SnapshotSet compute_snapshots(const FullOrderModel &model, const std::vector<Vec2> &training);

/// Homogenized snapshot matrices of one trajectory.
void homogenize(const FullOrderModel &model, const FomSolution &sol, Mat &velocity, Mat &pressure);

void write_snapshots(const std::filesystem::path &dir, const SnapshotSet &set, const FullOrderModel &model);
SnapshotSet read_snapshots(const std::filesystem::path &dir);

/// Uniform n1 x n2 tensor grid over [lo, hi] (endpoints included; one point uses the midpoint).
std::vector<Vec2> tensor_grid(const Vec2 &lo, const Vec2 &hi, int n1, int n2);

} // namespace rbstab
