#pragma once

#include "rbstab/rom_online.hpp"

#include <string>
#include <vector>

namespace rbstab
{

/// sqrt of the smallest eigenvalue of (B X_u^{-1} B^T + S) q = lambda X_p q.
///
/// b is n_p x n_u with rows and columns already restricted to the spaces in
/// question; xu and xp are symmetric positive definite. Pass an empty s for
/// the plain constant.
double infsup_from_matrices(const Mat &b, const Mat &xu, const Mat &xp, const Mat &s = Mat());

struct InfSup
{
  double beta = 0.0;            // plain LBB constant
  double beta_stabilized = 0.0; // with the pressure stabilization block added
};

/// Finite-element constant on the free velocity dofs and the zero-mean pressures,
/// with the H1 seminorm and L2 products of the reference square.
InfSup infsup_constant(const FullOrderModel &model, const Vec2 &mu);

/// Reduced constant for velocity basis zv (n_u x N_v) and pressure basis zp.
double reduced_infsup(const FullOrderModel &model, const Vec2 &mu, const Mat &zv, const Mat &zp);

struct ErrorSeries
{
  std::vector<double> error; // k = 0..K
  double average = 0.0;      // (1/K) sum_{k=1..K}
};

/// L2 error per step with the given (reference) mass matrix; scale multiplies
/// every norm (sqrt of the area element to obtain physical norms).
ErrorSeries l2_error_in_time(const std::vector<Vec> &reference, const std::vector<Vec> &approx, const SpMat &mass,
                             double scale = 1.0);

enum class Field
{
  Velocity,
  Pressure
};

std::string to_string(Field f);

/// Physical-domain L2 error of the reconstructed reduced trajectory.
ErrorSeries l2_error_in_time(const FullOrderModel &model, const FomSolution &fom, const RomSolution &rom, Field f);

/// mean_k ||u_h - u_N||_X / mean_k ||u_h||_X over k = 1..K (X_u for velocity, L2 for pressure).
double reproduction_error(const FullOrderModel &model, const FomSolution &fom, const RomSolution &rom, Field f);

struct DtStability
{
  bool ok = false;        // dt > delta h^2
  double threshold = 0.0; // delta h^2
  double ratio = 0.0;     // dt / (delta h^2)
  bool ratio_at_least_delta = false;
};

DtStability dt_stability_flag(double delta, double h, double dt);

} // namespace rbstab
