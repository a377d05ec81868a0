#pragma once

#include "rbstab/io.hpp"
#include "rbstab/reduction.hpp"

#include <filesystem>
#include <optional>

namespace rbstab
{

/// Reduced operators over the augmented velocity basis phi = [l, Z_u, Z_s]
/// (index 0 is the lifting, so the reduced state is (1, u_N)) and the
/// pressure basis Z_p.
///
/// Tensor layouts (column-major pair indices, first index fastest):
///   conv (a,b) x k      int (phi_a . grad phi_b) . phi_k
///   e1   a x (c,k)      tau int phi_a . (phi_c . grad phi_k)
///   e2   a x (c,k)      tau int (-nu lap phi_a) . (phi_c . grad phi_k)
///   e3   (a,b) x (c,k)  tau int (phi_a . grad phi_b) . (phi_c . grad phi_k)
///   e4   j x (c,k)      tau int grad psi_j . (phi_c . grad phi_k)
///   f3   (a,b) x m      -tau int (phi_a . grad phi_b) . grad psi_m
/// with tau = delta h_K^2, all integrals over the current domain.
struct ReducedModel
{
  ProblemKind problem = ProblemKind::Stokes;
  FePair pair;
  Scheme scheme = Scheme::None;
  double delta = 0.0;
  TimeGrid time;
  Vec2 lid{1.0, 0.0};
  NewtonSettings newton;
  std::optional<double> fixed_length; // tensors folded at this length

  int n_u = 0, n_s = 0, n_p = 0;
  Mat phi; // n_u_full x (1 + n_u + n_s)
  Mat zp;  // n_p_full x n_p

  ReducedAffineMatrix mass, diffusion, div, mtilde, bsu, s;
  bool has_trilinear = false;
  ReducedAffineMatrix conv, e1, e2, e3, e4, f3;

  int velocity_dim() const { return 1 + n_u + n_s; }
  KeyValues metadata;
};

struct ProjectSettings
{
  bool include_trilinear = true;
  std::optional<double> fixed_length;
  /// Points per batch when accumulating tensors (bounds memory).
  int batch_rows = 4096;
};

ReducedModel project_operators(const FullOrderModel &model, const ReducedBasis &basis,
                               const ProjectSettings &settings = {});

/// Selection of leading columns of each block: velocity index list (with 0
/// for the lifting) and pressure index list.
struct BasisSelection
{
  std::vector<int> velocity;
  std::vector<int> pressure;
};

BasisSelection select_leading(const ReducedModel &rm, int n_u, int n_s, int n_p);

/// Restricts every reduced term to the selection.
ReducedModel restrict_model(const ReducedModel &rm, const BasisSelection &sel);

void write_archive(const std::filesystem::path &dir, const ReducedModel &rm);
ReducedModel read_archive(const std::filesystem::path &dir);

} // namespace rbstab
