#pragma once

#include "rbstab/assembly.hpp"

namespace rbstab
{

/// Residual-based terms tested against grad q, on element K weighted by delta h_K^2.
///
/// All blocks carry the sign of the forms themselves; the continuity row
/// subtracts them. h_K is measured on the reference mesh.
struct FrancaHughesBlocks
{
  SpMat mtilde; // (u, grad q),          n_p x n_u, scaled by 1/dt by the caller
  SpMat bsu;    // (-nu lap u, grad q),  n_p x n_u
  SpMat s;      // (grad p, grad q),     n_p x n_p
};

FrancaHughesBlocks assemble_franca_hughes(const FeSpace &vel, const FeSpace &pres, double nu, const GeoMap &map,
                                          double delta);
FrancaHughesBlocks assemble_franca_hughes(const FeSpace &vel, const FeSpace &pres, const Physical &phys,
                                          double delta);

struct AffineFrancaHughes
{
  AffineMatrix mtilde;
  AffineMatrix bsu;
  AffineMatrix s;
};

AffineFrancaHughes affine_franca_hughes(const FeSpace &vel, const FeSpace &pres, double delta,
                                        MapFamily family = MapFamily::AxisStretch);

/// delta sum over interior edges of h_sigma int [p][q] for a P0 pressure, with
/// reference edge lengths.
SpMat assemble_pressure_jump(const FeSpace &pres, double delta);

/// SUPG blocks for a frozen transport field w (total velocity).
///
/// Velocity rows are tested with w . grad v, pressure rows with grad q. The
/// trial convection is linearized as w . grad u, so uv_conv is quadratic in w
/// and the other w-dependent blocks are linear.
struct SupgBlocks
{
  SpMat uv_time; // (u, w.grad v)              n_u x n_u, scaled by 1/dt by the caller
  SpMat uv_visc; // (-nu lap u, w.grad v)      n_u x n_u
  SpMat uv_conv; // (w.grad u, w.grad v)       n_u x n_u
  SpMat pv;      // (grad p, w.grad v)         n_u x n_p
  SpMat uq_time; // (u, grad q)                n_p x n_u
  SpMat uq_visc; // (-nu lap u, grad q)        n_p x n_u
  SpMat uq_conv; // (w.grad u, grad q)         n_p x n_u
  SpMat pq;      // (grad p, grad q)           n_p x n_p
};

SupgBlocks assemble_supg(const FeSpace &vel, const FeSpace &pres, const Physical &phys, double delta,
                         const Vec &w);

} // namespace rbstab
