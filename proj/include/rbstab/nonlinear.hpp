#pragma once

#include "rbstab/fe_space.hpp"

namespace rbstab
{

/// Nonlinear contributions to the discrete Navier-Stokes residual.
///
/// ru holds c(u, u, v) plus, when delta > 0, the SUPG term
///   delta sum_K h_K^2 int_K ((u - u_old)/dt - nu lap u + u.grad u + grad p) . (u.grad v).
/// rp holds the convective part of the gradient-tested continuity term with
/// the sign it takes in the continuity row: -delta sum_K h_K^2 int_K (u.grad u) . grad q.
/// The Jacobians differentiate the trial side only; u in u.grad v is frozen.
struct NavierStokesTerms
{
  Vec ru;
  Vec rp;
  SpMat juu; // d ru / du
  SpMat jup; // d ru / dp
  SpMat jpu; // d rp / du
};

void navier_stokes_terms(const FeSpace &vel, const FeSpace &pres, const Physical &phys, double delta, double dt,
                         const Vec &u, const Vec &p, const Vec &u_old, bool with_jacobian, NavierStokesTerms &out);

} // namespace rbstab
