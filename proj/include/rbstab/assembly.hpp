#pragma once

#include "rbstab/affine.hpp"
#include "rbstab/fe_space.hpp"

#include <iosfwd>

namespace rbstab
{

/// Parameter families for which an affine decomposition can be requested.
enum class MapFamily
{
  AxisStretch, // T(x, y) = (length * x, y)
  General      // arbitrary affine map; no decomposition available
};

// ---------------------------------------------------------------------------
// Direct assembly at one parameter value, through the tensors kappa, chi, pi.
// ---------------------------------------------------------------------------

/// m(u, v) = int pi u.v. Rejects P0 (pressure-only) spaces.
SpMat assemble_mass(const FeSpace &space, const GeoMap &map);
SpMat assemble_mass(const FeSpace &space, const Physical &phys);

/// a(u, v) = int du/dx_i kappa_ij dv/dx_j, componentwise for vector spaces.
SpMat assemble_diffusion(const FeSpace &space, double nu, const GeoMap &map);
SpMat assemble_diffusion(const FeSpace &space, const Physical &phys);

/// (B)_ki = b(phi_i, psi_k) = -int psi_k chi_ij d(phi_i)_j/dx_i.
SpMat assemble_divergence(const FeSpace &vel, const FeSpace &pres, double nu, const GeoMap &map);
SpMat assemble_divergence(const FeSpace &vel, const FeSpace &pres, const Physical &phys);

/// (C(w))_ij = c(w, phi_j, phi_i) = int w_a chi_ba d(phi_j)_m/dx_b (phi_i)_m.
SpMat assemble_convection(const FeSpace &vel, const GeoMap &map, const Vec &w);
SpMat assemble_convection(const FeSpace &vel, const Physical &phys, const Vec &w);

/// Reference L2 mass of a scalar space (P0 allowed); the pressure inner product.
SpMat assemble_pressure_mass(const FeSpace &pres);

/// Column vector of int psi_k over the reference domain.
Vec pressure_mean_weights(const FeSpace &pres);

/// H1-seminorm Gram matrix at nu = 1, length = 1: the velocity inner product.
SpMat velocity_inner_product(const FeSpace &vel);

// ---------------------------------------------------------------------------
// Affine decompositions in the parameters (nu, length).
// ---------------------------------------------------------------------------

AffineMatrix affine_mass(const FeSpace &space, MapFamily family = MapFamily::AxisStretch);
AffineMatrix affine_diffusion(const FeSpace &space, MapFamily family = MapFamily::AxisStretch);
AffineMatrix affine_divergence(const FeSpace &vel, const FeSpace &pres,
                               MapFamily family = MapFamily::AxisStretch);
/// c(w, ., .) for a fixed transport field w.
AffineMatrix affine_convection(const FeSpace &vel, const Vec &w,
                               MapFamily family = MapFamily::AxisStretch);

/// Terms multiplied by a fixed vector: sum_q theta_q (sign * K_q x).
AffineVector affine_apply(const AffineMatrix &op, const Vec &x, double sign = 1.0);

// ---------------------------------------------------------------------------
// Lifting of the lid data.
// ---------------------------------------------------------------------------

struct LiftingFunction
{
  Vec coefficients; // in the velocity space
  Vec2 lid_value{1.0, 0.0};
};

/// Nodal interpolant: lid_value on Lid dofs, zero on Wall and interior dofs.
LiftingFunction build_lifting(const FeSpace &vel, Vec2 lid_value = Vec2(1.0, 0.0));

/// Evaluates a vector field of `vel` at point x of triangle t.
Vec2 evaluate_vector(const FeSpace &vel, const Vec &coefficients, int t, const Vec2 &x);

/// F(v) = -a(l, v), G(q) = -b(l, q) as affine vectors.
AffineVector affine_lifting_momentum(const FeSpace &vel, const LiftingFunction &lift);
AffineVector affine_lifting_continuity(const FeSpace &vel, const FeSpace &pres, const LiftingFunction &lift);

/// Matrix Market coordinate export.
void write_matrix_market(std::ostream &os, const SpMat &m);

} // namespace rbstab
