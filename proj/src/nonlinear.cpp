#include "rbstab/nonlinear.hpp"

#include "element_loop.hpp"

namespace rbstab
{

using namespace detail;

void navier_stokes_terms(const FeSpace &vel, const FeSpace &pres, const Physical &phys, double delta, double dt,
                         const Vec &u, const Vec &p, const Vec &u_old, bool with_jacobian, NavierStokesTerms &out)
{
  if (!vel.is_vector() || pres.is_vector())
    throw UsageError("navier_stokes_terms: expected a vector velocity and a scalar pressure space");
  if (u.size() != vel.dof_count() || u_old.size() != vel.dof_count() || p.size() != pres.dof_count())
    throw UsageError("navier_stokes_terms: coefficient vector has wrong length");
  if (!(dt > 0.0))
    throw DomainError("navier_stokes_terms: time step must be positive");
  const bool supg = delta > 0.0;

  const GeoMap map = GeoMap::stretch(phys.length);
  const Mat2 jinv = map.jacobian().inverse();
  const double det = map.det();
  const double nu = phys.nu;
  const int nu_dofs = vel.dof_count(), np_dofs = pres.dof_count();

  out.ru = Vec::Zero(nu_dofs);
  out.rp = Vec::Zero(np_dofs);
  std::vector<Triplet> tuu, tup, tpu;
  std::vector<int> cols;
  PhysicalShape pv, pp;
  const int k = vel.degree();
  const int degree = std::max(4 * k - 2, 2 * k + pres.degree() - 2);

  for_each_triangle(vel, pres, rule_for_degree(degree),
                    [&](int, const ElementShape &sv, const std::vector<int> &dv, const ElementShape &sp,
                        const std::vector<int> &dp) {
                      physical_shape(sv, jinv, det, pv);
                      physical_shape(sp, jinv, det, pp);
                      const double tau = supg ? delta * sv.h_K * sv.h_K : 0.0;
                      const int n = sv.n, np = sp.n, nq = static_cast<int>(pv.meas.size());

                      const Mat ul = local_vector_coefficients(vel, u, dv);
                      const Mat uq = sv.vals * ul; // nq x 2
                      Mat grad[2][2];              // grad[c][d](q) = d u_c / d x_d
                      for (int c = 0; c < 2; ++c)
                      {
                        grad[c][0] = pv.gx * ul.col(c);
                        grad[c][1] = pv.gy * ul.col(c);
                      }
                      const Mat tr = uq.col(0).asDiagonal() * pv.gx + uq.col(1).asDiagonal() * pv.gy; // u.grad phi
                      Mat conv(nq, 2);
                      for (int c = 0; c < 2; ++c)
                        conv.col(c) = uq.col(0).cwiseProduct(grad[c][0].col(0)) +
                                      uq.col(1).cwiseProduct(grad[c][1].col(0));

                      Mat res = conv;
                      if (supg)
                      {
                        const Mat uo = sv.vals * local_vector_coefficients(vel, u_old, dv);
                        const Vec pl = local_scalar_coefficients(p, dp);
                        const Vec px = pp.gx * pl, py = pp.gy * pl;
                        const Vec2 lap_u = ul.transpose() * pv.lap;
                        res += (uq - uo) / dt;
                        res.col(0) += px - Vec::Constant(nq, nu * lap_u.x());
                        res.col(1) += py - Vec::Constant(nq, nu * lap_u.y());
                      }

                      for (int c = 0; c < 2; ++c)
                      {
                        Vec r = sv.vals.transpose() * pv.meas.cwiseProduct(conv.col(c));
                        if (supg)
                          r += tau * tr.transpose() * pv.meas.cwiseProduct(res.col(c));
                        for (int i = 0; i < n; ++i)
                          out.ru[vel.component_dof(c, dv[i])] += r[i];
                      }
                      if (supg)
                      {
                        const Vec r = -tau * (pp.gx.transpose() * pv.meas.cwiseProduct(conv.col(0)) +
                                              pp.gy.transpose() * pv.meas.cwiseProduct(conv.col(1)));
                        for (int i = 0; i < np; ++i)
                          out.rp[dp[i]] += r[i];
                      }
                      if (!with_jacobian)
                        return;

                      const auto m = pv.meas.asDiagonal();
                      const Mat test = sv.vals + tau * tr; // Galerkin plus streamline test functions
                      Mat diag = sv.vals.transpose() * m * tr;
                      if (supg)
                        diag += tau * tr.transpose() * m * (sv.vals / dt + tr) -
                                tau * nu * (tr.transpose() * pv.meas) * pv.lap.transpose();
                      Mat local(2 * n, 2 * n);
                      for (int c = 0; c < 2; ++c)
                        for (int e = 0; e < 2; ++e)
                        {
                          const Vec wg = pv.meas.cwiseProduct(grad[c][e].col(0));
                          Mat block = test.transpose() * wg.asDiagonal() * sv.vals;
                          if (c == e)
                            block += diag;
                          local.block(c * n, e * n, n, n) = block;
                        }
                      expand_components(vel, dv, cols);
                      scatter(tuu, cols, cols, local);

                      if (supg)
                      {
                        Mat lup(2 * n, np);
                        lup.topRows(n) = tau * tr.transpose() * m * pp.gx;
                        lup.bottomRows(n) = tau * tr.transpose() * m * pp.gy;
                        scatter(tup, cols, dp, lup);

                        const Mat *gq[2] = {&pp.gx, &pp.gy};
                        Mat lpu(np, 2 * n);
                        for (int e = 0; e < 2; ++e)
                        {
                          Mat block = gq[e]->transpose() * m * tr;
                          for (int c = 0; c < 2; ++c)
                          {
                            const Vec wg = pv.meas.cwiseProduct(grad[c][e].col(0));
                            block += gq[c]->transpose() * wg.asDiagonal() * sv.vals;
                          }
                          lpu.middleCols(e * n, n) = -tau * block;
                        }
                        scatter(tpu, dp, cols, lpu);
                      }
                    });

  if (with_jacobian)
  {
    out.juu = from_triplets(nu_dofs, nu_dofs, tuu);
    out.jup = from_triplets(nu_dofs, np_dofs, tup);
    out.jpu = from_triplets(np_dofs, nu_dofs, tpu);
  }
}

} // namespace rbstab
