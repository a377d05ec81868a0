#include "rbstab/stabilization.hpp"

#include "element_loop.hpp"

namespace rbstab
{

using namespace detail;

namespace
{

void check_inputs(const FeSpace &vel, const FeSpace &pres, double delta, const char *who)
{
  if (!vel.is_vector() || pres.is_vector())
    throw UsageError(std::string(who) + ": expected a vector velocity and a scalar pressure space");
  if (&vel.mesh() != &pres.mesh())
    throw UsageError(std::string(who) + ": spaces live on different meshes");
  if (pres.degree() < 1)
    throw UsageError(std::string(who) + ": pressure gradients vanish for P0, use the jump term");
  if (!(delta >= 0.0))
    throw DomainError(std::string(who) + ": delta must be nonnegative");
}

struct Geometry
{
  Mat2 jinv;
  double det;
};

Geometry geometry(const GeoMap &map)
{
  return {map.jacobian().inverse(), map.det()};
}

// Gradient-tested blocks on one element for the geometry (jinv, det).
// mt: (u, grad q), bs: (-lap u, grad q) without nu, s: (grad p, grad q).
void franca_hughes_local(const ElementShape &sv, const ElementShape &sp, const Geometry &g, PhysicalShape &pv,
                         PhysicalShape &pp, Mat &mt, Mat &bs, Mat &s)
{
  physical_shape(sv, g.jinv, g.det, pv);
  physical_shape(sp, g.jinv, g.det, pp);
  const int nv = sv.n, np = sp.n;
  const auto w = pp.meas.asDiagonal();
  mt.resize(np, 2 * nv);
  bs.resize(np, 2 * nv);
  const Vec sum_qx = pp.gx.transpose() * pp.meas;
  const Vec sum_qy = pp.gy.transpose() * pp.meas;
  mt.leftCols(nv) = pp.gx.transpose() * w * sv.vals;
  mt.rightCols(nv) = pp.gy.transpose() * w * sv.vals;
  // The physical Laplacian is constant on the element.
  bs.leftCols(nv) = -sum_qx * pv.lap.transpose();
  bs.rightCols(nv) = -sum_qy * pv.lap.transpose();
  s = pp.gx.transpose() * w * pp.gx + pp.gy.transpose() * w * pp.gy;
}

int fh_degree(const FeSpace &vel, const FeSpace &pres)
{
  return vel.degree() + pres.degree() - 1;
}

} // namespace

FrancaHughesBlocks assemble_franca_hughes(const FeSpace &vel, const FeSpace &pres, double nu, const GeoMap &map,
                                          double delta)
{
  check_inputs(vel, pres, delta, "assemble_franca_hughes");
  if (!(nu > 0.0))
    throw DomainError("assemble_franca_hughes: viscosity must be positive");
  const Geometry g = geometry(map);
  std::vector<Triplet> tm, tb, ts;
  std::vector<int> cols;
  PhysicalShape pv, pp;
  Mat mt, bs, s;
  for_each_triangle(pres, vel, rule_for_degree(fh_degree(vel, pres)),
                    [&](int, const ElementShape &sp, const std::vector<int> &dp, const ElementShape &sv,
                        const std::vector<int> &dv) {
                      franca_hughes_local(sv, sp, g, pv, pp, mt, bs, s);
                      const double tau = delta * sp.h_K * sp.h_K;
                      expand_components(vel, dv, cols);
                      scatter(tm, dp, cols, tau * mt);
                      scatter(tb, dp, cols, tau * nu * bs);
                      scatter(ts, dp, dp, tau * s);
                    });
  FrancaHughesBlocks out;
  out.mtilde = from_triplets(pres.dof_count(), vel.dof_count(), tm);
  out.bsu = from_triplets(pres.dof_count(), vel.dof_count(), tb);
  out.s = from_triplets(pres.dof_count(), pres.dof_count(), ts);
  return out;
}

FrancaHughesBlocks assemble_franca_hughes(const FeSpace &vel, const FeSpace &pres, const Physical &phys,
                                          double delta)
{
  return assemble_franca_hughes(vel, pres, phys.nu, GeoMap::stretch(phys.length), delta);
}

AffineFrancaHughes affine_franca_hughes(const FeSpace &vel, const FeSpace &pres, double delta, MapFamily family)
{
  if (family != MapFamily::AxisStretch)
    throw UnsupportedError("affine decomposition exists only for the axis stretch family");
  check_inputs(vel, pres, delta, "affine_franca_hughes");

  // Reference directional pieces: x-part and y-part of each form.
  const int nu_dofs = vel.dof_count(), np_dofs = pres.dof_count();
  std::vector<Triplet> m_x, m_y, s_x, s_y, b_xx_x, b_yy_x, b_xx_y, b_yy_y;
  std::vector<int> cols;
  for_each_triangle(pres, vel, rule_for_degree(fh_degree(vel, pres)),
                    [&](int, const ElementShape &sp, const std::vector<int> &dp, const ElementShape &sv,
                        const std::vector<int> &dv) {
                      const Eigen::Map<const Vec> w(sp.jxw.data(), sp.jxw.size());
                      const double tau = delta * sp.h_K * sp.h_K;
                      const int nv = sv.n, np = sp.n;
                      const Vec qx = sp.dx.transpose() * w, qy = sp.dy.transpose() * w;
                      Mat lx = Mat::Zero(np, 2 * nv), ly = Mat::Zero(np, 2 * nv);
                      expand_components(vel, dv, cols);
                      // (u_x, q_x) and (u_y, q_y)
                      lx.leftCols(nv) = tau * sp.dx.transpose() * w.asDiagonal() * sv.vals;
                      ly.rightCols(nv) = tau * sp.dy.transpose() * w.asDiagonal() * sv.vals;
                      scatter(m_x, dp, cols, lx);
                      scatter(m_y, dp, cols, ly);
                      // (-u_c,aa, q_c) split by second derivative direction a and component c
                      Mat l1 = Mat::Zero(np, 2 * nv), l2 = Mat::Zero(np, 2 * nv), l3 = Mat::Zero(np, 2 * nv),
                          l4 = Mat::Zero(np, 2 * nv);
                      l1.leftCols(nv) = -tau * qx * sv.dxx.transpose();
                      l2.leftCols(nv) = -tau * qx * sv.dyy.transpose();
                      l3.rightCols(nv) = -tau * qy * sv.dxx.transpose();
                      l4.rightCols(nv) = -tau * qy * sv.dyy.transpose();
                      scatter(b_xx_x, dp, cols, l1);
                      scatter(b_yy_x, dp, cols, l2);
                      scatter(b_xx_y, dp, cols, l3);
                      scatter(b_yy_y, dp, cols, l4);
                      scatter(s_x, dp, dp, tau * sp.dx.transpose() * w.asDiagonal() * sp.dx);
                      scatter(s_y, dp, dp, tau * sp.dy.transpose() * w.asDiagonal() * sp.dy);
                    });

  AffineFrancaHughes out;
  out.mtilde.add(Theta{1.0, 0, 0}, from_triplets(np_dofs, nu_dofs, m_x));
  out.mtilde.add(Theta{1.0, 0, 1}, from_triplets(np_dofs, nu_dofs, m_y));
  out.bsu.add(Theta{1.0, 1, -2}, from_triplets(np_dofs, nu_dofs, b_xx_x));
  out.bsu.add(Theta{1.0, 1, 0}, from_triplets(np_dofs, nu_dofs, b_yy_x));
  out.bsu.add(Theta{1.0, 1, -1}, from_triplets(np_dofs, nu_dofs, b_xx_y));
  out.bsu.add(Theta{1.0, 1, 1}, from_triplets(np_dofs, nu_dofs, b_yy_y));
  out.s.add(Theta{1.0, 0, -1}, from_triplets(np_dofs, np_dofs, s_x));
  out.s.add(Theta{1.0, 0, 1}, from_triplets(np_dofs, np_dofs, s_y));
  return out;
}

SpMat assemble_pressure_jump(const FeSpace &pres, double delta)
{
  if (pres.is_vector())
    throw UsageError("assemble_pressure_jump: scalar space expected");
  if (!(delta >= 0.0))
    throw DomainError("assemble_pressure_jump: delta must be nonnegative");
  if (pres.degree() > 0)
    throw UsageError("assemble_pressure_jump: P0 pressure space expected");
  const int n = pres.dof_count();
  const Mesh &mesh = pres.mesh();
  std::vector<Triplet> trip;
  for (int e = 0; e < mesh.n_edges(); ++e)
  {
    const Edge &edge = mesh.edges()[e];
    if (edge.on_boundary())
      continue;
    const double len = mesh.edge_length(e);
    // [p] is constant along the edge: h_sigma * |sigma| * jump products.
    const double c = delta * len * len;
    const int a = edge.triangles[0], b = edge.triangles[1];
    trip.emplace_back(a, a, c);
    trip.emplace_back(b, b, c);
    trip.emplace_back(a, b, -c);
    trip.emplace_back(b, a, -c);
  }
  return from_triplets(n, n, trip);
}

SupgBlocks assemble_supg(const FeSpace &vel, const FeSpace &pres, const Physical &phys, double delta, const Vec &w)
{
  check_inputs(vel, pres, delta, "assemble_supg");
  if (w.size() != vel.dof_count())
    throw UsageError("assemble_supg: transport field has wrong length");
  const Geometry g = geometry(GeoMap::stretch(phys.length));
  const double nu = phys.nu;
  const int nu_dofs = vel.dof_count(), np_dofs = pres.dof_count(), ns = vel.scalar_dof_count();
  std::vector<Triplet> t_time, t_visc, t_conv, t_pv, t_uqt, t_uqv, t_uqc, t_pq;
  std::vector<int> cols;
  PhysicalShape pv, pp;
  const int k = vel.degree();
  const int degree = std::max(4 * k - 2, 2 * k + pres.degree() - 2);
  for_each_triangle(vel, pres, rule_for_degree(degree),
                    [&](int, const ElementShape &sv, const std::vector<int> &dv, const ElementShape &sp,
                        const std::vector<int> &dp) {
                      physical_shape(sv, g.jinv, g.det, pv);
                      physical_shape(sp, g.jinv, g.det, pp);
                      const double tau = delta * sv.h_K * sv.h_K;
                      const Mat wq = sv.vals * local_vector_coefficients(vel, w, dv); // nq x 2
                      // transport derivative of each velocity shape function, nq x n
                      const Mat tr = wq.col(0).asDiagonal() * pv.gx + wq.col(1).asDiagonal() * pv.gy;
                      const auto m = pv.meas.asDiagonal();
                      const int nv = sv.n, np = sp.n;

                      scatter(t_time, dv, dv, tau * tr.transpose() * m * sv.vals);
                      scatter(t_visc, dv, dv, tau * nu * (tr.transpose() * pv.meas) * (-pv.lap.transpose()));
                      scatter(t_conv, dv, dv, tau * tr.transpose() * m * tr);

                      Mat lpv(2 * nv, np);
                      lpv.topRows(nv) = tau * tr.transpose() * m * pp.gx;
                      lpv.bottomRows(nv) = tau * tr.transpose() * m * pp.gy;
                      expand_components(vel, dv, cols);
                      scatter(t_pv, cols, dp, lpv);

                      Mat lt(np, 2 * nv), lv(np, 2 * nv), lc(np, 2 * nv);
                      const Vec sx = pp.gx.transpose() * pv.meas, sy = pp.gy.transpose() * pv.meas;
                      lt.leftCols(nv) = tau * pp.gx.transpose() * m * sv.vals;
                      lt.rightCols(nv) = tau * pp.gy.transpose() * m * sv.vals;
                      lv.leftCols(nv) = -tau * nu * sx * pv.lap.transpose();
                      lv.rightCols(nv) = -tau * nu * sy * pv.lap.transpose();
                      lc.leftCols(nv) = tau * pp.gx.transpose() * m * tr;
                      lc.rightCols(nv) = tau * pp.gy.transpose() * m * tr;
                      scatter(t_uqt, dp, cols, lt);
                      scatter(t_uqv, dp, cols, lv);
                      scatter(t_uqc, dp, cols, lc);
                      scatter(t_pq, dp, dp, tau * (pp.gx.transpose() * m * pp.gx + pp.gy.transpose() * m * pp.gy));
                    });
  SupgBlocks out;
  out.uv_time = block_diagonal(from_triplets(ns, ns, t_time), 2);
  out.uv_visc = block_diagonal(from_triplets(ns, ns, t_visc), 2);
  out.uv_conv = block_diagonal(from_triplets(ns, ns, t_conv), 2);
  out.pv = from_triplets(nu_dofs, np_dofs, t_pv);
  out.uq_time = from_triplets(np_dofs, nu_dofs, t_uqt);
  out.uq_visc = from_triplets(np_dofs, nu_dofs, t_uqv);
  out.uq_conv = from_triplets(np_dofs, nu_dofs, t_uqc);
  out.pq = from_triplets(np_dofs, np_dofs, t_pq);
  return out;
}

} // namespace rbstab
