#include "rbstab/assembly.hpp"

#include "element_loop.hpp"

#include <map>
#include <mutex>
#include <ostream>

namespace rbstab
{

namespace detail
{

const QuadRule &rule_for_degree(int degree)
{
  static std::map<int, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end())
    it = cache.emplace(degree, triangle_rule(degree)).first;
  return it->second;
}

SpMat block_diagonal(const SpMat &s, int comps)
{
  if (comps == 1)
    return s;
  std::vector<Triplet> trip;
  trip.reserve(s.nonZeros() * comps);
  for (int c = 0; c < comps; ++c)
    for (int k = 0; k < s.outerSize(); ++k)
      for (SpMat::InnerIterator it(s, k); it; ++it)
        trip.emplace_back(c * s.rows() + it.row(), c * s.cols() + it.col(), it.value());
  SpMat out(comps * s.rows(), comps * s.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

} // namespace detail

using namespace detail;

namespace
{

void require_lagrange(const FeSpace &space, const char *who)
{
  if (space.degree() < 1)
    throw UsageError(std::string(who) + ": P0 is a pressure-only space");
}

void require_pair(const FeSpace &vel, const FeSpace &pres, const char *who)
{
  if (!vel.is_vector())
    throw UsageError(std::string(who) + ": velocity space must be vector valued");
  if (pres.is_vector())
    throw UsageError(std::string(who) + ": pressure space must be scalar");
  if (&vel.mesh() != &pres.mesh())
    throw UsageError(std::string(who) + ": spaces live on different meshes");
}

void require_family(MapFamily family)
{
  if (family != MapFamily::AxisStretch)
    throw UnsupportedError("affine decomposition exists only for the axis stretch family");
}

SpMat scalar_mass(const FeSpace &space, double scale)
{
  const int n = space.scalar_dof_count();
  std::vector<Triplet> trip;
  for_each_triangle(space, space, rule_for_degree(2 * space.degree()),
                    [&](int, const ElementShape &s, const std::vector<int> &d, const ElementShape &,
                        const std::vector<int> &) {
                      const Eigen::Map<const Vec> w(s.jxw.data(), s.jxw.size());
                      const Mat local = scale * s.vals.transpose() * w.asDiagonal() * s.vals;
                      scatter(trip, d, d, local);
                    });
  return from_triplets(n, n, trip);
}

// Scalar stiffness with a constant 2x2 coefficient: sum_ab K_ab d_a u d_b v.
SpMat scalar_stiffness(const FeSpace &space, const Mat2 &k)
{
  const int n = space.scalar_dof_count();
  std::vector<Triplet> trip;
  for_each_triangle(space, space, rule_for_degree(std::max(0, 2 * space.degree() - 2)),
                    [&](int, const ElementShape &s, const std::vector<int> &d, const ElementShape &,
                        const std::vector<int> &) {
                      const Eigen::Map<const Vec> w(s.jxw.data(), s.jxw.size());
                      const Mat *g[2] = {&s.dx, &s.dy};
                      Mat local = Mat::Zero(s.n, s.n);
                      for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b)
                          if (k(a, b) != 0.0)
                            local += k(a, b) * g[a]->transpose() * w.asDiagonal() * *g[b];
                      scatter(trip, d, d, local);
                    });
  return from_triplets(n, n, trip);
}

// -int psi sum_ic coef(i, c) d_i v_c, returned as (n_p x n_u).
SpMat divergence_with(const FeSpace &vel, const FeSpace &pres, const Mat2 &coef)
{
  std::vector<Triplet> trip;
  std::vector<int> cols;
  for_each_triangle(pres, vel, rule_for_degree(pres.degree() + vel.degree() - 1),
                    [&](int, const ElementShape &sp, const std::vector<int> &dp, const ElementShape &sv,
                        const std::vector<int> &dv) {
                      const Eigen::Map<const Vec> w(sp.jxw.data(), sp.jxw.size());
                      const Mat *g[2] = {&sv.dx, &sv.dy};
                      Mat local = Mat::Zero(sp.n, 2 * sv.n);
                      for (int c = 0; c < 2; ++c)
                        for (int i = 0; i < 2; ++i)
                          if (coef(i, c) != 0.0)
                            local.middleCols(c * sv.n, sv.n) -=
                              coef(i, c) * sp.vals.transpose() * w.asDiagonal() * *g[i];
                      expand_components(vel, dv, cols);
                      scatter(trip, dp, cols, local);
                    });
  return from_triplets(pres.dof_count(), vel.dof_count(), trip);
}

// Scalar block of c(w, u, v) with transport chi w.
SpMat convection_with(const FeSpace &vel, const Mat2 &chi, const Vec &w)
{
  if (w.size() != vel.dof_count())
    throw UsageError("convection: transport field has wrong length");
  const int n = vel.scalar_dof_count();
  std::vector<Triplet> trip;
  for_each_triangle(vel, vel, rule_for_degree(3 * vel.degree() - 1),
                    [&](int, const ElementShape &s, const std::vector<int> &d, const ElementShape &,
                        const std::vector<int> &) {
                      const Mat wl = local_vector_coefficients(vel, w, d);
                      const Mat wq = s.vals * wl; // nq x 2
                      Vec bx(s.jxw.size()), by(s.jxw.size());
                      for (int q = 0; q < wq.rows(); ++q)
                      {
                        const Vec2 beta = chi * wq.row(q).transpose();
                        bx[q] = s.jxw[q] * beta.x();
                        by[q] = s.jxw[q] * beta.y();
                      }
                      const Mat local =
                        s.vals.transpose() * (bx.asDiagonal() * s.dx + by.asDiagonal() * s.dy);
                      scatter(trip, d, d, local);
                    });
  return from_triplets(n, n, trip);
}

} // namespace

SpMat assemble_mass(const FeSpace &space, const GeoMap &map)
{
  require_lagrange(space, "assemble_mass");
  return block_diagonal(scalar_mass(space, map.det()), space.components());
}

SpMat assemble_mass(const FeSpace &space, const Physical &phys)
{
  return assemble_mass(space, GeoMap::stretch(phys.length));
}

SpMat assemble_diffusion(const FeSpace &space, double nu, const GeoMap &map)
{
  require_lagrange(space, "assemble_diffusion");
  const ParamTensors pt = param_tensors(nu, map);
  return block_diagonal(scalar_stiffness(space, pt.kappa), space.components());
}

SpMat assemble_diffusion(const FeSpace &space, const Physical &phys)
{
  return assemble_diffusion(space, phys.nu, GeoMap::stretch(phys.length));
}

SpMat assemble_divergence(const FeSpace &vel, const FeSpace &pres, double nu, const GeoMap &map)
{
  require_pair(vel, pres, "assemble_divergence");
  return divergence_with(vel, pres, param_tensors(nu, map).chi);
}

SpMat assemble_divergence(const FeSpace &vel, const FeSpace &pres, const Physical &phys)
{
  return assemble_divergence(vel, pres, phys.nu, GeoMap::stretch(phys.length));
}

SpMat assemble_convection(const FeSpace &vel, const GeoMap &map, const Vec &w)
{
  if (!vel.is_vector())
    throw UsageError("assemble_convection: velocity space must be vector valued");
  return block_diagonal(convection_with(vel, param_tensors(1.0, map).chi, w), 2);
}

SpMat assemble_convection(const FeSpace &vel, const Physical &phys, const Vec &w)
{
  return assemble_convection(vel, GeoMap::stretch(phys.length), w);
}

SpMat assemble_pressure_mass(const FeSpace &pres)
{
  if (pres.is_vector())
    throw UsageError("assemble_pressure_mass: scalar space expected");
  return scalar_mass(pres, 1.0);
}

Vec pressure_mean_weights(const FeSpace &pres)
{
  if (pres.is_vector())
    throw UsageError("pressure_mean_weights: scalar space expected");
  Vec out = Vec::Zero(pres.dof_count());
  for_each_triangle(pres, pres, rule_for_degree(pres.degree()),
                    [&](int, const ElementShape &s, const std::vector<int> &d, const ElementShape &,
                        const std::vector<int> &) {
                      const Eigen::Map<const Vec> w(s.jxw.data(), s.jxw.size());
                      const Vec local = s.vals.transpose() * w;
                      for (int i = 0; i < s.n; ++i)
                        out[d[i]] += local[i];
                    });
  return out;
}

SpMat velocity_inner_product(const FeSpace &vel)
{
  return assemble_diffusion(vel, Physical{1.0, 1.0});
}

AffineMatrix affine_mass(const FeSpace &space, MapFamily family)
{
  require_family(family);
  require_lagrange(space, "affine_mass");
  AffineMatrix out;
  out.add(Theta{1.0, 0, 1}, block_diagonal(scalar_mass(space, 1.0), space.components()));
  return out;
}

AffineMatrix affine_diffusion(const FeSpace &space, MapFamily family)
{
  require_family(family);
  require_lagrange(space, "affine_diffusion");
  Mat2 ex = Mat2::Zero(), ey = Mat2::Zero();
  ex(0, 0) = 1.0;
  ey(1, 1) = 1.0;
  AffineMatrix out;
  out.add(Theta{1.0, 1, -1}, block_diagonal(scalar_stiffness(space, ex), space.components()));
  out.add(Theta{1.0, 1, 1}, block_diagonal(scalar_stiffness(space, ey), space.components()));
  return out;
}

AffineMatrix affine_divergence(const FeSpace &vel, const FeSpace &pres, MapFamily family)
{
  require_family(family);
  require_pair(vel, pres, "affine_divergence");
  Mat2 ex = Mat2::Zero(), ey = Mat2::Zero();
  ex(0, 0) = 1.0;
  ey(1, 1) = 1.0;
  AffineMatrix out;
  out.add(Theta{1.0, 0, 0}, divergence_with(vel, pres, ex));
  out.add(Theta{1.0, 0, 1}, divergence_with(vel, pres, ey));
  return out;
}

AffineMatrix affine_convection(const FeSpace &vel, const Vec &w, MapFamily family)
{
  require_family(family);
  if (!vel.is_vector())
    throw UsageError("affine_convection: velocity space must be vector valued");
  Mat2 ex = Mat2::Zero(), ey = Mat2::Zero();
  ex(0, 0) = 1.0;
  ey(1, 1) = 1.0;
  AffineMatrix out;
  out.add(Theta{1.0, 0, 0}, block_diagonal(convection_with(vel, ex, w), 2));
  out.add(Theta{1.0, 0, 1}, block_diagonal(convection_with(vel, ey, w), 2));
  return out;
}

AffineVector affine_apply(const AffineMatrix &op, const Vec &x, double sign)
{
  if (x.size() != op.cols)
    throw UsageError("affine_apply: length mismatch");
  AffineVector out;
  for (const auto &t : op.terms)
    out.add(t.theta, sign * (t.term * x));
  return out;
}

LiftingFunction build_lifting(const FeSpace &vel, Vec2 lid_value)
{
  if (!vel.is_vector())
    throw UsageError("build_lifting: velocity space must be vector valued");
  LiftingFunction lift;
  lift.lid_value = lid_value;
  lift.coefficients = Vec::Zero(vel.dof_count());
  for (int i = 0; i < vel.scalar_dof_count(); ++i)
    if (vel.scalar_dof_tag(i) == BoundaryTag::Lid)
      for (int c = 0; c < 2; ++c)
        lift.coefficients[vel.component_dof(c, i)] = lid_value[c];
  return lift;
}

Vec2 evaluate_vector(const FeSpace &vel, const Vec &coefficients, int t, const Vec2 &x)
{
  Vec vals, dx, dy;
  evaluate_shape_at(vel, t, x, vals, dx, dy);
  std::vector<int> d;
  vel.local_dofs(t, d);
  return local_vector_coefficients(vel, coefficients, d).transpose() * vals;
}

AffineVector affine_lifting_momentum(const FeSpace &vel, const LiftingFunction &lift)
{
  return affine_apply(affine_diffusion(vel), lift.coefficients, -1.0);
}

AffineVector affine_lifting_continuity(const FeSpace &vel, const FeSpace &pres, const LiftingFunction &lift)
{
  return affine_apply(affine_divergence(vel, pres), lift.coefficients, -1.0);
}

void write_matrix_market(std::ostream &os, const SpMat &m)
{
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

} // namespace rbstab
