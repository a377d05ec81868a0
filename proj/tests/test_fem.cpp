#include "oracle.hpp"

#include "rbstab/full_order.hpp"
#include "rbstab/quadrature.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <sstream>

using namespace rbstab;

namespace
{

std::shared_ptr<const Mesh> square(int n)
{
  return std::make_shared<const Mesh>(build_structured_mesh(n, n));
}

std::shared_ptr<const Mesh> unit_triangle()
{
  return std::make_shared<const Mesh>(Mesh({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}}));
}

// Interpolant of a vector field at the dof points.
Vec interpolate(const FeSpace &vel, const std::function<Vec2(const Vec2 &)> &f)
{
  Vec out(vel.dof_count());
  for (int d = 0; d < vel.scalar_dof_count(); ++d)
  {
    const Vec2 v = f(vel.scalar_dof_point(d));
    out[vel.component_dof(0, d)] = v[0];
    out[vel.component_dof(1, d)] = v[1];
  }
  return out;
}

Vec interpolate_scalar(const FeSpace &s, const std::function<double(const Vec2 &)> &f)
{
  Vec out(s.dof_count());
  for (int d = 0; d < s.dof_count(); ++d)
    out[d] = f(s.scalar_dof_point(d));
  return out;
}

double factorial(int n)
{
  return n <= 1 ? 1.0 : n * factorial(n - 1);
}

} // namespace

TEST(FeSpace, DofCounts)
{
  auto m = square(3);
  EXPECT_EQ(FeSpace(m, SpaceKind::ScalarP0).dof_count(), m->n_triangles());
  EXPECT_EQ(FeSpace(m, SpaceKind::ScalarP1).dof_count(), m->n_vertices());
  EXPECT_EQ(FeSpace(m, SpaceKind::ScalarP2).dof_count(), m->n_vertices() + m->n_edges());
  EXPECT_EQ(FeSpace(m, SpaceKind::VectorP1).dof_count(), 2 * m->n_vertices());
  EXPECT_EQ(FeSpace(m, SpaceKind::VectorP2).dof_count(), 2 * (m->n_vertices() + m->n_edges()));
}

TEST(FeSpace, DofmapInRange)
{
  auto m = square(3);
  for (SpaceKind k : {SpaceKind::ScalarP0, SpaceKind::ScalarP1, SpaceKind::ScalarP2})
  {
    const FeSpace s(m, k);
    std::vector<int> dofs;
    for (int t = 0; t < m->n_triangles(); ++t)
    {
      s.local_dofs(t, dofs);
      EXPECT_EQ(static_cast<int>(dofs.size()), s.local_scalar_count());
      for (int d : dofs)
      {
        EXPECT_GE(d, 0);
        EXPECT_LT(d, s.scalar_dof_count());
      }
    }
  }
}

TEST(FeSpace, ShapePartitionOfUnity)
{
  auto m = square(2);
  const QuadRule rule = triangle_rule(4);
  for (SpaceKind k : {SpaceKind::ScalarP1, SpaceKind::ScalarP2})
  {
    const FeSpace s(m, k);
    ElementShape sh;
    for (int t = 0; t < m->n_triangles(); ++t)
    {
      evaluate_shape(s, t, rule, sh);
      EXPECT_LT((sh.vals.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-14);
      EXPECT_LT(sh.dx.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(sh.dy.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Quadrature, ExactOnMonomials)
{
  for (int deg = 0; deg <= 10; ++deg)
  {
    const QuadRule r = triangle_rule(deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
      {
        double s = 0.0;
        for (int q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        EXPECT_NEAR(s, exact, 1e-15) << "degree " << deg << " x^" << a << " y^" << b;
      }
  }
}

TEST(Assembly, UnitTriangleP1Mass)
{
  const FeSpace s(unit_triangle(), SpaceKind::ScalarP1);
  const Mat m = Mat(assemble_mass(s, GeoMap::stretch(1.0)));
  Mat expected(3, 3);
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected /= 24.0;
  EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(Assembly, MassScalesWithLength)
{
  const FeSpace v(square(3), SpaceKind::VectorP2);
  const Mat m1 = Mat(assemble_mass(v, GeoMap::stretch(1.0)));
  const Mat m2 = Mat(assemble_mass(v, GeoMap::stretch(2.0)));
  EXPECT_LT((m2 - 2.0 * m1).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, MassOfConstantField)
{
  const FeSpace v(square(3), SpaceKind::VectorP1);
  const Vec e = interpolate(v, [](const Vec2 &) { return Vec2(1.0, 0.0); });
  EXPECT_NEAR(e.dot(assemble_mass(v, GeoMap::stretch(1.0)) * e), 1.0, 1e-14);
}

TEST(Assembly, MassRejectsPressureSpace)
{
  const FeSpace p(square(2), SpaceKind::ScalarP0);
  EXPECT_THROW(assemble_mass(p, GeoMap::stretch(1.0)), UsageError);
}

TEST(Assembly, DiffusionOfLinearField)
{
  const FeSpace v(square(3), SpaceKind::VectorP2);
  const Vec u = interpolate(v, [](const Vec2 &x) { return Vec2(x[0], 0.0); });
  EXPECT_NEAR(u.dot(assemble_diffusion(v, 1.0, GeoMap::stretch(1.0)) * u), 1.0, 1e-13);
}

TEST(Assembly, DiffusionKernelAndScaling)
{
  const FeSpace v(square(3), SpaceKind::VectorP2);
  const Vec c = interpolate(v, [](const Vec2 &) { return Vec2(0.3, -1.2); });
  const SpMat a = assemble_diffusion(v, 1.0, GeoMap::stretch(1.4));
  EXPECT_LT((a * c).cwiseAbs().maxCoeff(), 1e-13);
  const SpMat a2 = assemble_diffusion(v, 2.0, GeoMap::stretch(1.4));
  EXPECT_LT(Mat(a2 - 2.0 * a).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, Symmetry)
{
  const FeSpace v(square(3), SpaceKind::VectorP2);
  const Mat m = Mat(assemble_mass(v, GeoMap::stretch(1.3)));
  const Mat a = Mat(assemble_diffusion(v, 0.7, GeoMap::stretch(1.3)));
  EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(Eigen::LLT<Mat>(m).info(), Eigen::Success);
}

TEST(Assembly, DivergenceExamples)
{
  auto mesh = square(3);
  const FeSpace v(mesh, SpaceKind::VectorP2), p(mesh, SpaceKind::ScalarP1);
  const SpMat b = assemble_divergence(v, p, 1.0, GeoMap::stretch(1.0));
  EXPECT_EQ(b.rows(), p.dof_count());
  EXPECT_EQ(b.cols(), v.dof_count());
  const Vec one = Vec::Ones(p.dof_count());
  const Vec ux = interpolate(v, [](const Vec2 &x) { return Vec2(x[0], 0.0); });
  EXPECT_NEAR(one.dot(b * ux), -1.0, 1e-14);
  const Vec uy = interpolate(v, [](const Vec2 &x) { return Vec2(x[1], 0.0); });
  EXPECT_LT((b * uy).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(assemble_divergence(p, p, 1.0, GeoMap::stretch(1.0)), UsageError);
}

TEST(Assembly, ConvectionExamples)
{
  auto mesh = square(3);
  const FeSpace v(mesh, SpaceKind::VectorP2);
  const GeoMap g = GeoMap::stretch(1.0);
  EXPECT_EQ(assemble_convection(v, g, Vec::Zero(v.dof_count())).nonZeros(), 0);

  const Vec w = interpolate(v, [](const Vec2 &) { return Vec2(1.0, 0.0); });
  const Vec ux = interpolate(v, [](const Vec2 &x) { return Vec2(x[0], 0.0); });
  EXPECT_NEAR(ux.dot(assemble_convection(v, g, w) * ux), 0.5, 1e-14);

  EXPECT_THROW(assemble_convection(v, g, Vec::Zero(3)), UsageError);
}

TEST(Assembly, ConvectionSkewForZeroTrace)
{
  auto mesh = square(4);
  const FeSpace v(mesh, SpaceKind::VectorP2);
  const Vec w = interpolate(v, [](const Vec2 &) { return Vec2(1.0, 0.0); });
  std::mt19937 rng(3);
  std::normal_distribution<double> n01;
  Vec u = Vec::Zero(v.dof_count());
  for (int d : v.free_dofs())
    u[d] = n01(rng);
  const SpMat c = assemble_convection(v, GeoMap::stretch(1.7), w);
  EXPECT_LT(std::abs(u.dot(c * u)), 1e-13 * u.squaredNorm());
}

TEST(Assembly, ConvectionLinearInTransport)
{
  auto mesh = square(3);
  const FeSpace v(mesh, SpaceKind::VectorP2);
  std::mt19937 rng(5);
  std::normal_distribution<double> n01;
  Vec w1(v.dof_count()), w2(v.dof_count());
  for (int i = 0; i < v.dof_count(); ++i)
  {
    w1[i] = n01(rng);
    w2[i] = n01(rng);
  }
  const GeoMap g = GeoMap::stretch(1.3);
  const Mat lhs = Mat(assemble_convection(v, g, 0.7 * w1 - 1.9 * w2));
  const Mat rhs = 0.7 * Mat(assemble_convection(v, g, w1)) - 1.9 * Mat(assemble_convection(v, g, w2));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13 * rhs.cwiseAbs().maxCoeff());
}

class OracleForms : public ::testing::TestWithParam<const char *>
{
};

TEST_P(OracleForms, MatchHigherOrderOracle)
{
  const FePair pair = fe_pair_from_string(GetParam());
  auto mesh = square(4);
  const FeSpace v(mesh, pair.velocity), p(mesh, pair.pressure);
  const Physical phys{0.4, 1.6};
  const oracle::Assembler o(v, p, phys.nu, phys.length);
  EXPECT_LT(oracle::rel_diff(Mat(assemble_mass(v, phys)), o.mass()), 1e-13);
  EXPECT_LT(oracle::rel_diff(Mat(assemble_diffusion(v, phys)), o.diffusion()), 1e-13);
  EXPECT_LT(oracle::rel_diff(Mat(assemble_divergence(v, p, phys)), o.divergence()), 1e-13);
  std::mt19937 rng(11);
  std::normal_distribution<double> n01;
  Vec w(v.dof_count());
  for (int i = 0; i < w.size(); ++i)
    w[i] = n01(rng);
  EXPECT_LT(oracle::rel_diff(Mat(assemble_convection(v, phys, w)), o.convection(w)), 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Pairs, OracleForms, ::testing::Values("P1P1", "P2P1", "P2P2", "P1P0"));

TEST(Affine, ExactForRandomParameters)
{
  auto mesh = square(4);
  const FeSpace v(mesh, SpaceKind::VectorP2), p(mesh, SpaceKind::ScalarP1);
  const AffineMatrix am = affine_mass(v), aa = affine_diffusion(v), ab = affine_divergence(v, p);
  EXPECT_EQ(am.size(), 1);
  EXPECT_EQ(aa.size(), 2);
  EXPECT_EQ(ab.size(), 2);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u1(0.25, 0.75), u2(1.0, 2.0);
  for (int i = 0; i < 20; ++i)
  {
    const Physical phys{u1(rng), u2(rng)};
    EXPECT_LT(oracle::rel_diff(Mat(am.assemble(phys)), Mat(assemble_mass(v, phys))), 1e-12);
    EXPECT_LT(oracle::rel_diff(Mat(aa.assemble(phys)), Mat(assemble_diffusion(v, phys))), 1e-12);
    EXPECT_LT(oracle::rel_diff(Mat(ab.assemble(phys)), Mat(assemble_divergence(v, p, phys))), 1e-12);
  }
}

TEST(Affine, DiffusionThetas)
{
  const FeSpace v(square(2), SpaceKind::VectorP1);
  const AffineMatrix a = affine_diffusion(v);
  std::vector<double> at_one, at_half_two;
  for (const auto &t : a.terms)
  {
    at_one.push_back(t.theta(Physical{1.0, 1.0}));
    at_half_two.push_back(t.theta(Physical{0.5, 2.0}));
  }
  std::sort(at_one.begin(), at_one.end());
  std::sort(at_half_two.begin(), at_half_two.end());
  EXPECT_DOUBLE_EQ(at_one[0], 1.0);
  EXPECT_DOUBLE_EQ(at_one[1], 1.0);
  EXPECT_DOUBLE_EQ(at_half_two[0], 0.25);
  EXPECT_DOUBLE_EQ(at_half_two[1], 1.0);
}

TEST(Affine, GeneralMapUnsupported)
{
  const FeSpace v(square(2), SpaceKind::VectorP1);
  EXPECT_THROW(affine_diffusion(v, MapFamily::General), UnsupportedError);
}

TEST(Affine, ThetaRoundTrip)
{
  const Theta t{-0.5, 1, -2};
  const Theta r = Theta::parse(t.str());
  EXPECT_EQ(r.coeff, t.coeff);
  EXPECT_TRUE(r.same_powers(t));
  EXPECT_DOUBLE_EQ(t(Physical{0.5, 2.0}), -0.5 * 0.5 / 4.0);
}

TEST(Affine, LiftingVectors)
{
  auto mesh = square(3);
  const FeSpace v(mesh, SpaceKind::VectorP2), p(mesh, SpaceKind::ScalarP1);
  const LiftingFunction l = build_lifting(v);
  const Physical phys{0.6, 1.3};
  const Vec f = affine_lifting_momentum(v, l).assemble(phys);
  const Vec g = affine_lifting_continuity(v, p, l).assemble(phys);
  EXPECT_LT((f + assemble_diffusion(v, phys) * l.coefficients).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((g + assemble_divergence(v, p, phys) * l.coefficients).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Lifting, TraceValues)
{
  auto mesh = square(4);
  const FeSpace v(mesh, SpaceKind::VectorP2);
  const LiftingFunction l = build_lifting(v);
  for (int d = 0; d < v.scalar_dof_count(); ++d)
  {
    const Vec2 val(l.coefficients[v.component_dof(0, d)], l.coefficients[v.component_dof(1, d)]);
    const Vec2 &x = v.scalar_dof_point(d);
    if (v.scalar_dof_tag(d) == BoundaryTag::Lid)
    {
      EXPECT_EQ(val, Vec2(1.0, 0.0));
      EXPECT_EQ(x[1], 1.0);
    }
    else
      EXPECT_EQ(val, Vec2(0.0, 0.0));
    if (x[1] == 1.0 && (x[0] == 0.0 || x[0] == 1.0))
      EXPECT_EQ(val, Vec2(0.0, 0.0));
  }
  // Evaluation at a lid vertex and at a wall vertex.
  for (int t = 0; t < mesh->n_triangles(); ++t)
    for (int vtx : mesh->triangles()[t])
    {
      const Vec2 &x = mesh->vertices()[vtx];
      const Vec2 val = evaluate_vector(v, l.coefficients, t, x);
      if (mesh->vertex_tag(vtx) == BoundaryTag::Lid)
        EXPECT_LT((val - Vec2(1.0, 0.0)).norm(), 1e-14);
      else if (mesh->vertex_tag(vtx) == BoundaryTag::Wall)
        EXPECT_LT(val.norm(), 1e-14);
    }
}

TEST(Assembly, PressureMeanWeights)
{
  for (SpaceKind k : {SpaceKind::ScalarP0, SpaceKind::ScalarP1, SpaceKind::ScalarP2})
  {
    const FeSpace p(square(3), k);
    EXPECT_NEAR(pressure_mean_weights(p).sum(), 1.0, 1e-14);
    const Vec one = Vec::Ones(p.dof_count());
    EXPECT_NEAR(one.dot(assemble_pressure_mass(p) * one), 1.0, 1e-14);
  }
  const FeSpace p2(square(3), SpaceKind::ScalarP2);
  const Vec x = interpolate_scalar(p2, [](const Vec2 &x) { return x[0]; });
  EXPECT_NEAR(pressure_mean_weights(p2).dot(x), 0.5, 1e-14);
}

TEST(Assembly, MatrixMarketHeader)
{
  SpMat m(2, 2);
  m.insert(0, 1) = 2.5;
  std::ostringstream os;
  write_matrix_market(os, m);
  EXPECT_EQ(os.str().rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  EXPECT_NE(os.str().find("2 2 1"), std::string::npos);
}
