#include "rbstab/mesh.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

using namespace rbstab;

TEST(Mesh, SmallestMeshCounts)
{
  const Mesh m = build_structured_mesh(1, 1);
  EXPECT_EQ(m.n_vertices(), 4);
  EXPECT_EQ(m.n_triangles(), 2);
  EXPECT_EQ(m.n_boundary_edges(), 4);
  EXPECT_EQ(m.n_edges() - m.n_boundary_edges(), 1);
}

TEST(Mesh, TwoByTwoCircumdiameter)
{
  const Mesh m = build_structured_mesh(2, 2);
  EXPECT_EQ(m.n_vertices(), 9);
  EXPECT_EQ(m.n_triangles(), 8);
  for (int t = 0; t < m.n_triangles(); ++t)
    EXPECT_NEAR(m.h_K(t), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(m.h(), std::sqrt(2.0) / 2.0, 1e-15);
}

TEST(Mesh, SixteenCounts)
{
  const Mesh m = build_structured_mesh(16, 16);
  EXPECT_EQ(m.n_vertices(), 289);
  EXPECT_EQ(m.n_triangles(), 512);
}

TEST(Mesh, TopologyInvariants)
{
  for (auto [nx, ny] : {std::pair{1, 1}, {3, 2}, {5, 7}, {16, 16}})
  {
    const Mesh m = build_structured_mesh(nx, ny);
    EXPECT_EQ(m.n_vertices() - m.n_edges() + m.n_triangles(), 1);
    double h = 0.0;
    for (int t = 0; t < m.n_triangles(); ++t)
    {
      EXPECT_GT(m.signed_area(t), 0.0);
      h = std::max(h, m.h_K(t));
    }
    EXPECT_EQ(h, m.h());
    double lid_length = 0.0;
    for (int e = 0; e < m.n_edges(); ++e)
    {
      const Edge &edge = m.edges()[e];
      if (edge.on_boundary())
      {
        EXPECT_GE(edge.triangles[0], 0);
        const Vec2 &a = m.vertices()[edge.vertices[0]], &b = m.vertices()[edge.vertices[1]];
        const bool top = a[1] == 1.0 && b[1] == 1.0;
        EXPECT_EQ(edge.tag == BoundaryTag::Lid, top);
        EXPECT_NE(edge.tag, BoundaryTag::None);
        if (top)
          lid_length += m.edge_length(e);
      }
      else
      {
        EXPECT_GE(edge.triangles[0], 0);
        EXPECT_GE(edge.triangles[1], 0);
        EXPECT_EQ(edge.tag, BoundaryTag::None);
      }
    }
    EXPECT_NEAR(lid_length, 1.0, 1e-14);
  }
}

TEST(Mesh, TopCornersBelongToWall)
{
  const Mesh m = build_structured_mesh(4, 4);
  for (int v = 0; v < m.n_vertices(); ++v)
  {
    const Vec2 &x = m.vertices()[v];
    if (x[1] == 1.0 && (x[0] == 0.0 || x[0] == 1.0))
      EXPECT_EQ(m.vertex_tag(v), BoundaryTag::Wall);
    else if (x[1] == 1.0)
      EXPECT_EQ(m.vertex_tag(v), BoundaryTag::Lid);
  }
}

TEST(Mesh, WritesRecords)
{
  const Mesh m = build_structured_mesh(1, 1);
  std::ostringstream os;
  m.write(os);
  EXPECT_NE(os.str().find("Lid"), std::string::npos);
}

TEST(GeoMap, StretchJacobian)
{
  const GeoMap g = GeoMap::stretch(1.7);
  EXPECT_DOUBLE_EQ(g.det(), 1.7);
  EXPECT_TRUE(g.is_axis_stretch());
  EXPECT_DOUBLE_EQ(g.jacobian()(0, 0), 1.7);
  EXPECT_DOUBLE_EQ(g.jacobian()(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.jacobian()(0, 1), 0.0);
}

TEST(ParamTensors, IdentityMap)
{
  const ParamTensors p = param_tensors(1.0, 1.0);
  EXPECT_TRUE(p.kappa.isApprox(Mat2::Identity(), 1e-15));
  EXPECT_TRUE(p.chi.isApprox(Mat2::Identity(), 1e-15));
  EXPECT_DOUBLE_EQ(p.pi, 1.0);
}

TEST(ParamTensors, LengthTwo)
{
  const ParamTensors p = param_tensors(1.0, 2.0);
  EXPECT_NEAR(p.kappa(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p.kappa(1, 1), 2.0, 1e-15);
  EXPECT_NEAR(p.kappa(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(p.chi(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p.chi(1, 1), 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.pi, 2.0);
}

TEST(ParamTensors, QuarterViscosity)
{
  const ParamTensors p = param_tensors(0.25, 1.5);
  EXPECT_NEAR(p.kappa(0, 0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p.kappa(1, 1), 0.375, 1e-15);
  EXPECT_NEAR(p.chi(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p.chi(1, 1), 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(p.pi, 1.5);
}

TEST(ParamTensors, RejectsNonpositive)
{
  EXPECT_THROW(param_tensors(0.0, 1.0), DomainError);
  EXPECT_THROW(param_tensors(1.0, -1.0), DomainError);
}

TEST(ParamTensors, SpdAndAffineOverBox)
{
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u1(0.25, 0.75), u2(1.0, 2.0);
  for (int i = 0; i < 20; ++i)
  {
    const double nu = u1(rng), len = u2(rng);
    const ParamTensors p = param_tensors(nu, len);
    Eigen::SelfAdjointEigenSolver<Mat2> eig(p.kappa);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(p.pi, 0.0);
    EXPECT_NEAR(p.kappa(0, 0), nu / len, 1e-14 * nu / len);
    EXPECT_NEAR(p.kappa(1, 1), nu * len, 1e-14 * nu * len);
    EXPECT_NEAR(p.chi(1, 1), len, 1e-14 * len);
    EXPECT_NEAR(p.chi(0, 0), 1.0, 1e-14);
  }
}
