#include "rbstab/fe_space.hpp"

#include <algorithm>
#include <cmath>

namespace rbstab
{

std::string to_string(SpaceKind kind)
{
  switch (kind)
  {
    case SpaceKind::ScalarP0:
      return "ScalarP0";
    case SpaceKind::ScalarP1:
      return "ScalarP1";
    case SpaceKind::ScalarP2:
      return "ScalarP2";
    case SpaceKind::VectorP1:
      return "VectorP1";
    case SpaceKind::VectorP2:
      return "VectorP2";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string &name)
{
  for (SpaceKind k : {SpaceKind::ScalarP0, SpaceKind::ScalarP1, SpaceKind::ScalarP2,
                      SpaceKind::VectorP1, SpaceKind::VectorP2})
    if (to_string(k) == name)
      return k;
  throw UsageError("unknown space kind: " + name);
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind) : mesh_(std::move(mesh)), kind_(kind)
{
  const Mesh &m = *mesh_;
  switch (kind)
  {
    case SpaceKind::ScalarP0:
      degree_ = 0;
      break;
    case SpaceKind::ScalarP1:
    case SpaceKind::VectorP1:
      degree_ = 1;
      break;
    case SpaceKind::ScalarP2:
    case SpaceKind::VectorP2:
      degree_ = 2;
      break;
  }
  components_ = (kind == SpaceKind::VectorP1 || kind == SpaceKind::VectorP2) ? 2 : 1;

  if (degree_ == 0)
  {
    n_scalar_ = m.n_triangles();
    n_local_ = 1;
    tags_.assign(n_scalar_, BoundaryTag::None);
    for (int t = 0; t < m.n_triangles(); ++t)
    {
      const auto &tri = m.triangles()[t];
      points_.push_back((m.vertices()[tri[0]] + m.vertices()[tri[1]] + m.vertices()[tri[2]]) / 3.0);
    }
  }
  else
  {
    n_scalar_ = m.n_vertices() + (degree_ == 2 ? m.n_edges() : 0);
    n_local_ = degree_ == 2 ? 6 : 3;
    tags_.reserve(n_scalar_);
    for (int v = 0; v < m.n_vertices(); ++v)
    {
      tags_.push_back(m.vertex_tag(v));
      points_.push_back(m.vertices()[v]);
    }
    if (degree_ == 2)
      for (const Edge &e : m.edges())
      {
        tags_.push_back(e.tag);
        points_.push_back(0.5 * (m.vertices()[e.vertices[0]] + m.vertices()[e.vertices[1]]));
      }
  }

  for (int c = 0; c < components_; ++c)
    for (int i = 0; i < n_scalar_; ++i)
    {
      if (tags_[i] != BoundaryTag::None)
        dirichlet_.push_back(component_dof(c, i));
      else
        free_.push_back(component_dof(c, i));
    }
}

void FeSpace::local_dofs(int t, std::vector<int> &dofs) const
{
  dofs.resize(n_local_);
  if (degree_ == 0)
  {
    dofs[0] = t;
    return;
  }
  const auto &tri = mesh_->triangles()[t];
  for (int i = 0; i < 3; ++i)
    dofs[i] = tri[i];
  if (degree_ == 2)
  {
    const auto &te = mesh_->triangle_edges(t);
    for (int i = 0; i < 3; ++i)
      dofs[3 + i] = mesh_->n_vertices() + te[i];
  }
}

namespace
{

struct Barycentric
{
  std::array<Vec2, 3> grad; // constant gradients of lambda_i
  Vec2 origin;
  Mat2 jac; // square coordinates = origin + jac * reference
  double det = 0.0;
};

Barycentric barycentric(const Mesh &mesh, int t)
{
  const auto &tri = mesh.triangles()[t];
  const Vec2 &v0 = mesh.vertices()[tri[0]];
  Barycentric b;
  b.origin = v0;
  b.jac.col(0) = mesh.vertices()[tri[1]] - v0;
  b.jac.col(1) = mesh.vertices()[tri[2]] - v0;
  b.det = b.jac.determinant();
  const Mat2 jit = b.jac.inverse().transpose();
  b.grad[1] = jit.col(0);
  b.grad[2] = jit.col(1);
  b.grad[0] = -b.grad[1] - b.grad[2];
  return b;
}

// Values and gradients of the local basis at barycentric coordinates lam.
void basis_at(int degree, const Barycentric &b, const std::array<double, 3> &lam, double *val, Vec2 *grad)
{
  if (degree == 0)
  {
    val[0] = 1.0;
    grad[0].setZero();
    return;
  }
  if (degree == 1)
  {
    for (int i = 0; i < 3; ++i)
    {
      val[i] = lam[i];
      grad[i] = b.grad[i];
    }
    return;
  }
  for (int i = 0; i < 3; ++i)
  {
    val[i] = lam[i] * (2.0 * lam[i] - 1.0);
    grad[i] = (4.0 * lam[i] - 1.0) * b.grad[i];
  }
  for (int e = 0; e < 3; ++e)
  {
    const int i = e, j = (e + 1) % 3;
    val[3 + e] = 4.0 * lam[i] * lam[j];
    grad[3 + e] = 4.0 * (lam[j] * b.grad[i] + lam[i] * b.grad[j]);
  }
}

} // namespace

void evaluate_shape(const FeSpace &space, int t, const QuadRule &rule, ElementShape &shape)
{
  const int n = space.local_scalar_count();
  const int nq = rule.size();
  const Barycentric b = barycentric(space.mesh(), t);

  shape.n = n;
  shape.vals.resize(nq, n);
  shape.dx.resize(nq, n);
  shape.dy.resize(nq, n);
  shape.dxx = Vec::Zero(n);
  shape.dxy = Vec::Zero(n);
  shape.dyy = Vec::Zero(n);
  shape.points.resize(nq);
  shape.jxw.resize(nq);
  shape.h_K = space.mesh().h_K(t);

  double val[6];
  Vec2 grad[6];
  for (int q = 0; q < nq; ++q)
  {
    const Vec2 &xi = rule.points[q];
    const std::array<double, 3> lam{1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
    basis_at(space.degree(), b, lam, val, grad);
    for (int i = 0; i < n; ++i)
    {
      shape.vals(q, i) = val[i];
      shape.dx(q, i) = grad[i].x();
      shape.dy(q, i) = grad[i].y();
    }
    shape.points[q] = b.origin + b.jac * xi;
    shape.jxw[q] = rule.weights[q] * std::abs(b.det);
  }

  if (space.degree() == 2)
  {
    auto set_hessian = [&shape](int i, const Mat2 &h) {
      shape.dxx[i] = h(0, 0);
      shape.dxy[i] = h(0, 1);
      shape.dyy[i] = h(1, 1);
    };
    for (int i = 0; i < 3; ++i)
      set_hessian(i, 4.0 * b.grad[i] * b.grad[i].transpose());
    for (int e = 0; e < 3; ++e)
    {
      const int i = e, j = (e + 1) % 3;
      set_hessian(3 + e, 4.0 * (b.grad[i] * b.grad[j].transpose() + b.grad[j] * b.grad[i].transpose()));
    }
  }
}

void evaluate_shape_at(const FeSpace &space, int t, const Vec2 &x, Vec &vals, Vec &dx, Vec &dy)
{
  const Barycentric b = barycentric(space.mesh(), t);
  const Vec2 xi = b.jac.inverse() * (x - b.origin);
  const std::array<double, 3> lam{1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  const int n = space.local_scalar_count();
  double val[6];
  Vec2 grad[6];
  basis_at(space.degree(), b, lam, val, grad);
  vals.resize(n);
  dx.resize(n);
  dy.resize(n);
  for (int i = 0; i < n; ++i)
  {
    vals[i] = val[i];
    dx[i] = grad[i].x();
    dy[i] = grad[i].y();
  }
}

} // namespace rbstab
