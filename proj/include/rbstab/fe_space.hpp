#pragma once

#include "rbstab/mesh.hpp"
#include "rbstab/quadrature.hpp"

#include <memory>
#include <string>
#include <vector>

namespace rbstab
{

enum class SpaceKind
{
  ScalarP0,
  ScalarP1,
  ScalarP2,
  VectorP1,
  VectorP2
};

std::string to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string &name);

/// Lagrange space on a Mesh.
///
/// Scalar dofs: P0 one per triangle, P1 one per vertex, P2 vertices first then
/// edge midpoints. Vector spaces are blocked by component: [u_x dofs, u_y dofs].
class FeSpace
{
public:
  FeSpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  const Mesh &mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  int degree() const { return degree_; }
  int components() const { return components_; }
  bool is_vector() const { return components_ == 2; }
  int scalar_dof_count() const { return n_scalar_; }
  int dof_count() const { return components_ * n_scalar_; }
  int local_scalar_count() const { return n_local_; }

  /// Scalar global dofs of triangle t in local shape-function order.
  void local_dofs(int t, std::vector<int> &dofs) const;
  int component_dof(int component, int scalar_dof) const { return component * n_scalar_ + scalar_dof; }

  BoundaryTag scalar_dof_tag(int scalar_dof) const { return tags_[scalar_dof]; }
  const Vec2 &scalar_dof_point(int scalar_dof) const { return points_[scalar_dof]; }

  /// All boundary dofs of all components (sorted).
  const std::vector<int> &dirichlet_dofs() const { return dirichlet_; }
  /// Complement of dirichlet_dofs().
  const std::vector<int> &free_dofs() const { return free_; }

private:
  std::shared_ptr<const Mesh> mesh_;
  SpaceKind kind_;
  int degree_ = 1;
  int components_ = 1;
  int n_scalar_ = 0;
  int n_local_ = 0;
  std::vector<BoundaryTag> tags_;
  std::vector<Vec2> points_;
  std::vector<int> dirichlet_;
  std::vector<int> free_;
};

/// Scalar shape functions of one triangle at the points of a rule.
///
/// Derivatives are with respect to reference-square coordinates. Second
/// derivatives are constant on a triangle for P2 and zero for P0/P1.
struct ElementShape
{
  int n = 0;
  Mat vals;  // nq x n
  Mat dx;    // nq x n
  Mat dy;    // nq x n
  Vec dxx, dxy, dyy; // n
  std::vector<Vec2> points; // quadrature points in square coordinates
  std::vector<double> jxw;  // weight times |det| of the triangle map
  double h_K = 0.0;
};

void evaluate_shape(const FeSpace &space, int t, const QuadRule &rule, ElementShape &shape);

/// Scalar shape values and gradients at an arbitrary point of triangle t.
void evaluate_shape_at(const FeSpace &space, int t, const Vec2 &x, Vec &vals, Vec &dx, Vec &dy);

} // namespace rbstab
