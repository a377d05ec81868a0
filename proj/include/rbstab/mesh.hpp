#pragma once

#include "rbstab/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace rbstab
{

enum class BoundaryTag
{
  None,
  Lid,
  Wall
};

struct Edge
{
  std::array<int, 2> vertices;
  // Incident triangles; second entry is -1 on the boundary.
  std::array<int, 2> triangles{-1, -1};
  BoundaryTag tag = BoundaryTag::None;

  bool on_boundary() const { return triangles[1] < 0; }
};

/// Conforming triangulation of the reference square (0,1)^2.
///
/// Triangles are counterclockwise. Local edge i of a triangle joins local
/// vertices i and (i+1)%3. Boundary edges on y = 1 are tagged Lid, every other
/// boundary edge is Wall. A boundary vertex is Wall as soon as one of its
/// boundary edges is Wall, so the two top corners belong to the wall.
class Mesh
{
public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec2> &vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>> &triangles() const { return triangles_; }
  const std::vector<Edge> &edges() const { return edges_; }
  const std::array<int, 3> &triangle_edges(int t) const { return triangle_edges_[t]; }
  BoundaryTag vertex_tag(int v) const { return vertex_tags_[v]; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int n_boundary_edges() const;

  double signed_area(int t) const;
  /// Circumscribed diameter of triangle t.
  double h_K(int t) const { return h_K_[t]; }
  /// Max of h_K over the mesh.
  double h() const { return h_; }
  double edge_length(int e) const;

  /// Plain-text dump: vertices, triangles, tagged boundary edges.
  void write(std::ostream &os) const;

private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<BoundaryTag> vertex_tags_;
  std::vector<double> h_K_;
  double h_ = 0.0;
};

/// nx*ny cells on the unit square, each cut along the diagonal from its
/// lower-left to its upper-right corner.
Mesh build_structured_mesh(int nx, int ny);

/// Affine map from the reference square to the current domain, x_o = J x.
class GeoMap
{
public:
  explicit GeoMap(const Mat2 &jacobian);

  /// T(x, y) = (length * x, y).
  static GeoMap stretch(double length);

  const Mat2 &jacobian() const { return jacobian_; }
  double det() const { return jacobian_.determinant(); }
  /// Diagonal jacobian with unit vertical scale: the only map with a known
  /// affine parameter decomposition.
  bool is_axis_stretch() const;

private:
  Mat2 jacobian_;
};

struct ParamTensors
{
  Mat2 kappa;
  Mat2 chi;
  double pi = 1.0;
};

/// kappa = nu J^-1 J^-T |J|, chi = J^-1 |J|, pi = |J|.
ParamTensors param_tensors(double nu, const GeoMap &map);
ParamTensors param_tensors(double nu, double length);

} // namespace rbstab
