#include "rbstab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace rbstab
{

namespace
{

const char *tag_name(BoundaryTag tag)
{
  switch (tag)
  {
    case BoundaryTag::Lid:
      return "Lid";
    case BoundaryTag::Wall:
      return "Wall";
    default:
      return "None";
  }
}

double circumdiameter(const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
  const double la = (b - c).norm();
  const double lb = (c - a).norm();
  const double lc = (a - b).norm();
  const Vec2 e1 = b - a;
  const Vec2 e2 = c - a;
  const double area2 = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  // 2R = abc / (2 area)
  return la * lb * lc / area2;
}

} // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
  : vertices_(std::move(vertices)), triangles_(std::move(triangles))
{
  const int nv = n_vertices();
  triangle_edges_.resize(triangles_.size());
  std::map<std::pair<int, int>, int> edge_index;
  for (int t = 0; t < n_triangles(); ++t)
  {
    for (int v : triangles_[t])
      if (v < 0 || v >= nv)
        throw UsageError("Mesh: triangle references a missing vertex");
    if (signed_area(t) <= 0.0)
      throw UsageError("Mesh: triangle " + std::to_string(t) + " is not counterclockwise");
    for (int i = 0; i < 3; ++i)
    {
      int a = triangles_[t][i];
      int b = triangles_[t][(i + 1) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      if (it == edge_index.end())
      {
        Edge e;
        e.vertices = {key.first, key.second};
        e.triangles[0] = t;
        edge_index.emplace(key, static_cast<int>(edges_.size()));
        triangle_edges_[t][i] = static_cast<int>(edges_.size());
        edges_.push_back(e);
      }
      else
      {
        Edge &e = edges_[it->second];
        if (e.triangles[1] >= 0)
          throw UsageError("Mesh: edge shared by more than two triangles");
        e.triangles[1] = t;
        triangle_edges_[t][i] = it->second;
      }
    }
  }

  vertex_tags_.assign(nv, BoundaryTag::None);
  for (Edge &e : edges_)
  {
    if (!e.on_boundary())
      continue;
    const bool top = std::abs(vertices_[e.vertices[0]].y() - 1.0) < 1e-12 &&
                     std::abs(vertices_[e.vertices[1]].y() - 1.0) < 1e-12;
    e.tag = top ? BoundaryTag::Lid : BoundaryTag::Wall;
    for (int v : e.vertices)
    {
      if (e.tag == BoundaryTag::Wall || vertex_tags_[v] == BoundaryTag::None)
        vertex_tags_[v] = e.tag;
    }
  }

  h_K_.resize(triangles_.size());
  for (int t = 0; t < n_triangles(); ++t)
  {
    const auto &tri = triangles_[t];
    h_K_[t] = circumdiameter(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    h_ = std::max(h_, h_K_[t]);
  }
}

int Mesh::n_boundary_edges() const
{
  return static_cast<int>(
    std::count_if(edges_.begin(), edges_.end(), [](const Edge &e) { return e.on_boundary(); }));
}

double Mesh::signed_area(int t) const
{
  const auto &tri = triangles_[t];
  const Vec2 e1 = vertices_[tri[1]] - vertices_[tri[0]];
  const Vec2 e2 = vertices_[tri[2]] - vertices_[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh::edge_length(int e) const
{
  return (vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]]).norm();
}

void Mesh::write(std::ostream &os) const
{
  os << "vertices " << n_vertices() << '\n';
  for (const Vec2 &v : vertices_)
    os << v.x() << ' ' << v.y() << '\n';
  os << "triangles " << n_triangles() << '\n';
  for (const auto &t : triangles_)
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "boundary_edges " << n_boundary_edges() << '\n';
  for (const Edge &e : edges_)
    if (e.on_boundary())
      os << e.vertices[0] << ' ' << e.vertices[1] << ' ' << tag_name(e.tag) << '\n';
}

Mesh build_structured_mesh(int nx, int ny)
{
  if (nx < 1 || ny < 1)
    throw UsageError("build_structured_mesh: nx and ny must be positive");
  std::vector<Vec2> vertices;
  vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(static_cast<double>(i) / nx, static_cast<double>(j) / ny);

  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
    {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh(std::move(vertices), std::move(triangles));
}

GeoMap::GeoMap(const Mat2 &jacobian) : jacobian_(jacobian)
{
  if (!(jacobian_.determinant() > 0.0))
    throw DomainError("GeoMap: jacobian must have positive determinant");
}

GeoMap GeoMap::stretch(double length)
{
  if (!(length > 0.0))
    throw DomainError("GeoMap: domain length must be positive");
  Mat2 j;
  j << length, 0.0, 0.0, 1.0;
  return GeoMap(j);
}

bool GeoMap::is_axis_stretch() const
{
  return jacobian_(0, 1) == 0.0 && jacobian_(1, 0) == 0.0 && jacobian_(1, 1) == 1.0;
}

ParamTensors param_tensors(double nu, const GeoMap &map)
{
  if (!(nu > 0.0))
    throw DomainError("param_tensors: viscosity must be positive");
  const Mat2 jinv = map.jacobian().inverse();
  const double det = map.det();
  ParamTensors out;
  out.kappa = nu * jinv * jinv.transpose() * det;
  out.chi = jinv * det;
  out.pi = det;
  return out;
}

ParamTensors param_tensors(double nu, double length)
{
  return param_tensors(nu, GeoMap::stretch(length));
}

} // namespace rbstab
