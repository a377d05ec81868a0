#pragma once

#include "rbstab/fe_space.hpp"

#include <cmath>
#include <vector>

namespace rbstab::detail
{

/// Rule exact for polynomials of the given total degree (cached per degree).
const QuadRule &rule_for_degree(int degree);

/// Global dofs of the element, all components: [c0 scalar dofs, c1 scalar dofs].
inline void expand_components(const FeSpace &space, const std::vector<int> &scalar, std::vector<int> &out)
{
  const int n = static_cast<int>(scalar.size());
  out.resize(n * space.components());
  for (int c = 0; c < space.components(); ++c)
    for (int i = 0; i < n; ++i)
      out[c * n + i] = space.component_dof(c, scalar[i]);
}

inline void scatter(std::vector<Triplet> &trip, const std::vector<int> &rows, const std::vector<int> &cols,
                    const Mat &local)
{
  for (int j = 0; j < local.cols(); ++j)
    for (int i = 0; i < local.rows(); ++i)
      if (local(i, j) != 0.0)
        trip.emplace_back(rows[i], cols[j], local(i, j));
}

inline SpMat from_triplets(int rows, int cols, const std::vector<Triplet> &trip)
{
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune(0.0);
  return m;
}

/// kron(I_comps, s) in the blocked component layout.
SpMat block_diagonal(const SpMat &s, int comps);

/// Values at quadrature points of a field given by element coefficients.
inline Vec at_points(const Mat &vals, const Vec &coef) { return vals * coef; }

/// Element coefficients of a vector field: nq-independent, n x 2.
inline Mat local_vector_coefficients(const FeSpace &space, const Vec &global, const std::vector<int> &scalar)
{
  const int n = static_cast<int>(scalar.size());
  Mat out(n, 2);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n; ++i)
      out(i, c) = global[space.component_dof(c, scalar[i])];
  return out;
}

inline Vec local_scalar_coefficients(const Vec &global, const std::vector<int> &scalar)
{
  Vec out(scalar.size());
  for (std::size_t i = 0; i < scalar.size(); ++i)
    out[i] = global[scalar[i]];
  return out;
}

/// Shape evaluation for a pair of spaces on every triangle.
template <class F>
void for_each_triangle(const FeSpace &a, const FeSpace &b, const QuadRule &rule, F &&f)
{
  ElementShape sa, sb;
  std::vector<int> da, db;
  const int nt = a.mesh().n_triangles();
  for (int t = 0; t < nt; ++t)
  {
    evaluate_shape(a, t, rule, sa);
    a.local_dofs(t, da);
    if (&a == &b)
      f(t, sa, da, sa, da);
    else
    {
      evaluate_shape(b, t, rule, sb);
      b.local_dofs(t, db);
      f(t, sa, da, sb, db);
    }
  }
}

} // namespace rbstab::detail

namespace rbstab::detail
{

/// Shape data pushed to the physical domain x_o = J x.
struct PhysicalShape
{
  Mat gx, gy; // physical gradients, nq x n
  Vec lap;    // physical Laplacian, n (constant per element)
  Vec meas;   // quadrature weight times physical area element, nq
};

inline void physical_shape(const ElementShape &s, const Mat2 &jinv, double det, PhysicalShape &out)
{
  out.gx = jinv(0, 0) * s.dx + jinv(1, 0) * s.dy;
  out.gy = jinv(0, 1) * s.dx + jinv(1, 1) * s.dy;
  const Mat2 g = jinv * jinv.transpose();
  out.lap = g(0, 0) * s.dxx + 2.0 * g(0, 1) * s.dxy + g(1, 1) * s.dyy;
  out.meas.resize(s.jxw.size());
  for (std::size_t q = 0; q < s.jxw.size(); ++q)
    out.meas[q] = s.jxw[q] * std::abs(det);
}

} // namespace rbstab::detail
