#pragma once

#include "rbstab/types.hpp"

#include <vector>

namespace rbstab
{

struct QuadRule
{
  std::vector<Vec2> points; // reference triangle (0,0),(1,0),(0,1)
  std::vector<double> weights; // sum to 1/2
  int degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0, 1].
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights);

/// Collapsed (Duffy) Gauss rule on the reference triangle exact for total degree <= degree.
QuadRule triangle_rule(int degree);

/// Gauss rule on [0, 1], exact for degree <= degree.
QuadRule line_rule(int degree);

} // namespace rbstab
