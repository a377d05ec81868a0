#include "rbstab/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace rbstab
{

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
  if (n < 1)
    throw UsageError("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x, double &dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k)
    {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < n; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    legendre(x, dp);
    // map from [-1, 1] to [0, 1]
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadRule triangle_rule(int degree)
{
  if (degree < 0)
    throw UsageError("triangle_rule: negative degree");
  // The collapse adds one power of (1 - t) in the t direction.
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRule rule;
  rule.degree = degree;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
    {
      const double s = x[i];
      const double t = x[j];
      rule.points.emplace_back(s * (1.0 - t), t);
      rule.weights.push_back(w[i] * w[j] * (1.0 - t));
    }
  return rule;
}

QuadRule line_rule(int degree)
{
  const int n = degree / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i)
  {
    rule.points.emplace_back(x[i], 0.0);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

} // namespace rbstab
