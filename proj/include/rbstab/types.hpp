#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace rbstab
{

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Wrong call shape: incompatible spaces, mismatched lengths, missing inputs.
class UsageError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

// Parameter outside its admissible set (nonpositive viscosity, length, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

// Requested feature is outside what the discretization supports.
class UnsupportedError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

// Linear or nonlinear solve failed. step is the time index (-1 if not time dependent).
class SolverError : public std::runtime_error
{
public:
  SolverError(const std::string &what, int step = -1, double residual = 0.0)
    : std::runtime_error(what), step_(step), residual_(residual)
  {}

  int step() const { return step_; }
  double residual() const { return residual_; }

private:
  int step_;
  double residual_;
};

// Physical coefficients seen by the forms: viscosity and horizontal domain length.
struct Physical
{
  double nu = 1.0;
  double length = 1.0;
};

} // namespace rbstab
