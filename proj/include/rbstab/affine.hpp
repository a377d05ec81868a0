#pragma once

#include "rbstab/types.hpp"

#include <string>
#include <vector>

namespace rbstab
{

/// Parameter coefficient coeff * nu^nu_pow * length^length_pow.
///
/// Every coefficient produced by the axis-stretch map is a monomial of this
/// form, so it is also the on-disk representation of a theta function.
struct Theta
{
  double coeff = 1.0;
  int nu_pow = 0;
  int length_pow = 0;

  double operator()(const Physical &phys) const;
  bool same_powers(const Theta &other) const
  {
    return nu_pow == other.nu_pow && length_pow == other.length_pow;
  }
  std::string str() const;
  static Theta parse(const std::string &text);
};

template <class Term>
struct AffineTerm
{
  Theta theta;
  Term term;
};

/// sum_q theta_q(mu) * term_q over parameter-independent sparse matrices.
struct AffineMatrix
{
  std::vector<AffineTerm<SpMat>> terms;
  int rows = 0;
  int cols = 0;

  void add(const Theta &theta, SpMat term);
  SpMat assemble(const Physical &phys) const;
  int size() const { return static_cast<int>(terms.size()); }
};

struct AffineVector
{
  std::vector<AffineTerm<Vec>> terms;
  int rows = 0;

  void add(const Theta &theta, Vec term);
  Vec assemble(const Physical &phys) const;
  int size() const { return static_cast<int>(terms.size()); }
};

/// Dense reduced counterpart of AffineMatrix.
struct ReducedAffineMatrix
{
  std::vector<AffineTerm<Mat>> terms;
  int rows = 0;
  int cols = 0;

  void add(const Theta &theta, Mat term);
  Mat assemble(const Physical &phys) const;
  /// Keep only the listed rows and columns of every term.
  ReducedAffineMatrix select(const std::vector<int> &row_idx, const std::vector<int> &col_idx) const;
};

} // namespace rbstab
