#include "rbstab/affine.hpp"

#include <cmath>
#include <sstream>

namespace rbstab
{

double Theta::operator()(const Physical &phys) const
{
  return coeff * std::pow(phys.nu, nu_pow) * std::pow(phys.length, length_pow);
}

std::string Theta::str() const
{
  std::ostringstream os;
  os.precision(17);
  os << coeff << ' ' << nu_pow << ' ' << length_pow;
  return os.str();
}

Theta Theta::parse(const std::string &text)
{
  std::istringstream is(text);
  Theta t;
  if (!(is >> t.coeff >> t.nu_pow >> t.length_pow))
    throw UsageError("Theta::parse: malformed '" + text + "'");
  return t;
}

void AffineMatrix::add(const Theta &theta, SpMat term)
{
  if (terms.empty())
  {
    rows = static_cast<int>(term.rows());
    cols = static_cast<int>(term.cols());
  }
  else if (term.rows() != rows || term.cols() != cols)
    throw UsageError("AffineMatrix: term shape mismatch");
  terms.push_back({theta, std::move(term)});
}

SpMat AffineMatrix::assemble(const Physical &phys) const
{
  SpMat out(rows, cols);
  for (const auto &t : terms)
    out += t.theta(phys) * t.term;
  return out;
}

void AffineVector::add(const Theta &theta, Vec term)
{
  if (terms.empty())
    rows = static_cast<int>(term.size());
  else if (term.size() != rows)
    throw UsageError("AffineVector: term length mismatch");
  terms.push_back({theta, std::move(term)});
}

Vec AffineVector::assemble(const Physical &phys) const
{
  Vec out = Vec::Zero(rows);
  for (const auto &t : terms)
    out += t.theta(phys) * t.term;
  return out;
}

void ReducedAffineMatrix::add(const Theta &theta, Mat term)
{
  if (terms.empty())
  {
    rows = static_cast<int>(term.rows());
    cols = static_cast<int>(term.cols());
  }
  else if (term.rows() != rows || term.cols() != cols)
    throw UsageError("ReducedAffineMatrix: term shape mismatch");
  terms.push_back({theta, std::move(term)});
}

Mat ReducedAffineMatrix::assemble(const Physical &phys) const
{
  Mat out = Mat::Zero(rows, cols);
  for (const auto &t : terms)
    out += t.theta(phys) * t.term;
  return out;
}

ReducedAffineMatrix ReducedAffineMatrix::select(const std::vector<int> &row_idx,
                                                const std::vector<int> &col_idx) const
{
  ReducedAffineMatrix out;
  out.rows = static_cast<int>(row_idx.size());
  out.cols = static_cast<int>(col_idx.size());
  for (const auto &t : terms)
    out.terms.push_back({t.theta, t.term(row_idx, col_idx)});
  return out;
}

} // namespace rbstab
