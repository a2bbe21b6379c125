#pragma once

#include "ppdsc/core.hpp"
#include "ppdsc/model.hpp"
#include "ppdsc/privacy.hpp"

#include <utility>
#include <vector>

namespace ppdsc::debias {

/// Which corrections a local machine applies to its perturbed layer before
/// the eigen-decomposition.
enum class DebiasMode {
  full,       // flip correction + degree-diagonal correction
  diag_only,  // degree-diagonal correction on the perturbed matrix only
  none,       // plain squared perturbed matrix
};

using DebiasedAdjacency = Matrix;  // symmetric, zero diagonal
using DebiasedSquare = Matrix;     // symmetric, dense

namespace detail {

inline double denom(const privacy::PrivacyParams& params) {
  if (!params.debiasable())
    throw degenerate_parameters("debiasing requires q + q' > 1");
  return params.q + params.qprime - 1.0;
}

inline Vector degrees(const model::Adjacency& a) { return a.matrix().rowwise().sum(); }

inline Matrix symmetrized(Matrix m) { return ((m + m.transpose()) / 2.0).eval(); }

}  // namespace detail

/// Unbiased estimator of the link probabilities from one perturbed layer:
///   off-diagonal  (A~_ij - (1-q')) / (q+q'-1),   diagonal 0.
inline DebiasedAdjacency debias_rr(const model::Adjacency& a_tilde,
                                   const privacy::PrivacyParams& params) {
  const double d = detail::denom(params);
  const double shift = 1.0 - params.qprime;
  Matrix out = (a_tilde.matrix().array() - shift).matrix() / d;
  out.diagonal().setZero();
  return out;
}

/// Second correction: the square of the debiased layer is further adjusted on
/// its diagonal by the perturbed degrees,
///   M = Abar^2/n - (q')^2 / (n (q+q'-1)^2) * G,   G_ii = sum_j A~_ij.
inline DebiasedSquare debias_square(const DebiasedAdjacency& a_bar,
                                    const model::Adjacency& a_tilde,
                                    const privacy::PrivacyParams& params) {
  const auto n = a_tilde.n();
  if (a_bar.rows() != n || a_bar.cols() != n)
    throw dimension_error("debias_square: operand shapes differ");
  const double d = detail::denom(params);
  const double scale = (params.qprime * params.qprime) /
                       (static_cast<double>(n) * d * d);
  Matrix m = detail::symmetrized((a_bar * a_bar) / static_cast<double>(n));
  m.diagonal() -= scale * detail::degrees(a_tilde);
  return m;
}

/// The matrix a local machine eigen-decomposes, by correction mode.
inline Matrix variant_matrix(const model::Adjacency& a_tilde,
                             const privacy::PrivacyParams& params, DebiasMode mode) {
  const auto n = a_tilde.n();
  switch (mode) {
    case DebiasMode::full:
      return debias_square(debias_rr(a_tilde, params), a_tilde, params);
    case DebiasMode::diag_only: {
      Matrix m = detail::symmetrized((a_tilde.matrix() * a_tilde.matrix()) /
                                     static_cast<double>(n));
      m.diagonal() -= detail::degrees(a_tilde) / static_cast<double>(n);
      return m;
    }
    case DebiasMode::none:
      return detail::symmetrized((a_tilde.matrix() * a_tilde.matrix()) /
                                 static_cast<double>(n));
  }
  throw std::invalid_argument("variant_matrix: unknown mode");
}

/// Entrywise mean of the per-layer estimators.
inline Matrix aggregate(const std::vector<Matrix>& m_list) {
  if (m_list.empty()) throw dimension_error("aggregate: empty list");
  const auto n = m_list.front().rows();
  Matrix sum = Matrix::Zero(n, m_list.front().cols());
  for (const Matrix& m : m_list) {
    if (m.rows() != sum.rows() || m.cols() != sum.cols())
      throw dimension_error("aggregate: shapes differ");
    sum += m;
  }
  return sum / static_cast<double>(m_list.size());
}

}  // namespace ppdsc::debias
