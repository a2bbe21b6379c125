#pragma once

#include "ppdsc/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <utility>

namespace ppdsc::spectral {

/// An n×K matrix with orthonormal columns; eigenvalues (descending) are
/// attached when the basis came from an eigen-decomposition, else empty.
struct Subspace {
  Matrix basis;
  Vector eigenvalues;

  Eigen::Index n() const { return basis.rows(); }
  Eigen::Index k() const { return basis.cols(); }
};

namespace detail {

constexpr double kOrthoTol = 1e-8;

inline void require_orthonormal(const Subspace& u, const char* who) {
  const Matrix gram = u.basis.transpose() * u.basis;
  const double err = (gram - Matrix::Identity(u.k(), u.k())).cwiseAbs().maxCoeff();
  if (err > kOrthoTol)
    throw dimension_error(std::string(who) + ": basis columns are not orthonormal");
}

/// Deterministic sign convention: the largest-magnitude entry of each column
/// is made positive; ties keep the lowest row index.
inline void fix_column_signs(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index at = 0;
    double best = std::abs(m(0, j));
    for (Eigen::Index i = 1; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > best) {
        best = a;
        at = i;
      }
    }
    if (m(at, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace detail

/// Eigenvectors of the K algebraically largest eigenvalues of a symmetric
/// matrix, eigenvalues descending, columns sign-fixed. A tie between the K-th
/// and (K+1)-th eigenvalue leaves the chosen subspace ill-defined; the solver
/// order is kept and a warning is emitted.
inline Subspace top_k_eigenvectors(const Matrix& s, int k) {
  if (s.rows() != s.cols()) throw dimension_error("top_k_eigenvectors: matrix must be square");
  const auto n = s.rows();
  if (k < 1 || k > n) throw dimension_error("top_k_eigenvectors: K out of range");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw dimension_error("top_k_eigenvectors: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("top_k_eigenvectors: eigensolver failed");

  Subspace out;
  out.basis.resize(n, k);
  out.eigenvalues.resize(k);
  for (int j = 0; j < k; ++j) {  // ascending -> descending
    out.basis.col(j) = es.eigenvectors().col(n - 1 - j);
    out.eigenvalues(j) = es.eigenvalues()(n - 1 - j);
  }
  detail::fix_column_signs(out.basis);

  if (k < n) {
    const double lam_k = es.eigenvalues()(n - k);
    const double lam_next = es.eigenvalues()(n - k - 1);
    if (std::abs(lam_k - lam_next) <= 1e-12 * scale)
      std::cerr << "ppdsc: warning: eigenvalue tie at position K, subspace choice "
                   "is solver-dependent\n";
  }
  return out;
}

/// Orthogonal K×K transform closest-mapping V onto V_ref:
///   Z = argmin_{Z orthogonal} ||V Z - V_ref||_F = L R^T
/// from the SVD L D R^T of V^T V_ref.
inline Matrix procrustes_align(const Subspace& v, const Subspace& v_ref) {
  if (v.n() != v_ref.n() || v.k() != v_ref.k())
    throw dimension_error("procrustes_align: subspace shapes differ");
  Eigen::JacobiSVD<Matrix> svd(v.basis.transpose() * v_ref.basis,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

/// Thin QR with the R diagonal forced nonnegative; errors on rank-deficient
/// input (degenerate aggregate).
inline Subspace orthonormalize(const Matrix& m) {
  const auto n = m.rows();
  const auto k = m.cols();
  if (k < 1 || n < k) throw dimension_error("orthonormalize: need n >= K >= 1");
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  double max_diag = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) max_diag = std::max(max_diag, std::abs(r(j, j)));
  for (Eigen::Index j = 0; j < k; ++j) {
    if (std::abs(r(j, j)) <= 1e-10 * std::max(1.0, max_diag))
      throw degenerate_aggregate("orthonormalize: input is rank deficient");
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return Subspace{std::move(q), Vector()};
}

/// Projection distance between equal-rank orthonormal bases: the spectral
/// norm of U U^T - U' U'^T. Equals sqrt(1 - sigma_min(U^T U')^2); evaluated
/// as sigma_max((I - U U^T) U'), which is the same quantity without the
/// cancellation under the square root when the subspaces (nearly) coincide.
inline double projection_distance(const Subspace& u, const Subspace& v) {
  if (u.n() != v.n() || u.k() != v.k())
    throw dimension_error("projection_distance: subspace shapes differ");
  detail::require_orthonormal(u, "projection_distance");
  detail::require_orthonormal(v, "projection_distance");
  const Matrix residual = v.basis - u.basis * (u.basis.transpose() * v.basis);
  Eigen::JacobiSVD<Matrix> svd(residual);
  return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

}  // namespace ppdsc::spectral
