// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/tensor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace tensordec {

/// Moore-Penrose pseudo-inverse via SVD with the usual eps * max(m,n) * sigma_max cutoff.
inline Matrix pseudo_inverse(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const double cutoff =
      std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(m.rows(), m.cols())) * sv(0);
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Computes rhs * pinv(gram) for a symmetric PSD gram. A damped Cholesky
/// solve of (gram + eps*I), eps = 1e-12 * trace/R, is tried first; if its
/// residual against the undamped system exceeds 1e-8 (relative) or produces
/// non-finite values, the SVD pseudo-inverse is used instead. ALS grams are
/// small and often near-singular, so both paths must stay finite.
inline Matrix solve_against_gram(const Matrix& rhs, const Matrix& gram) {
  const Index r = gram.rows();
  if (gram.cols() != r || rhs.cols() != r) {
    throw std::invalid_argument("solve_against_gram: shape mismatch");
  }
  const double tr = gram.trace();
  const double eps = 1e-12 * tr / static_cast<double>(r);
  if (std::isfinite(eps) && eps > 0.0) {
    Matrix damped = gram;
    damped.diagonal().array() += eps;
    Eigen::LDLT<Matrix> ldlt(damped);
    if (ldlt.info() == Eigen::Success) {
      Matrix x = ldlt.solve(rhs.transpose()).transpose();
      const double rhs_norm = rhs.norm();
      const double resid = (x * gram - rhs).norm();
      if (x.allFinite() && resid <= 1e-8 * std::max(rhs_norm, 1e-300)) {
        return x;
      }
    }
  }
  return rhs * pseudo_inverse(gram);
}

/// One ALS block update: x_unf * kr * pinv(gram), gram = R x R Hadamard
/// product of the other factors' grams.
inline Matrix lstsq_gram(const Matrix& x_unf, const Matrix& kr, const Matrix& gram) {
  return solve_against_gram(x_unf * kr, gram);
}

/// Flips each column so its largest-magnitude entry is nonnegative. Keeps
/// SVD output deterministic from run to run.
inline void fix_sign_columns(Matrix& u) {
  for (Index c = 0; c < u.cols(); ++c) {
    Index imax = 0;
    u.col(c).cwiseAbs().maxCoeff(&imax);
    if (u(imax, c) < 0.0) u.col(c) = -u.col(c);
  }
}

/// Leading `rank` left singular vectors, sign-fixed.
inline Matrix leading_left_singular_vectors(const Matrix& m, Index rank) {
  if (rank < 1 || rank > std::min(m.rows(), m.cols())) {
    throw std::invalid_argument("leading_left_singular_vectors: rank " + std::to_string(rank) +
                                " out of range for " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " matrix");
  }
  Matrix u;
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    u = svd.matrixU().leftCols(rank);
  } else {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
    u = svd.matrixU().leftCols(rank);
  }
  fix_sign_columns(u);
  return u;
}

/// Normalizes each column to unit Euclidean norm and returns the norms.
/// Zero columns are left untouched and report weight 0.
inline Vector normalize_columns(Matrix& m) {
  Vector norms(m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    const double n = m.col(c).norm();
    norms(c) = n;
    if (n > 0.0) m.col(c) /= n;
  }
  return norms;
}

}  // namespace tensordec
