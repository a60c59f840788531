// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/tensor.hpp"

namespace tensordec {

namespace detail {

inline void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("mode must be 1, 2, or 3 (got " + std::to_string(mode) + ")");
  }
}

}  // namespace detail

/// Mode-n matricization. Rows carry the mode-n index; the remaining indices
/// run over columns in increasing-mode order:
///   mode 1: I x (J*K), column j + k*J
///   mode 2: J x (I*K), column i + k*I
///   mode 3: K x (I*J), column i + j*I
inline Matrix unfold(const DenseTensor3& t, int mode) {
  detail::check_mode(mode);
  const auto d = t.dims();
  const Index I = d[0], J = d[1], K = d[2];
  switch (mode) {
    case 1:
      return t.mode1_view();
    case 2: {
      Matrix m(J, I * K);
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) m(j, i + k * I) = t(i, j, k);
      return m;
    }
    default: {
      Matrix m(K, I * J);
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) m(k, i + j * I) = t(i, j, k);
      return m;
    }
  }
}

/// Inverse of unfold: exact round-trip for any tensor and mode.
inline DenseTensor3 fold(const Matrix& m, int mode, const std::array<Index, 3>& dims) {
  detail::check_mode(mode);
  const Index I = dims[0], J = dims[1], K = dims[2];
  const Index rows_expected = dims[static_cast<std::size_t>(mode - 1)];
  const Index cols_expected = (I * J * K) / rows_expected;
  if (m.rows() != rows_expected || m.cols() != cols_expected) {
    throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + " but mode-" + std::to_string(mode) +
                                " unfolding of " + std::to_string(I) + "x" + std::to_string(J) +
                                "x" + std::to_string(K) + " requires " +
                                std::to_string(rows_expected) + "x" + std::to_string(cols_expected));
  }
  DenseTensor3 t(I, J, K);
  switch (mode) {
    case 1:
      Eigen::Map<Matrix>(t.data().data(), I, J * K) = m;
      break;
    case 2:
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) t(i, j, k) = m(j, i + k * I);
      break;
    default:
      for (Index k = 0; k < K; ++k)
        for (Index j = 0; j < J; ++j)
          for (Index i = 0; i < I; ++i) t(i, j, k) = m(k, i + j * I);
      break;
  }
  return t;
}

/// Column-wise Kronecker product. Column r of the result is kron(a_r, b_r).
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    for (Index p = 0; p < a.rows(); ++p)
      out.col(r).segment(p * b.rows(), b.rows()) = a(p, r) * b.col(r);
  return out;
}

inline Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index p = 0; p < a.rows(); ++p)
    for (Index q = 0; q < a.cols(); ++q)
      out.block(p * b.rows(), q * b.cols(), b.rows(), b.cols()) = a(p, q) * b;
  return out;
}

/// Tucker contracted product along one mode: replaces dims[mode] with u.rows().
inline DenseTensor3 mode_product(const DenseTensor3& t, const Matrix& u, int mode) {
  detail::check_mode(mode);
  auto dims = t.dims();
  const Index n = dims[static_cast<std::size_t>(mode - 1)];
  if (u.cols() != n) {
    throw std::invalid_argument("mode_product: matrix has " + std::to_string(u.cols()) +
                                " columns but mode-" + std::to_string(mode) + " extent is " +
                                std::to_string(n));
  }
  Matrix contracted = u * unfold(t, mode);
  dims[static_cast<std::size_t>(mode - 1)] = u.rows();
  return fold(contracted, mode, dims);
}

}  // namespace tensordec
