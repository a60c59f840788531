// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations used to pin expected values. These
// stay deliberately independent of the library's strided/gram-based paths:
// everything here is plain loops over tensor entries.
#pragma once

#include "tensordec/cp.hpp"
#include "tensordec/tucker.hpp"

#include <random>

namespace oracle {

using tensordec::DenseTensor3;
using tensordec::Index;
using tensordec::Matrix;
using tensordec::Vector;

// Element-by-element mode-n matricization: row = the mode index, column =
// remaining indices in increasing-mode order.
inline Matrix unfold(const DenseTensor3& t, int mode) {
  const auto d = t.dims();
  const Index I = d[0], J = d[1], K = d[2];
  Matrix m;
  if (mode == 1) m.setZero(I, J * K);
  if (mode == 2) m.setZero(J, I * K);
  if (mode == 3) m.setZero(K, I * J);
  for (Index i = 0; i < I; ++i)
    for (Index j = 0; j < J; ++j)
      for (Index k = 0; k < K; ++k) {
        if (mode == 1) m(i, j + k * J) = t(i, j, k);
        if (mode == 2) m(j, i + k * I) = t(i, j, k);
        if (mode == 3) m(k, i + j * I) = t(i, j, k);
      }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index p = 0; p < b.rows(); ++p)
        for (Index q = 0; q < b.cols(); ++q)
          out(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return out;
}

inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r)
    out.col(r) = kron(Matrix(a.col(r)), Matrix(b.col(r)));
  return out;
}

inline double frobenius(const DenseTensor3& t) {
  double s = 0.0;
  const auto d = t.dims();
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) s += t(i, j, k) * t(i, j, k);
  return std::sqrt(s);
}

inline DenseTensor3 cp_reconstruct(const tensordec::CPModel& m) {
  const auto d = m.dims();
  DenseTensor3 out(d[0], d[1], d[2]);
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) {
        double v = 0.0;
        for (Index r = 0; r < m.rank(); ++r)
          v += m.weights(r) * m.A(i, r) * m.B(j, r) * m.C(k, r);
        out(i, j, k) = v;
      }
  return out;
}

inline DenseTensor3 tucker_reconstruct(const tensordec::TuckerModel& m) {
  const auto d = m.dims();
  const auto r = m.ranks();
  DenseTensor3 out(d[0], d[1], d[2]);
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) {
        double v = 0.0;
        for (Index p = 0; p < r[0]; ++p)
          for (Index q = 0; q < r[1]; ++q)
            for (Index s = 0; s < r[2]; ++s)
              v += m.core(p, q, s) * m.factors[0](i, p) * m.factors[1](j, q) * m.factors[2](k, s);
        out(i, j, k) = v;
      }
  return out;
}

inline DenseTensor3 mode_product(const DenseTensor3& t, const Matrix& u, int mode) {
  const auto d = t.dims();
  std::array<Index, 3> nd = d;
  nd[static_cast<std::size_t>(mode - 1)] = u.rows();
  DenseTensor3 out(nd[0], nd[1], nd[2]);
  for (Index i = 0; i < nd[0]; ++i)
    for (Index j = 0; j < nd[1]; ++j)
      for (Index k = 0; k < nd[2]; ++k) {
        double v = 0.0;
        if (mode == 1)
          for (Index s = 0; s < d[0]; ++s) v += u(i, s) * t(s, j, k);
        if (mode == 2)
          for (Index s = 0; s < d[1]; ++s) v += u(j, s) * t(i, s, k);
        if (mode == 3)
          for (Index s = 0; s < d[2]; ++s) v += u(k, s) * t(i, j, s);
        out(i, j, k) = v;
      }
  return out;
}

// f = 1/2 ||t - [[A,B,C]]||_F^2 with unit weights, evaluated entrywise.
inline double half_squared_misfit(const DenseTensor3& t, const Matrix& a, const Matrix& b,
                                  const Matrix& c) {
  double s = 0.0;
  const auto d = t.dims();
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) {
        double v = 0.0;
        for (Index r = 0; r < a.cols(); ++r) v += a(i, r) * b(j, r) * c(k, r);
        const double diff = t(i, j, k) - v;
        s += diff * diff;
      }
  return 0.5 * s;
}

inline DenseTensor3 random_tensor(Index i, Index j, Index k, std::uint64_t seed,
                                  double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(lo, hi);
  DenseTensor3 t(i, j, k);
  for (auto& v : t.data()) v = unif(rng);
  return t;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix m(rows, cols);
  for (Index idx = 0; idx < m.size(); ++idx) m.data()[idx] = unif(rng);
  return m;
}

// Gaussian factors give well-conditioned synthetic low-rank instances;
// uniform(0,1) factors are nearly collinear and make ALS crawl.
inline Matrix gauss_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index idx = 0; idx < m.size(); ++idx) m.data()[idx] = g(rng);
  return m;
}

// Rank-R tensor assembled entrywise from known random factors.
inline DenseTensor3 tensor_from_factors(const Matrix& a, const Matrix& b, const Matrix& c) {
  tensordec::CPModel m;
  m.A = a;
  m.B = b;
  m.C = c;
  m.weights = Vector::Ones(a.cols());
  return oracle::cp_reconstruct(m);
}

}  // namespace oracle
