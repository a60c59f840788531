// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/kernels.hpp"
#include "tensordec/linalg.hpp"

#include <chrono>
#include <cstdint>
#include <random>

namespace tensordec {

/// Weighted sum of rank-one terms: entry (i,j,k) = sum_r w_r A(i,r) B(j,r) C(k,r).
struct CPModel {
  Vector weights;  // length R
  Matrix A, B, C;  // I x R, J x R, K x R

  Index rank() const { return weights.size(); }
  std::array<Index, 3> dims() const { return {A.rows(), B.rows(), C.rows()}; }

  void validate() const {
    if (A.cols() != rank() || B.cols() != rank() || C.cols() != rank()) {
      throw std::invalid_argument("CPModel: factor column counts must equal weight length");
    }
    if (!weights.allFinite()) throw std::invalid_argument("CPModel: weights must be finite");
  }
};

/// Per-iteration progress of an iterative fit. The optional vectors are
/// filled only by the solvers that have something to report there.
struct FitTrace {
  std::vector<double> relative_errors;
  std::vector<double> wall_times;        // seconds per iteration
  std::vector<double> objectives;        // penalized objective (sparse fits)
  std::vector<double> core_norms;        // Tucker core norm per iteration
  std::vector<double> ortho_defects;     // max |U^T U - I| per iteration
  std::vector<double> unit_norm_defects; // max | ||col|| - 1 | per iteration
  bool converged = false;

  std::size_t iterations() const { return relative_errors.size(); }
};

struct CpOptions {
  int max_iters = 500;
  double tol = 1e-8;  // absolute change in relative error between sweeps
  std::uint64_t seed = 0;
};

namespace detail {

/// Factor initialization shared by every CP-family solver: entries i.i.d.
/// uniform(0,1), drawn in A, B, C order, each factor filled in storage order.
inline std::array<Matrix, 3> init_factors(const std::array<Index, 3>& dims, Index rank,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::array<Matrix, 3> f;
  for (int n = 0; n < 3; ++n) {
    f[n].resize(dims[static_cast<std::size_t>(n)], rank);
    for (Index idx = 0; idx < f[n].size(); ++idx) f[n].data()[idx] = unif(rng);
  }
  return f;
}

inline void check_cp_rank(const DenseTensor3& t, Index rank) {
  const Index bound = max_cp_rank(t.dims());
  if (rank < 1 || rank > bound) {
    throw std::invalid_argument("rank " + std::to_string(rank) + " out of range [1, " +
                                std::to_string(bound) + "] for dims " + std::to_string(t.dim(0)) +
                                "x" + std::to_string(t.dim(1)) + "x" + std::to_string(t.dim(2)));
  }
}

}  // namespace detail

inline DenseTensor3 cp_reconstruct(const CPModel& model) {
  model.validate();
  const auto d = model.dims();
  Matrix m1 = model.A * model.weights.asDiagonal() * khatri_rao(model.C, model.B).transpose();
  return fold(m1, 1, d);
}

/// ||t - reconstruction||_F / ||t||_F, with 0/0 defined as 0.
inline double relative_error(const DenseTensor3& t, const CPModel& model) {
  if (model.dims() != t.dims()) {
    throw std::invalid_argument("relative_error: model dims do not match tensor dims");
  }
  const DenseTensor3 rec = cp_reconstruct(model);
  const double num = (t.flat() - rec.flat()).norm();
  const double den = frobenius_norm(t);
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return num / den;
}

/// Returns an equivalent model with unit weights: the weights are folded
/// into the mode-1 factor's columns.
inline CPModel fold_weights(const CPModel& model) {
  model.validate();
  CPModel out = model;
  out.A = model.A * model.weights.asDiagonal();
  out.weights = Vector::Ones(model.rank());
  return out;
}

/// CP decomposition by alternating least squares. Each sweep updates A, B,
/// C in that order; every factor update is the exact least-squares minimizer
/// X_(n) * kr * pinv(gram), followed by column normalization with the norms
/// stored as the weights. Stops when the relative error changes by less
/// than opts.tol between sweeps, or after opts.max_iters sweeps.
inline std::pair<CPModel, FitTrace> cp_als(const DenseTensor3& t, Index rank,
                                           const CpOptions& opts = {}) {
  detail::check_cp_rank(t, rank);
  if (opts.max_iters < 1) throw std::invalid_argument("cp_als: max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("cp_als: tol must be positive");
  if (!all_finite(t)) throw std::invalid_argument("cp_als: input tensor has non-finite entries");

  const auto d = t.dims();
  auto factors = detail::init_factors(d, rank, opts.seed);
  Matrix& A = factors[0];
  Matrix& B = factors[1];
  Matrix& C = factors[2];

  const Matrix X1 = unfold(t, 1);
  const Matrix X2 = unfold(t, 2);
  const Matrix X3 = unfold(t, 3);

  CPModel model;
  model.weights = Vector::Ones(rank);

  FitTrace trace;
  double prev_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();

    A = lstsq_gram(X1, khatri_rao(C, B),
                   ((C.transpose() * C).array() * (B.transpose() * B).array()).matrix());
    model.weights = normalize_columns(A);

    B = lstsq_gram(X2, khatri_rao(C, A),
                   ((C.transpose() * C).array() * (A.transpose() * A).array()).matrix());
    model.weights = normalize_columns(B);

    C = lstsq_gram(X3, khatri_rao(B, A),
                   ((B.transpose() * B).array() * (A.transpose() * A).array()).matrix());
    model.weights = normalize_columns(C);

    model.A = A;
    model.B = B;
    model.C = C;
    const double err = relative_error(t, model);

    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    trace.relative_errors.push_back(err);

    if (std::abs(prev_err - err) < opts.tol) {
      trace.converged = true;
      break;
    }
    prev_err = err;
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace tensordec
