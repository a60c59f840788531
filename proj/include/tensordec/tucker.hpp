// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/cp.hpp"

namespace tensordec {

/// Core tensor plus three column-orthonormal factors.
struct TuckerModel {
  DenseTensor3 core;        // R1 x R2 x R3
  std::array<Matrix, 3> factors;  // I x R1, J x R2, K x R3

  std::array<Index, 3> ranks() const { return core.dims(); }
  std::array<Index, 3> dims() const {
    return {factors[0].rows(), factors[1].rows(), factors[2].rows()};
  }
};

enum class TuckerInit { hosvd, random };

struct HooiOptions {
  int max_iters = 200;
  double tol = 1e-8;  // |change in ||G||_F| / ||t||_F
  TuckerInit init = TuckerInit::hosvd;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_tucker_ranks(const DenseTensor3& t, const std::array<Index, 3>& ranks) {
  const auto d = t.dims();
  for (int n = 0; n < 3; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const Index other = (d[0] * d[1] * d[2]) / d[un];
    if (ranks[un] < 1 || ranks[un] > d[un]) {
      throw std::invalid_argument("tucker rank " + std::to_string(ranks[un]) + " exceeds mode-" +
                                  std::to_string(n + 1) + " extent " + std::to_string(d[un]));
    }
    // A thin SVD of the mode-n unfolding cannot yield more columns than this.
    if (ranks[un] > other) {
      throw std::invalid_argument("tucker rank " + std::to_string(ranks[un]) + " exceeds the mode-" +
                                  std::to_string(n + 1) + " unfolding column count " +
                                  std::to_string(other));
    }
  }
}

inline double max_ortho_defect(const std::array<Matrix, 3>& factors) {
  double worst = 0.0;
  for (const auto& u : factors) {
    Matrix g = u.transpose() * u;
    g.diagonal().array() -= 1.0;
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace detail

/// Truncated HOSVD: factor n holds the leading ranks[n] left singular
/// vectors of the mode-n unfolding.
inline std::array<Matrix, 3> hosvd_init(const DenseTensor3& t, const std::array<Index, 3>& ranks) {
  detail::check_tucker_ranks(t, ranks);
  std::array<Matrix, 3> u;
  for (int n = 0; n < 3; ++n) {
    u[static_cast<std::size_t>(n)] =
        leading_left_singular_vectors(unfold(t, n + 1), ranks[static_cast<std::size_t>(n)]);
  }
  return u;
}

inline DenseTensor3 tucker_reconstruct(const TuckerModel& model) {
  const auto r = model.ranks();
  for (int n = 0; n < 3; ++n) {
    if (model.factors[static_cast<std::size_t>(n)].cols() != r[static_cast<std::size_t>(n)]) {
      throw std::invalid_argument("tucker_reconstruct: factor/core shape mismatch on mode " +
                                  std::to_string(n + 1));
    }
  }
  DenseTensor3 out = mode_product(model.core, model.factors[0], 1);
  out = mode_product(out, model.factors[1], 2);
  out = mode_product(out, model.factors[2], 3);
  return out;
}

/// Higher-order orthogonal iteration. Per iteration and mode, the tensor is
/// contracted with the other two factors transposed and the mode unfolding's
/// leading singular vectors become the new factor; the core is the full
/// contraction with all three factors transposed. Iterates until the core
/// norm stabilizes: |delta ||G||_F| / ||t||_F < tol.
inline std::pair<TuckerModel, FitTrace> hooi(const DenseTensor3& t, const std::array<Index, 3>& ranks,
                                             const HooiOptions& opts = {}) {
  detail::check_tucker_ranks(t, ranks);
  if (opts.max_iters < 1) throw std::invalid_argument("hooi: max_iters must be >= 1");
  if (!all_finite(t)) throw std::invalid_argument("hooi: input tensor has non-finite entries");

  std::array<Matrix, 3> u;
  if (opts.init == TuckerInit::hosvd) {
    u = hosvd_init(t, ranks);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int n = 0; n < 3; ++n) {
      Matrix g(t.dim(n), ranks[static_cast<std::size_t>(n)]);
      for (Index idx = 0; idx < g.size(); ++idx) g.data()[idx] = gauss(rng);
      Eigen::HouseholderQR<Matrix> qr(g);
      u[static_cast<std::size_t>(n)] =
          qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
    }
  }

  const double tnorm = frobenius_norm(t);
  TuckerModel model;
  FitTrace trace;
  double prev_core_norm = -1.0;

  for (int it = 0; it < opts.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();

    DenseTensor3 w23 = mode_product(mode_product(t, u[1].transpose(), 2), u[2].transpose(), 3);
    u[0] = leading_left_singular_vectors(unfold(w23, 1), ranks[0]);

    DenseTensor3 w13 = mode_product(mode_product(t, u[0].transpose(), 1), u[2].transpose(), 3);
    u[1] = leading_left_singular_vectors(unfold(w13, 2), ranks[1]);

    DenseTensor3 w12 = mode_product(mode_product(t, u[0].transpose(), 1), u[1].transpose(), 2);
    u[2] = leading_left_singular_vectors(unfold(w12, 3), ranks[2]);

    model.core = mode_product(w12, u[2].transpose(), 3);
    model.factors = u;

    const double core_norm = frobenius_norm(model.core);
    const DenseTensor3 rec = tucker_reconstruct(model);
    const double err = tnorm == 0.0 ? 0.0 : (t.flat() - rec.flat()).norm() / tnorm;

    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    trace.relative_errors.push_back(err);
    trace.core_norms.push_back(core_norm);
    trace.ortho_defects.push_back(detail::max_ortho_defect(u));

    if (prev_core_norm >= 0.0 &&
        std::abs(core_norm - prev_core_norm) < opts.tol * std::max(tnorm, 1e-300)) {
      trace.converged = true;
      break;
    }
    prev_core_norm = core_norm;
  }
  return {std::move(model), std::move(trace)};
}

}  // namespace tensordec
