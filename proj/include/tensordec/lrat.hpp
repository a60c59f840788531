// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/cp.hpp"

#include <functional>

namespace tensordec {

/// Boolean companion tensor marking which entries of a data tensor are
/// observed. Same linear layout as DenseTensor3.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(Index i, Index j, Index k, bool observed = true)
      : dims_{i, j, k}, observed_(static_cast<std::size_t>(i * j * k), observed ? 1 : 0) {
    if (i <= 0 || j <= 0 || k <= 0) {
      throw std::invalid_argument("ObservationMask: dimensions must be positive");
    }
  }

  static ObservationMask all_observed(const std::array<Index, 3>& d) {
    return ObservationMask(d[0], d[1], d[2], true);
  }

  std::array<Index, 3> dims() const { return dims_; }
  Index size() const { return static_cast<Index>(observed_.size()); }

  bool operator()(Index i, Index j, Index k) const {
    return observed_[static_cast<std::size_t>((k * dims_[1] + j) * dims_[0] + i)] != 0;
  }
  void set(Index i, Index j, Index k, bool v) {
    observed_.at(static_cast<std::size_t>((k * dims_[1] + j) * dims_[0] + i)) = v ? 1 : 0;
  }

  Index count_observed() const {
    Index n = 0;
    for (auto b : observed_) n += b;
    return n;
  }

  /// 0/1 multiplier vector in flat layout order.
  Vector multipliers() const {
    Vector m(size());
    for (Index i = 0; i < size(); ++i) m(i) = observed_[static_cast<std::size_t>(i)];
    return m;
  }

  const std::vector<std::uint8_t>& raw() const { return observed_; }

 private:
  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<std::uint8_t> observed_;
};

struct LratConfig {
  Index max_rank = 1;     // working rank T, overestimated
  double lambda = 0.0;    // l1 weight on the component weights
  // Step scale t > 0; each block steps by 1/(t * d_n). With t >= 2 the step
  // is at most 1/(2 ||U U^T||_F) <= 1/L for every block, which keeps the
  // objective nonincreasing through the column rescaling; t = 1 can bump
  // the objective in the first few iterations.
  double t_scale = 2.0;
  int max_iters = 2000;
  double tol = 1e-8;      // absolute change in penalized objective

  void validate() const {
    if (max_rank < 1) throw std::invalid_argument("LratConfig: max_rank must be >= 1");
    if (!(t_scale > 0.0)) throw std::invalid_argument("LratConfig: t_scale must be positive");
    if (lambda < 0.0) throw std::invalid_argument("LratConfig: lambda must be nonnegative");
    if (max_iters < 1) throw std::invalid_argument("LratConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("LratConfig: tol must be positive");
  }
};

/// Componentwise shrinkage: sign(x) * max(|x| - kappa, 0). This is the
/// proximal map of kappa * ||.||_1.
inline Vector soft_threshold(const Vector& x, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("soft_threshold: kappa must be nonnegative");
  return x.array().sign() * (x.array().abs() - kappa).max(0.0);
}

struct LratFitResult {
  CPModel model;
  Index estimated_rank = 0;
  FitTrace trace;
};

struct LratCompletionResult {
  DenseTensor3 completed;
  CPModel model;
  Index estimated_rank = 0;
  FitTrace trace;
};

using LambdaEstimator = std::function<double(const DenseTensor3&, const ObservationMask&)>;

/// Regularization weight for a completion run. The default heuristic is
/// 0.1 * ||c(observed)||_F / sqrt(#observed); an alternative strategy (for
/// instance a hybrid projection-based estimator) can be plugged in instead.
inline double estimate_lambda(const DenseTensor3& c, const ObservationMask& omega,
                              const LambdaEstimator& strategy = {}) {
  if (strategy) return strategy(c, omega);
  if (omega.dims() != c.dims()) {
    throw std::invalid_argument("estimate_lambda: mask dims do not match tensor dims");
  }
  const Index n = omega.count_observed();
  if (n == 0) return 0.0;
  const double norm = (c.flat().cwiseProduct(omega.multipliers())).norm();
  return 0.1 * norm / std::sqrt(static_cast<double>(n));
}

namespace detail {

struct LratState {
  Matrix A, B, C;
  Vector sigma;
};

inline Vector recon_flat(const LratState& s) {
  const Index i = s.A.rows(), jk = s.B.rows() * s.C.rows();
  Matrix m1 = s.A * s.sigma.asDiagonal() * khatri_rao(s.C, s.B).transpose();
  return Eigen::Map<const Vector>(m1.data(), i * jk);
}

inline double max_unit_norm_defect(const LratState& s) {
  double worst = 0.0;
  for (const Matrix* f : {&s.A, &s.B, &s.C}) {
    for (Index c = 0; c < f->cols(); ++c) {
      const double n = f->col(c).norm();
      if (n > 0.0) worst = std::max(worst, std::abs(n - 1.0));
    }
  }
  return worst;
}

/// Shared engine for the sparse-weight fit and the masked completion.
/// Minimizes ||mask .* (data - recon)||_F^2 + lambda * ||sigma||_1 by a
/// proximal alternating scheme: per factor, a gradient step with stepsize
/// 1/(t * max(||U U^T||_F, 1)) followed by column rescaling to unit norm;
/// then a gradient step on sigma followed by soft thresholding with
/// threshold lambda/(t * eta). The rank estimate is the number of nonzero
/// entries in the final sigma.
inline LratFitResult lrat_engine(const DenseTensor3& data, const ObservationMask& omega,
                                 const LratConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (omega.dims() != data.dims()) {
    throw std::invalid_argument("lrat: mask dims do not match tensor dims");
  }
  if (omega.count_observed() == 0) throw std::invalid_argument("lrat: mask observes no entries");
  if (!all_finite(data)) throw std::invalid_argument("lrat: input tensor has non-finite entries");
  if (cfg.max_rank > max_cp_rank(data.dims())) {
    throw std::invalid_argument("lrat: max_rank " + std::to_string(cfg.max_rank) +
                                " exceeds the rank bound " + std::to_string(max_cp_rank(data.dims())));
  }

  const auto d = data.dims();
  const Index T = cfg.max_rank;
  const double t = cfg.t_scale;

  LratState st;
  {
    auto f = detail::init_factors(d, T, seed);
    st.A = std::move(f[0]);
    st.B = std::move(f[1]);
    st.C = std::move(f[2]);
    st.sigma = Vector::Ones(T);
  }

  const Vector mask = omega.multipliers();
  const Vector data_masked = data.flat().cwiseProduct(mask);
  const double data_norm = data_masked.norm();

  auto masked_residual = [&]() -> DenseTensor3 {
    Vector r = (recon_flat(st) - data.flat()).cwiseProduct(mask);
    return DenseTensor3::from_data(d[0], d[1], d[2], std::vector<double>(r.data(), r.data() + r.size()));
  };
  auto rel_err = [&](const DenseTensor3& res) {
    const double n = frobenius_norm(res);
    return data_norm == 0.0 ? (n == 0.0 ? 0.0 : 1.0) : n / data_norm;
  };

  const double initial_err = rel_err(masked_residual());

  FitTrace trace;
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();

    // Factor steps. The step denominator uses the unmasked design gram,
    // which dominates the masked one.
    {
      DenseTensor3 res = masked_residual();
      const Matrix z = khatri_rao(st.C, st.B);
      const Matrix uu = st.sigma.asDiagonal() *
                        ((st.C.transpose() * st.C).array() * (st.B.transpose() * st.B).array()).matrix() *
                        st.sigma.asDiagonal();
      const double dn = std::max(uu.norm(), 1.0);
      st.A -= (2.0 / (t * dn)) * (unfold(res, 1) * z * st.sigma.asDiagonal());
      normalize_columns(st.A);
    }
    {
      DenseTensor3 res = masked_residual();
      const Matrix z = khatri_rao(st.C, st.A);
      const Matrix vv = st.sigma.asDiagonal() *
                        ((st.C.transpose() * st.C).array() * (st.A.transpose() * st.A).array()).matrix() *
                        st.sigma.asDiagonal();
      const double en = std::max(vv.norm(), 1.0);
      st.B -= (2.0 / (t * en)) * (unfold(res, 2) * z * st.sigma.asDiagonal());
      normalize_columns(st.B);
    }
    {
      DenseTensor3 res = masked_residual();
      const Matrix z = khatri_rao(st.B, st.A);
      const Matrix ww = st.sigma.asDiagonal() *
                        ((st.B.transpose() * st.B).array() * (st.A.transpose() * st.A).array()).matrix() *
                        st.sigma.asDiagonal();
      const double fn = std::max(ww.norm(), 1.0);
      st.C -= (2.0 / (t * fn)) * (unfold(res, 3) * z * st.sigma.asDiagonal());
      normalize_columns(st.C);
    }

    // Weight step: gradient on the masked quadratic, then shrinkage.
    {
      DenseTensor3 res = masked_residual();
      const Matrix k = khatri_rao(st.C, khatri_rao(st.B, st.A));  // IJK x T
      Matrix km = k;
      for (Index c = 0; c < km.cols(); ++c) km.col(c) = km.col(c).cwiseProduct(mask);
      const Matrix qq = km.transpose() * km;
      const double eta = std::max(qq.norm(), 1.0);
      const Vector grad = 2.0 * (km.transpose() * res.flat());
      const Vector beta = st.sigma - grad / (t * eta);
      st.sigma = soft_threshold(beta, cfg.lambda / (t * eta));
    }

    const DenseTensor3 res = masked_residual();
    const double err = rel_err(res);
    const double obj = res.flat().squaredNorm() + cfg.lambda * st.sigma.lpNorm<1>();

    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    trace.relative_errors.push_back(err);
    trace.objectives.push_back(obj);
    trace.unit_norm_defects.push_back(max_unit_norm_defect(st));

    if (!std::isfinite(err) || err > 1e6 * std::max(initial_err, 1e-300)) {
      throw std::runtime_error("lrat: diverged at iteration " + std::to_string(it + 1) +
                               " (relative error " + std::to_string(err) + ", initial " +
                               std::to_string(initial_err) + ")");
    }
    if (std::abs(prev_obj - obj) < cfg.tol) {
      trace.converged = true;
      break;
    }
    prev_obj = obj;
  }

  LratFitResult out;
  out.model.A = st.A;
  out.model.B = st.B;
  out.model.C = st.C;
  out.model.weights = st.sigma;
  out.estimated_rank = static_cast<Index>((st.sigma.array() != 0.0).count());
  out.trace = std::move(trace);
  return out;
}

}  // namespace detail

/// Sparse-weight CP approximation with simultaneous rank estimation.
inline LratFitResult lrat_fit(const DenseTensor3& c, const LratConfig& cfg, std::uint64_t seed = 0) {
  return detail::lrat_engine(c, ObservationMask::all_observed(c.dims()), cfg, seed);
}

/// Masked low-rank completion: the fit sees only observed entries, and the
/// returned tensor equals the input exactly on the observed set and the
/// model reconstruction elsewhere.
inline LratCompletionResult lrat_complete(const DenseTensor3& c, const ObservationMask& omega,
                                          const LratConfig& cfg, std::uint64_t seed = 0) {
  LratFitResult fit = detail::lrat_engine(c, omega, cfg, seed);

  LratCompletionResult out;
  out.completed = cp_reconstruct(fit.model);
  const auto d = c.dims();
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        if (omega(i, j, k)) out.completed(i, j, k) = c(i, j, k);
  out.model = std::move(fit.model);
  out.estimated_rank = fit.estimated_rank;
  out.trace = std::move(fit.trace);
  return out;
}

}  // namespace tensordec
