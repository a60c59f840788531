// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/cp.hpp"

#include <limits>
#include <numeric>

namespace tensordec {

enum class FactorBlock { A, B, C };

/// Which factor columns the sampled updates touch, plus the bookkeeping the
/// swap rule needs. Indices are 0-based column indices into the factors.
struct SampleState {
  std::vector<Index> indices;      // current sample S, sorted, |S| constant
  Vector last_decrease;            // per column: objective decrease of its most recent update
  std::vector<long> last_sampled;  // per column: last iteration it was in S (-1 = never)

  void validate(Index rank) const {
    if (indices.empty() || static_cast<Index>(indices.size()) > rank) {
      throw std::invalid_argument("SampleState: sample size must be in [1, rank]");
    }
    std::vector<Index> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] < 0 || sorted[i] >= rank) {
        throw std::invalid_argument("SampleState: index out of range");
      }
      if (i > 0 && sorted[i] == sorted[i - 1]) {
        throw std::invalid_argument("SampleState: duplicate sample index");
      }
    }
  }
};

inline SampleState make_sample_state(Index rank, Index sample_size) {
  if (sample_size < 1 || sample_size > rank) {
    throw std::invalid_argument("sample size " + std::to_string(sample_size) +
                                " out of range [1, " + std::to_string(rank) + "]");
  }
  SampleState s;
  s.indices.resize(static_cast<std::size_t>(sample_size));
  std::iota(s.indices.begin(), s.indices.end(), Index{0});
  s.last_decrease = Vector::Constant(rank, std::numeric_limits<double>::infinity());
  s.last_sampled.assign(static_cast<std::size_t>(rank), -1);
  for (Index i = 0; i < sample_size; ++i) s.last_sampled[static_cast<std::size_t>(i)] = 0;
  return s;
}

namespace detail {

inline Matrix select_columns(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Index>(c)) = m.col(idx[c]);
  return out;
}

inline std::vector<Index> complement_indices(const std::vector<Index>& s, Index rank) {
  std::vector<char> in(static_cast<std::size_t>(rank), 0);
  for (Index i : s) in[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> out;
  for (Index r = 0; r < rank; ++r)
    if (!in[static_cast<std::size_t>(r)]) out.push_back(r);
  return out;
}

struct SampledSolveResult {
  Matrix new_columns;  // mode_dim x |S|
  Vector decrease;     // per sampled index, sums to the block's objective decrease
};

/// Solves the stationarity system for the sampled columns of one factor:
///   T_S * P^S = X_(n) (O_S kr Q_S) - T_{S^c} * P^{S^c},
/// with P = (O^T O_S) had (Q^T Q_S). The solve itself is |S| x |S|. The
/// decrease of f = 1/2 ||X - recon||_F^2 is exact for a block minimizer,
///   delta f = 1/2 tr(D P^S D^T), D = old_S - new_S,
/// and is attributed per column by the row sums of (D^T D) had P^S.
inline SampledSolveResult sampled_solve(const Matrix& x_unf, Matrix& target, const Matrix& outer,
                                        const Matrix& inner, const std::vector<Index>& sample) {
  const Matrix outer_s = select_columns(outer, sample);
  const Matrix inner_s = select_columns(inner, sample);
  const Matrix p = ((outer.transpose() * outer_s).array() * (inner.transpose() * inner_s).array()).matrix();

  const Index s = static_cast<Index>(sample.size());
  const Index rank = target.cols();
  Matrix p_s(s, s);
  for (Index r = 0; r < s; ++r) p_s.row(r) = p.row(sample[static_cast<std::size_t>(r)]);

  Matrix rhs = x_unf * khatri_rao(outer_s, inner_s);
  if (s < rank) {
    const auto comp = complement_indices(sample, rank);
    Matrix p_sc(static_cast<Index>(comp.size()), s);
    for (std::size_t r = 0; r < comp.size(); ++r) p_sc.row(static_cast<Index>(r)) = p.row(comp[r]);
    rhs.noalias() -= select_columns(target, comp) * p_sc;
  }

  SampledSolveResult res;
  res.new_columns = solve_against_gram(rhs, p_s);

  Matrix delta = select_columns(target, sample) - res.new_columns;
  const Matrix contrib = ((delta.transpose() * delta).array() * p_s.array()).matrix();
  res.decrease = 0.5 * contrib.rowwise().sum();

  for (std::size_t c = 0; c < sample.size(); ++c)
    target.col(sample[c]) = res.new_columns.col(static_cast<Index>(c));
  return res;
}

struct BlockRefs {
  const Matrix* x_unf;
  Matrix* target;
  const Matrix* outer;
  const Matrix* inner;
};

inline BlockRefs block_refs(FactorBlock block, const Matrix& x1, const Matrix& x2, const Matrix& x3,
                            Matrix& a, Matrix& b, Matrix& c) {
  switch (block) {
    case FactorBlock::A: return {&x1, &a, &c, &b};
    case FactorBlock::B: return {&x2, &b, &c, &a};
    default:             return {&x3, &c, &b, &a};
  }
}

}  // namespace detail

/// Partial derivative of f = 1/2 ||t - recon||_F^2 with respect to the
/// sampled columns of one factor block:
///   df/dA_S = -X_(1) (C_S kr B_S) + A (C kr B)^T (C_S kr B_S)
/// and the mode-2/3 analogues. Weights are folded into the mode-1 factor
/// first, so the derivative is taken at the model's effective factors.
inline Matrix block_gradient(const DenseTensor3& t, const CPModel& model, const SampleState& state,
                             FactorBlock block) {
  model.validate();
  state.validate(model.rank());
  if (model.dims() != t.dims()) {
    throw std::invalid_argument("block_gradient: model dims do not match tensor dims");
  }
  const CPModel eff = fold_weights(model);
  const Matrix x_unf = unfold(t, block == FactorBlock::A ? 1 : block == FactorBlock::B ? 2 : 3);
  const Matrix& target = block == FactorBlock::A ? eff.A : block == FactorBlock::B ? eff.B : eff.C;
  const Matrix& outer = block == FactorBlock::C ? eff.B : eff.C;
  const Matrix& inner = block == FactorBlock::A ? eff.B : eff.A;

  const Matrix outer_s = detail::select_columns(outer, state.indices);
  const Matrix inner_s = detail::select_columns(inner, state.indices);
  const Matrix p = ((outer.transpose() * outer_s).array() * (inner.transpose() * inner_s).array()).matrix();
  return -x_unf * khatri_rao(outer_s, inner_s) + target * p;
}

/// Exact minimization of f over the sampled columns of one factor block,
/// written back in place; the complement columns are untouched. Requires a
/// unit-weight model (weights live in the factor magnitudes while the
/// sampled iteration runs). Returns the updated columns.
inline Matrix sampled_block_solve(const DenseTensor3& t, CPModel& model, const SampleState& state,
                                  FactorBlock block) {
  model.validate();
  state.validate(model.rank());
  if (model.dims() != t.dims()) {
    throw std::invalid_argument("sampled_block_solve: model dims do not match tensor dims");
  }
  if ((model.weights.array() != 1.0).any()) {
    throw std::invalid_argument("sampled_block_solve: model must carry unit weights");
  }
  const Matrix x_unf = unfold(t, block == FactorBlock::A ? 1 : block == FactorBlock::B ? 2 : 3);
  Matrix& target = block == FactorBlock::A ? model.A : block == FactorBlock::B ? model.B : model.C;
  const Matrix& outer = block == FactorBlock::C ? model.B : model.C;
  const Matrix& inner = block == FactorBlock::A ? model.B : model.A;
  return detail::sampled_solve(x_unf, target, outer, inner, state.indices).new_columns;
}

struct SmalsOptions {
  int max_iters = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

/// Sampled ALS: each iteration solves the three block systems restricted to
/// the sampled columns S, then swaps the least productive sampled index for
/// the longest-unsampled one. With |S| = rank this reproduces the full ALS
/// sweep. The swap is deterministic: evict the sampled index with the
/// smallest decrease attributed to its most recent update, admit the
/// complement index that has been out of the sample longest; ties go to the
/// lowest index.
inline std::pair<CPModel, FitTrace> smals(const DenseTensor3& t, Index rank, Index sample_size,
                                          const SmalsOptions& opts = {}) {
  detail::check_cp_rank(t, rank);
  if (sample_size < 1 || sample_size > rank) {
    throw std::invalid_argument("smals: sample size " + std::to_string(sample_size) +
                                " out of range [1, " + std::to_string(rank) + "]");
  }
  if (opts.max_iters < 1) throw std::invalid_argument("smals: max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("smals: tol must be positive");
  if (!all_finite(t)) throw std::invalid_argument("smals: input tensor has non-finite entries");

  const auto d = t.dims();
  auto factors = detail::init_factors(d, rank, opts.seed);
  Matrix& A = factors[0];
  Matrix& B = factors[1];
  Matrix& C = factors[2];

  const Matrix X1 = unfold(t, 1);
  const Matrix X2 = unfold(t, 2);
  const Matrix X3 = unfold(t, 3);

  SampleState state = make_sample_state(rank, sample_size);

  CPModel probe;  // unit weights; reused for the per-iteration error
  probe.weights = Vector::Ones(rank);

  FitTrace trace;
  double prev_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iters; ++it) {
    const auto t0 = std::chrono::steady_clock::now();

    Vector dec = Vector::Zero(rank);
    for (FactorBlock block : {FactorBlock::A, FactorBlock::B, FactorBlock::C}) {
      auto refs = detail::block_refs(block, X1, X2, X3, A, B, C);
      auto res = detail::sampled_solve(*refs.x_unf, *refs.target, *refs.outer, *refs.inner, state.indices);
      for (std::size_t c = 0; c < state.indices.size(); ++c)
        dec(state.indices[c]) += res.decrease(static_cast<Index>(c));
    }
    for (Index r : state.indices) state.last_decrease(r) = dec(r);

    probe.A = A;
    probe.B = B;
    probe.C = C;
    const double err = relative_error(t, probe);

    trace.wall_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    trace.relative_errors.push_back(err);

    for (Index r : state.indices) state.last_sampled[static_cast<std::size_t>(r)] = it;

    if (std::abs(prev_err - err) < opts.tol) {
      trace.converged = true;
      break;
    }
    prev_err = err;

    if (sample_size < rank) {
      std::size_t evict_pos = 0;
      for (std::size_t i = 1; i < state.indices.size(); ++i) {
        if (state.last_decrease(state.indices[i]) < state.last_decrease(state.indices[evict_pos]))
          evict_pos = i;
      }
      const auto comp = detail::complement_indices(state.indices, rank);
      Index admit = comp.front();
      for (Index j : comp) {
        if (state.last_sampled[static_cast<std::size_t>(j)] <
            state.last_sampled[static_cast<std::size_t>(admit)])
          admit = j;
      }
      state.indices.erase(state.indices.begin() + static_cast<std::ptrdiff_t>(evict_pos));
      state.indices.insert(std::upper_bound(state.indices.begin(), state.indices.end(), admit), admit);
    }
  }

  CPModel model;
  model.A = A;
  model.B = B;
  model.C = C;
  const Vector na = normalize_columns(model.A);
  const Vector nb = normalize_columns(model.B);
  const Vector nc = normalize_columns(model.C);
  model.weights = (na.array() * nb.array() * nc.array()).matrix();
  return {std::move(model), std::move(trace)};
}

}  // namespace tensordec
