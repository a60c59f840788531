// SPDX-License-Identifier: Apache-2.0
#include "tensordec/lrat.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace tensordec;

namespace {

// The shared sparse-fit fixture: exact rank-2, gaussian factors, 10x10x10.
DenseTensor3 rank2_fixture() {
  return oracle::tensor_from_factors(oracle::gauss_matrix(10, 2, 1), oracle::gauss_matrix(10, 2, 2),
                                     oracle::gauss_matrix(10, 2, 3));
}

ObservationMask hide_uniform(const std::array<Index, 3>& d, double frac, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ObservationMask m(d[0], d[1], d[2], true);
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        if (u(rng) < frac) m.set(i, j, k, false);
  return m;
}

double hidden_relative_error(const DenseTensor3& truth, const DenseTensor3& got,
                             const ObservationMask& om) {
  double num = 0.0, den = 0.0;
  const auto d = truth.dims();
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        if (!om(i, j, k)) {
          const double diff = got(i, j, k) - truth(i, j, k);
          num += diff * diff;
          den += truth(i, j, k) * truth(i, j, k);
        }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("soft threshold definition cases") {
  Vector x(2);
  x << 1.2, -0.3;
  const Vector got = soft_threshold(x, 0.5);
  // By hand: sign(1.2)*max(0.7,0) = 0.7; sign(-0.3)*max(-0.2,0) = 0.
  REQUIRE_THAT(got(0), Catch::Matchers::WithinAbs(0.7, 1e-15));
  REQUIRE(got(1) == 0.0);

  const Vector same = soft_threshold(x, 0.0);
  REQUIRE(same == x);

  REQUIRE(soft_threshold(Vector::Zero(4), 3.0).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(soft_threshold(x, -1.0), std::invalid_argument);
}

TEST_CASE("soft threshold solves the scalar shrinkage problem") {
  // Grid-search argmin of 1/2 (z-x)^2 + kappa |z| per component.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), uk(0.0, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = ux(rng);
    const double kappa = uk(rng);
    double best_z = -3.0, best_v = std::numeric_limits<double>::infinity();
    for (double z = -3.0; z <= 3.0; z += 1e-3) {
      const double v = 0.5 * (z - x) * (z - x) + kappa * std::abs(z);
      if (v < best_v) {
        best_v = v;
        best_z = z;
      }
    }
    Vector xs(1);
    xs << x;
    REQUIRE_THAT(soft_threshold(xs, kappa)(0), Catch::Matchers::WithinAbs(best_z, 2e-3));
  }
}

TEST_CASE("unregularized fit at the true rank collapses to CP fitting") {
  const DenseTensor3 t = rank2_fixture();
  LratConfig cfg;
  cfg.max_rank = 2;
  cfg.lambda = 0.0;
  cfg.max_iters = 8000;
  cfg.tol = 1e-14;
  const auto r = lrat_fit(t, cfg, 5);
  REQUIRE(r.trace.relative_errors.back() < 1e-4);
  REQUIRE(r.estimated_rank == 2);
}

TEST_CASE("calibrated lambda recovers the true rank under an overestimate") {
  // Calibration (recorded from the lambda sweep on this instance): with
  // max_rank 6, estimated rank 2 holds for lambda in [0.05, 8] at
  // t_scale 1; lambda 0.1 sits at the heuristic estimate for this tensor.
  const DenseTensor3 t = rank2_fixture();
  LratConfig cfg;
  cfg.max_rank = 6;
  cfg.lambda = 0.1;
  cfg.t_scale = 1.0;
  cfg.max_iters = 3000;
  cfg.tol = 1e-12;
  const auto r = lrat_fit(t, cfg, 5);
  REQUIRE(r.estimated_rank == 2);
  REQUIRE(r.trace.relative_errors.back() < 1e-2);
}

TEST_CASE("penalized objective is nonincreasing across iterations") {
  const DenseTensor3 t = rank2_fixture();
  for (double lambda : {0.0, 0.1, 2.0}) {
    LratConfig cfg;
    cfg.max_rank = 6;
    cfg.lambda = lambda;
    cfg.max_iters = 1500;
    cfg.tol = 1e-12;
    const auto r = lrat_fit(t, cfg, 0);
    for (std::size_t i = 1; i < r.trace.objectives.size(); ++i) {
      REQUIRE(r.trace.objectives[i] <= r.trace.objectives[i - 1] + 1e-8);
    }
  }
}

TEST_CASE("factor columns hold unit norm after every iteration") {
  const DenseTensor3 t = rank2_fixture();
  LratConfig cfg;
  cfg.max_rank = 4;
  cfg.lambda = 0.2;
  cfg.max_iters = 300;
  cfg.tol = 1e-12;
  const auto r = lrat_fit(t, cfg, 7);
  for (double defect : r.trace.unit_norm_defects) REQUIRE(defect < 1e-10);
}

TEST_CASE("increasing lambda never increases the nonzero weight count") {
  const DenseTensor3 t = rank2_fixture();
  Index prev = std::numeric_limits<Index>::max();
  for (double lambda : {0.0, 0.05, 0.5, 2.0, 8.0}) {
    LratConfig cfg;
    cfg.max_rank = 6;
    cfg.lambda = lambda;
    cfg.t_scale = 1.0;  // the calibrated-rank setting
    cfg.max_iters = 3000;
    cfg.tol = 1e-12;
    const auto r = lrat_fit(t, cfg, 5);
    REQUIRE(r.estimated_rank <= prev);
    prev = r.estimated_rank;
  }
}

TEST_CASE("completion with a full mask returns the input exactly") {
  const DenseTensor3 t = rank2_fixture();
  LratConfig cfg;
  cfg.max_rank = 3;
  cfg.max_iters = 50;
  const auto r = lrat_complete(t, ObservationMask::all_observed(t.dims()), cfg, 1);
  REQUIRE(r.completed.data() == t.data());
}

TEST_CASE("completion recovers 20 percent hidden entries of a rank-2 tensor") {
  const DenseTensor3 t = rank2_fixture();
  const ObservationMask om = hide_uniform(t.dims(), 0.2, 77);
  LratConfig cfg;
  cfg.max_rank = 4;
  cfg.lambda = 0.05;
  cfg.max_iters = 4000;
  cfg.tol = 1e-13;
  const auto r = lrat_complete(t, om, cfg, 5);

  REQUIRE(hidden_relative_error(t, r.completed, om) < 1e-2);

  // Observed entries pass through bitwise.
  const auto d = t.dims();
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i)
        if (om(i, j, k)) REQUIRE(r.completed(i, j, k) == t(i, j, k));
}

TEST_CASE("completion rejects an empty mask and divergent configs abort") {
  const DenseTensor3 t = rank2_fixture();
  ObservationMask empty(10, 10, 10, false);
  REQUIRE_THROWS_AS(lrat_complete(t, empty, LratConfig{.max_rank = 2}, 0), std::invalid_argument);

  LratConfig wild;
  wild.max_rank = 3;
  wild.t_scale = 1e-9;  // absurd step size; the fit must detect the blowup
  wild.max_iters = 200;
  REQUIRE_THROWS_AS(lrat_fit(t, wild, 0), std::runtime_error);

  DenseTensor3 bad = t;
  bad(0, 0, 0) = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(lrat_fit(bad, LratConfig{.max_rank = 2}, 0), std::invalid_argument);

  REQUIRE_THROWS_AS(lrat_fit(t, LratConfig{.max_rank = 0}, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(lrat_fit(t, LratConfig{.max_rank = 101}, 0), std::invalid_argument);
}

TEST_CASE("estimate_lambda heuristic cases") {
  DenseTensor3 z(3, 3, 3);
  REQUIRE(estimate_lambda(z, ObservationMask::all_observed(z.dims())) == 0.0);

  const DenseTensor3 t = rank2_fixture();
  const ObservationMask om = ObservationMask::all_observed(t.dims());
  const double base = estimate_lambda(t, om);
  REQUIRE(base > 0.0);

  DenseTensor3 scaled = t;
  for (auto& v : scaled.data()) v *= 3.0;
  REQUIRE_THAT(estimate_lambda(scaled, om), Catch::Matchers::WithinRel(3.0 * base, 1e-12));

  // Pluggable strategy wins over the heuristic.
  const double fixed = estimate_lambda(t, om, [](const DenseTensor3&, const ObservationMask&) {
    return 42.0;
  });
  REQUIRE(fixed == 42.0);
}

TEST_CASE("lrat runs are deterministic given identical inputs") {
  const DenseTensor3 t = rank2_fixture();
  LratConfig cfg;
  cfg.max_rank = 3;
  cfg.lambda = 0.1;
  cfg.max_iters = 200;
  const auto r1 = lrat_fit(t, cfg, 9);
  const auto r2 = lrat_fit(t, cfg, 9);
  REQUIRE(r1.trace.relative_errors == r2.trace.relative_errors);
  REQUIRE(r1.model.weights == r2.model.weights);
}
