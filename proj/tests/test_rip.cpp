#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cosa/errors.hpp"
#include "cosa/matrix.hpp"
#include "cosa/projection.hpp"
#include "cosa/rip.hpp"
#include "cosa/rng.hpp"
#include "cosa/sparse.hpp"
#include "oracles.hpp"

using cosa::Matrix;

TEST_CASE("sample_sparse_vector basics") {
  const auto full = cosa::sample_sparse_vector(1, 6, 6);
  REQUIRE(full.support.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(full.support[i] == i);

  const auto v1 = cosa::sample_sparse_vector(2, 40, 5);
  const auto v2 = cosa::sample_sparse_vector(2, 40, 5);
  CHECK(v1.support == v2.support);
  CHECK(v1.values == v2.values);
  for (std::size_t i = 1; i < v1.support.size(); ++i) {
    CHECK(v1.support[i] > v1.support[i - 1]);
  }
  for (double value : v1.values) CHECK(value != 0.0);

  CHECK_THROWS_AS(cosa::sample_sparse_vector(1, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(cosa::sample_sparse_vector(1, 10, 11), std::invalid_argument);
}

TEST_CASE("sampled supports are uniform") {
  const std::size_t trials = 100000;
  std::vector<std::size_t> hits(10, 0);
  for (std::size_t seed = 0; seed < trials; ++seed) {
    for (std::size_t idx : cosa::sample_sparse_vector(seed, 10, 3).support) {
      hits[idx] += 1;
    }
  }
  for (std::size_t idx = 0; idx < 10; ++idx) {
    const double freq = static_cast<double>(hits[idx]) / trials;
    CHECK(std::fabs(freq - 0.3) <= 0.01);
  }
}

TEST_CASE("isometry_ratio agrees with the materialized dictionary") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto view =
        cosa::make_dictionary_view(cosa::make_projection_pair(seed, 6, 5, 4, 3));
    const Matrix psi = oracles::materialize_dictionary(view);
    const auto alpha = cosa::sample_sparse_vector(seed + 100, view.core_dim(), 4);

    std::vector<double> dense(view.core_dim(), 0.0);
    for (std::size_t k = 0; k < alpha.support.size(); ++k) {
      dense[alpha.support[k]] = alpha.values[k];
    }
    double num = 0.0;
    for (std::size_t r = 0; r < psi.rows(); ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < psi.cols(); ++c) acc += psi(r, c) * dense[c];
      num += acc * acc;
    }
    const double expect = num / alpha.squared_norm();
    CHECK(cosa::isometry_ratio(view, alpha) == doctest::Approx(expect).epsilon(1e-12));

    // Homogeneity: scaling the coefficients leaves the ratio unchanged.
    cosa::SparseVector scaled = alpha;
    for (double& value : scaled.values) value *= 10.0;
    CHECK(cosa::isometry_ratio(view, scaled) ==
          doctest::Approx(cosa::isometry_ratio(view, alpha)).epsilon(1e-12));
  }
}

TEST_CASE("orthonormal full-dimension pairs are exact isometries") {
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(4, 8, 8, 8, 8, true));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto alpha = cosa::sample_sparse_vector(seed, 64, 1 + seed % 20);
    CHECK(std::fabs(cosa::isometry_ratio(view, alpha) - 1.0) <= 1e-10);
  }
  for (std::size_t s : {std::size_t{1}, std::size_t{5}, std::size_t{20}}) {
    CHECK(cosa::estimate_rip(view, s, 200, 9).delta <= 1e-10);
  }
}

TEST_CASE("isometry_ratio rejects degenerate input") {
  const auto view = cosa::make_dictionary_view(cosa::make_projection_pair(1, 6, 5, 3, 2));
  cosa::SparseVector zero;
  zero.dim = 6;
  zero.support = {0};
  zero.values = {0.0};
  CHECK_THROWS_AS(cosa::isometry_ratio(view, zero), std::invalid_argument);
  cosa::SparseVector wrong;
  wrong.dim = 7;
  wrong.support = {0};
  wrong.values = {1.0};
  CHECK_THROWS_AS(cosa::isometry_ratio(view, wrong), cosa::shape_error);
}

TEST_CASE("estimate_rip is thread-count invariant and validates N") {
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(2, 64, 48, 16, 8));
  const auto serial = cosa::estimate_rip(view, 5, 500, 7, 1, true);
  const auto parallel = cosa::estimate_rip(view, 5, 500, 7, 4, true);
  CHECK(serial.delta == parallel.delta);
  CHECK(serial.ratios == parallel.ratios);
  CHECK_THROWS_AS(cosa::estimate_rip(view, 5, 99, 7), std::invalid_argument);
}

TEST_CASE("theoretical bound formula") {
  cosa::RipTheoryConfig cfg;
  cfg.c = 1.0;
  cfg.m_eff = 512;
  cfg.n_ambient = 256;
  const double b10 = cosa::theoretical_bound(cfg, 10);
  CHECK(b10 == doctest::Approx(std::sqrt(10.0 * std::log(256.0) / 512.0)).epsilon(1e-14));
  CHECK(b10 == doctest::Approx(0.32918).epsilon(1e-4));
  CHECK(cosa::theoretical_bound(cfg, 40) == doctest::Approx(2.0 * b10).epsilon(1e-12));
  cfg.c = 2.0;
  CHECK(cosa::theoretical_bound(cfg, 10) == doctest::Approx(2.0 * b10).epsilon(1e-12));
}

TEST_CASE("conservative factor") {
  cosa::RipEstimate est;
  est.delta = 0.15;
  CHECK(cosa::conservative_factor(est, 0.3) == doctest::Approx(2.0));
  CHECK(cosa::conservative_factor(est, 0.15) == doctest::Approx(1.0));
  est.delta = 0.0;
  CHECK(std::isinf(cosa::conservative_factor(est, 0.3)));
}

TEST_CASE("study report shape and determinism") {
  cosa::RipStudyOptions opts;
  opts.num_samples = 200;
  const auto one = cosa::run_rip_study({{8, 4}}, {3}, 32, 24, {5}, opts);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].delta_std == 0.0);

  opts.threads = 3;
  const auto a = cosa::run_rip_study({{8, 4}, {16, 8}}, {3, 5}, 32, 24, {5, 6}, opts);
  opts.threads = 1;
  const auto b = cosa::run_rip_study({{8, 4}, {16, 8}}, {3, 5}, 32, 24, {5, 6}, opts);
  REQUIRE(a.rows.size() == 4);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].delta_mean == b.rows[i].delta_mean);
    CHECK(a.rows[i].delta_std == b.rows[i].delta_std);
    CHECK(a.rows[i].coherence_mean == b.rows[i].coherence_mean);
  }
  CHECK_THROWS_AS(cosa::run_rip_study({}, {3}, 32, 24, {5}, opts), std::invalid_argument);
}

TEST_CASE("difference vectors stay well conditioned") {
  // Differences of two s-sparse vectors are at most 2s-sparse; their
  // distortion stays within a comfortable band on the widest configuration.
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(1, 512, 256, 256, 64));
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const auto a1 = cosa::sample_sparse_vector(cosa::derive_seed(10, trial), 256 * 64, 10);
    const auto a2 = cosa::sample_sparse_vector(cosa::derive_seed(11, trial), 256 * 64, 10);
    cosa::SparseVector diff;
    diff.dim = a1.dim;
    std::size_t i = 0, j = 0;
    while (i < a1.support.size() || j < a2.support.size()) {
      if (j == a2.support.size() ||
          (i < a1.support.size() && a1.support[i] < a2.support[j])) {
        diff.support.push_back(a1.support[i]);
        diff.values.push_back(a1.values[i]);
        ++i;
      } else if (i == a1.support.size() || a2.support[j] < a1.support[i]) {
        diff.support.push_back(a2.support[j]);
        diff.values.push_back(-a2.values[j]);
        ++j;
      } else {
        const double v = a1.values[i] - a2.values[j];
        if (v != 0.0) {
          diff.support.push_back(a1.support[i]);
          diff.values.push_back(v);
        }
        ++i;
        ++j;
      }
    }
    const double ratio = cosa::isometry_ratio(view, diff);
    CHECK(ratio >= 0.7);
    CHECK(ratio <= 1.3);
  }
}

TEST_CASE("omp recovers planted supports on an orthonormal pair") {
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(6, 24, 20, 10, 6, true));
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const auto planted = cosa::sample_sparse_vector(cosa::derive_seed(20, trial),
                                                    view.core_dim(), 3);
    const Matrix target = cosa::apply_dictionary(view, planted);
    const auto recovered = cosa::omp_recover(view, target, 3);
    REQUIRE(recovered.support == planted.support);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::fabs(recovered.values[k] - planted.values[k]) <= 1e-8);
    }
  }
}

TEST_CASE("omp recovers well-separated supports on a Gaussian pair") {
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(7, 512, 256, 32, 8));
  std::size_t successes = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    auto planted = cosa::sample_sparse_vector(cosa::derive_seed(30, trial), 256, 3);
    for (double& v : planted.values) {
      v = (v >= 0 ? 1.0 : -1.0) * (0.5 + std::fabs(v));
    }
    const Matrix target = cosa::apply_dictionary(view, planted);
    const auto recovered = cosa::omp_recover(view, target, 3);
    if (recovered.support == planted.support) ++successes;
  }
  CHECK(successes >= 95);
}

TEST_CASE("omp handles a zero target") {
  const auto view = cosa::make_dictionary_view(cosa::make_projection_pair(1, 8, 6, 4, 3));
  const auto result = cosa::omp_recover(view, Matrix(8, 6), 3);
  CHECK(result.support.empty());
  CHECK_THROWS_AS(cosa::omp_recover(view, Matrix(8, 6), 13), std::invalid_argument);
}

TEST_CASE("repeated estimates concentrate") {
  const auto view =
      cosa::make_dictionary_view(cosa::make_projection_pair(3, 512, 256, 64, 16));
  std::vector<double> deltas;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    deltas.push_back(cosa::estimate_rip(view, 10, 1000, cosa::derive_seed(99, rep)).delta);
  }
  double mean = 0.0;
  for (double d : deltas) mean += d;
  mean /= deltas.size();
  double var = 0.0;
  for (double d : deltas) var += (d - mean) * (d - mean);
  var /= deltas.size();
  CHECK(std::sqrt(var) <= 0.05);
}
