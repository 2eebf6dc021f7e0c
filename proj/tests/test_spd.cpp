#include "lgest/spd.hpp"

#include <cmath>

#include "catch_amalgamated.hpp"
#include "lgest/random_instances.hpp"
#include "lgest/rng.hpp"
#include "support/naive.hpp"

using namespace lgest;

TEST_CASE("cholesky of a hand-factored matrix", "[spd]") {
  const SpdMatrix a = spd_check(Matrix{{4.0, 2.0}, {2.0, 3.0}});
  const Matrix& l = a.chol_lower();
  REQUIRE(l(0, 0) == 2.0);
  REQUIRE(l(1, 0) == 1.0);
  REQUIRE(l(1, 1) == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(l(0, 1) == 0.0);
  REQUIRE(logdet(a) == Catch::Approx(std::log(8.0)));
  REQUIRE_FALSE(a.singular());
  REQUIRE_FALSE(a.ill_conditioned());
}

TEST_CASE("spd_check rejects bad inputs", "[spd]") {
  REQUIRE_THROWS_AS(spd_check(Matrix{{1.0, 2.0}, {2.0, 1.0}}),
                    NotPositiveDefinite);
  REQUIRE_THROWS_AS(spd_check(Matrix{{1.0, 0.5}, {0.0, 1.0}}),
                    AsymmetryExceedsTol);
  REQUIRE_THROWS_AS(spd_check(Matrix{{1.0, 0.0}, {0.0, 0.0}}),
                    NotPositiveDefinite);
  Matrix nan2(2, 2, 0.0);
  nan2(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(spd_check(nan2), Error);
}

TEST_CASE("psd_check annihilates zero pivots", "[spd]") {
  const SpdMatrix a = psd_check(Matrix{{1.0, 1.0}, {1.0, 1.0}});
  REQUIRE(a.singular());
  const Matrix& l = a.chol_lower();
  REQUIRE(max_abs_diff(l * l.transposed(), a.matrix()) < 1e-15);
  // Singular factors refuse inverse-requiring operations.
  REQUIRE_THROWS_AS(solve_spd(a, Vector{1.0, 1.0}), NotPositiveDefinite);
  REQUIRE_THROWS_AS(logdet(a), NotPositiveDefinite);
  REQUIRE_THROWS_AS(inv_quad(a, Vector{1.0, 1.0}), NotPositiveDefinite);
  // Strictly negative directions still throw even in PSD mode.
  REQUIRE_THROWS_AS(psd_check(Matrix{{1.0, 0.0}, {0.0, -1.0}}),
                    NotPositiveDefinite);
}

TEST_CASE("conditioning warning fires on large pivot ratios", "[spd]") {
  const SpdMatrix ok = spd_check(Matrix::diagonal(Vector{1.0, 1e4}));
  REQUIRE_FALSE(ok.ill_conditioned());
  const SpdMatrix bad = spd_check(Matrix::diagonal(Vector{1e-7, 1e7}));
  REQUIRE(bad.ill_conditioned());
}

TEST_CASE("solve_spd reproduces a direct inverse", "[spd]") {
  Xoshiro256pp g(derive_stream_seed(7001, 0, stream_role::kVerifyInstances));
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = random_dim(g, 1, 6);
    const SpdMatrix a = random_spd(g, n);
    const Vector b = random_uniform_vector(g, n);

    const Vector x = solve_spd(a, b);
    const Vector x_ref = naive::solve(a.matrix(), b);
    REQUIRE(max_abs_diff(x, x_ref) < 1e-9 * (1.0 + x_ref.max_abs()));
    // Residual contract: A x - b vanishes to solver tolerance.
    REQUIRE((a.matrix() * x - b).max_abs() < 1e-10 * (1.0 + b.max_abs()));

    const Matrix inv = inverse_spd(a);
    REQUIRE(max_abs_diff(inv, naive::inverse(a.matrix())) < 1e-9);
    REQUIRE(max_abs_diff(a.matrix() * inv, Matrix::identity(n)) < 1e-10);

    REQUIRE(inv_quad(a, b) == Catch::Approx(b.dot(naive::solve(a.matrix(), b)))
                                  .epsilon(1e-10));
    REQUIRE(logdet(a) ==
            Catch::Approx(naive::log_determinant(a.matrix())).epsilon(1e-10));
  }
}

TEST_CASE("factored product round-trips", "[spd]") {
  Xoshiro256pp g(derive_stream_seed(7002, 0, stream_role::kVerifyInstances));
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = random_dim(g, 1, 8);
    const SpdMatrix a = random_spd(g, n);
    const Matrix& l = a.chol_lower();
    REQUIRE(max_abs_diff(l * l.transposed(), a.matrix()) < 1e-12);
  }
}

TEST_CASE("woodbury identity against the information-form inverse", "[spd]") {
  Xoshiro256pp g(derive_stream_seed(7003, 0, stream_role::kVerifyInstances));
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = random_dim(g, 1, 5);
    const std::size_t m = random_dim(g, 1, 4);
    const SpdMatrix p = random_spd(g, n);
    const SpdMatrix r = random_spd(g, m);
    const Matrix h = random_uniform_matrix(g, m, n);

    const SpdMatrix lhs = woodbury_posterior_cov(p, h, r);
    const Matrix info = naive::inverse(p.matrix()) +
                        h.transposed() * naive::inverse(r.matrix()) * h;
    const Matrix rhs = naive::inverse(info);
    REQUIRE(rel_deviation(lhs.matrix(), rhs) < 1e-9);
  }
}

TEST_CASE("solve dimension mismatches throw", "[spd]") {
  const SpdMatrix a = spd_check(Matrix::identity(3));
  REQUIRE_THROWS_AS(solve_spd(a, Vector{1.0, 2.0}), DimensionMismatch);
  REQUIRE_THROWS_AS(inv_quad(a, Vector{1.0}), DimensionMismatch);
  REQUIRE_THROWS_AS(
      woodbury_posterior_cov(a, Matrix::identity(2), spd_check(Matrix::identity(2))),
      DimensionMismatch);
}
