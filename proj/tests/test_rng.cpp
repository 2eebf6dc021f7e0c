#include "lgest/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "catch_amalgamated.hpp"
#include "lgest/spd.hpp"

using namespace lgest;

// Reference outputs below were produced by an independent implementation of
// the published splitmix64 / xoshiro256++ 1.0 algorithms.

TEST_CASE("splitmix64 matches the reference sequence", "[rng]") {
  SplitMix64 sm(42);
  REQUIRE(sm.next() == 13679457532755275413ULL);
  REQUIRE(sm.next() == 2949826092126892291ULL);
  REQUIRE(sm.next() == 5139283748462763858ULL);
  REQUIRE(sm.next() == 6349198060258255764ULL);

  SplitMix64 zero(0);
  REQUIRE(zero.next() == 16294208416658607535ULL);
  REQUIRE(zero.next() == 7960286522194355700ULL);
  REQUIRE(zero.next() == 487617019471545679ULL);
}

TEST_CASE("mix64 finalizer matches the reference", "[rng]") {
  REQUIRE(mix64(0x123456789ABCDEFULL) == 12880392674509918508ULL);
}

TEST_CASE("xoshiro256++ matches the reference sequence", "[rng]") {
  Xoshiro256pp x(42);
  REQUIRE(x.next() == 15021278609987233951ULL);
  REQUIRE(x.next() == 5881210131331364753ULL);
  REQUIRE(x.next() == 18149643915985481100ULL);
  REQUIRE(x.next() == 12933668939759105464ULL);
  REQUIRE(x.next() == 14637574242682825331ULL);
}

TEST_CASE("generator id string is pinned", "[rng]") {
  REQUIRE(std::string(kGeneratorId) ==
          "xoshiro256++-1.0/splitmix64/box-muller");
}

TEST_CASE("unit draws live in (0, 1]", "[rng]") {
  Xoshiro256pp x(42);
  REQUIRE(x.next_unit() == 0.81430514512291);
  REQUIRE(x.next_unit() == 0.31882104006166123);
  Xoshiro256pp y(123456);
  for (int i = 0; i < 10000; ++i) {
    const double u = y.next_unit();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("substream derivation matches the reference", "[rng]") {
  REQUIRE(derive_stream_seed(1000, 0, stream_role::kInitialState) ==
          1695663257354611990ULL);
  REQUIRE(derive_stream_seed(1000, 0, stream_role::kProcessNoise) ==
          14223200369558057735ULL);
  REQUIRE(derive_stream_seed(1000, 7, stream_role::kMeasurementNoise) ==
          16413653314638901813ULL);
  // Distinct (stream, role) pairs map to distinct substream seeds.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 8; ++s)
    for (std::uint64_t r = 0; r < 5; ++r)
      seen.push_back(derive_stream_seed(1000, s, r));
  for (std::size_t i = 0; i < seen.size(); ++i)
    for (std::size_t j = i + 1; j < seen.size(); ++j)
      REQUIRE(seen[i] != seen[j]);

  Xoshiro256pp derived(derive_stream_seed(1000, 0, 0));
  REQUIRE(derived.next() == 15346751718005656638ULL);
}

TEST_CASE("box-muller normals match the reference", "[rng]") {
  GaussianSampler g(42);
  REQUIRE(g.standard() == -0.26860736946209524);
  REQUIRE(g.standard() == 0.5819710518628827);
  REQUIRE(g.standard() == -0.0544621701081508);
  REQUIRE(g.standard() == -0.1717782081219575);
}

TEST_CASE("determinism per seed and divergence across seeds", "[rng]") {
  GaussianSampler a(555), b(555), c(556);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.standard();
    REQUIRE(va == b.standard());
    if (va != c.standard()) any_diff = true;
  }
  REQUIRE(any_diff);
}

TEST_CASE("standard normal sample moments", "[rng]") {
  GaussianSampler g(2026);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = g.standard();
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // 4-sigma Monte Carlo bands: sd(mean) = 1/sqrt(n), sd(var) ~ sqrt(2/n).
  REQUIRE(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  REQUIRE(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("correlated gaussian draws honor the factor transform", "[rng]") {
  const SpdMatrix cov = spd_check(Matrix{{4.0, 2.0}, {2.0, 3.0}});
  const Vector mean{1.0, -2.0};

  // One draw is mean + L xi with xi the next two standard normals.
  GaussianSampler g(77), ref(77);
  const Vector draw = g.gaussian(mean, cov);
  const Vector xi{ref.standard(), ref.standard()};
  REQUIRE(max_abs_diff(draw, mean + cov.chol_lower() * xi) == 0.0);

  // Sample covariance approaches cov at the 4-sigma Monte Carlo level.
  GaussianSampler mc(78);
  const int n = 100000;
  Vector s(2, 0.0);
  Matrix ss(2, 2, 0.0);
  for (int i = 0; i < n; ++i) {
    const Vector v = mc.gaussian(mean, cov);
    s += v;
    ss += outer(v, v);
  }
  const Vector mhat = (1.0 / n) * s;
  const Matrix chat = (1.0 / n) * ss - outer(mhat, mhat);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double c = cov(i, j);
      const double sd =
          std::sqrt((c * c + cov(i, i) * cov(j, j)) / n);  // var of sample cov
      REQUIRE(std::abs(chat(i, j) - c) < 4.0 * sd);
    }
  }
}
