#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "lgest/matrix.hpp"
#include "lgest/spd.hpp"

namespace lgest {

// ---------------------------------------------------------------------------
// Deterministic, stream-splittable randomness.
//
// Algorithms (all bit-exact across platforms, fixed for the life of the file
// formats; the id string below is written into output metadata):
//   - splitmix64 finalizer for key mixing and seed expansion
//   - xoshiro256++ 1.0 as the uniform generator
//   - Box-Muller on (0,1] doubles for standard normals
// Substreams are derived from (master_seed, stream_index, role) so that the
// initial state, process noise and measurement noise of every Monte-Carlo
// run come from generators independent by construction.
// ---------------------------------------------------------------------------

inline constexpr const char* kGeneratorId =
    "xoshiro256++-1.0/splitmix64/box-muller";

inline constexpr std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

/// splitmix64 output finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : s_(seed) {}
  constexpr std::uint64_t next() {
    s_ += 0x9E3779B97F4A7C15ULL;
    return mix64(s_);
  }

 private:
  std::uint64_t s_;
};

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl64(s_[3], 45);
    return result;
  }

  /// Uniform double in (0,1]; never 0, so log() is safe.
  double next_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::uint64_t s_[4];
};

/// Substream roles within one simulated run.
namespace stream_role {
inline constexpr std::uint64_t kInitialState = 0;
inline constexpr std::uint64_t kProcessNoise = 1;
inline constexpr std::uint64_t kMeasurementNoise = 2;
inline constexpr std::uint64_t kVerifyInstances = 3;
inline constexpr std::uint64_t kVerifyRetry = 4;
}  // namespace stream_role

/// Key-mix master seed with a stream index and a role into a substream seed.
inline constexpr std::uint64_t derive_stream_seed(std::uint64_t master,
                                                  std::uint64_t stream,
                                                  std::uint64_t role) {
  std::uint64_t key = master;
  key = mix64(key ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  key = mix64(key ^ (0xD1B54A32D192ED03ULL * (role + 1)));
  return key;
}

// ---------------------------------------------------------------------------
// Gaussian sampling: Box-Muller pairs over the uniform stream, factor
// transform for correlated draws (cov = L L^T, draw = mean + L xi).
// ---------------------------------------------------------------------------
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : gen_(seed) {}

  double standard() {
    if (cached_) {
      const double v = *cached_;
      cached_.reset();
      return v;
    }
    const double u1 = gen_.next_unit();
    const double u2 = gen_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    cached_ = r * std::sin(a);
    return r * std::cos(a);
  }

  Vector standard_vector(std::size_t n) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = standard();
    return v;
  }

  /// Draw from N(mean, cov) using the certified factor of cov.
  Vector gaussian(const Vector& mean, const SpdMatrix& cov) {
    return mean + cov.chol_lower() * standard_vector(cov.dim());
  }

  std::uint64_t next_u64() { return gen_.next(); }
  double next_unit() { return gen_.next_unit(); }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  Xoshiro256pp gen_;
  std::optional<double> cached_;
};

}  // namespace lgest
